//! Monte-Carlo harness: sweeps a grid of dataset settings, trains every
//! configured optimizer on identical per-trial datasets, and aggregates
//! accuracy and distance-to-minimum-norm statistics into a CSV report.
//! Also houses `verify_suite`, a seeded bundle of the cross-module
//! equivalence checks.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::counterexamples::{self, DecisionRule, GeneratorSpec};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::models::{Dataset, GeneratorTag, Objective};
use crate::optimizers::{self, OptimizerKind, OptimizerSpec};
use crate::rng::{derive_seed, stream};
use crate::solutions;

fn default_trials() -> usize {
    100
}

fn default_test_count() -> usize {
    10_000
}

/// Full description of one table reproduction: the dataset grid, the
/// optimizer roster, and the evaluation protocol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub version: GeneratorTag,
    pub n_values: Vec<usize>,
    pub level_values: Vec<f64>,
    pub p_values: Vec<f64>,
    pub optimizers: Vec<OptimizerSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Fresh examples scored per trial.
    #[serde(default = "default_test_count")]
    pub test_count: usize,
    #[serde(default)]
    pub master_seed: u64,
    pub rule: DecisionRule,
    /// Also record distances after unit-normalizing each trained model.
    #[serde(default)]
    pub report_normalized: bool,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.test_count == 0 {
            return Err(Error::InvalidSpec(
                "trials and test_count must be at least 1".into(),
            ));
        }
        if self.n_values.is_empty() || self.level_values.is_empty() || self.p_values.is_empty()
        {
            return Err(Error::InvalidSpec("empty grid".into()));
        }
        if self.optimizers.is_empty() {
            return Err(Error::InvalidSpec("no optimizers configured".into()));
        }
        for o in &self.optimizers {
            o.validate()?;
        }
        for &n in &self.n_values {
            for &level in &self.level_values {
                for &p in &self.p_values {
                    GeneratorSpec::new(self.version, n, p, level, 0).validate()?;
                }
            }
        }
        Ok(())
    }
}

/// One aggregated row: a grid cell and optimizer with its statistics.
/// Medians are taken across non-diverged trials, accuracy is a mean; a
/// cell with more than 10% diverged trials reports NaN statistics rather
/// than misleading medians, keeping the diverged count visible.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub n: usize,
    pub level: f64,
    pub p: f64,
    pub optimizer: String,
    pub accuracy_pct: f64,
    pub median_dist_mn: f64,
    pub median_dist_mn_normalized: f64,
    pub median_train_residual: f64,
    pub diverged_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

pub const CSV_HEADER: &str = "n,level,p,optimizer,accuracy_pct,median_dist_mn,median_dist_mn_normalized,median_train_residual,diverged_trials";

impl ExperimentReport {
    /// CSV with floats at 17 significant digits, which round-trips `f64`
    /// exactly.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(128 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.n,
                r.level,
                r.p,
                r.optimizer,
                r.accuracy_pct,
                r.median_dist_mn,
                r.median_dist_mn_normalized,
                r.median_train_residual,
                r.diverged_trials,
            ));
        }
        out
    }
}

/// How trials are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

/// The widest schedule the build supports.
pub fn default_execution() -> Execution {
    #[cfg(feature = "parallel")]
    {
        Execution::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    {
        Execution::Sequential
    }
}

fn map_trials<T, F>(trials: usize, exec: Execution, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    match exec {
        Execution::Sequential => (0..trials).map(f).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..trials).into_par_iter().map(f).collect()
        }
    }
}

struct TrialMetrics {
    accuracy: f64,
    dist: f64,
    ndist: f64,
    residual: f64,
}

/// Median of the values; NaN when empty or when any entry is NaN.
fn median(values: &[f64]) -> f64 {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return f64::NAN;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN here"));
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

const DATASET_STREAM: u64 = 0;
const TEST_STREAM: u64 = 1;

fn cell_trial_seed(spec: &ExperimentSpec, stream_tag: u64, n: usize, level: f64, p: f64, trial: usize) -> u64 {
    derive_seed(
        spec.master_seed,
        &[
            stream_tag,
            spec.version as u64,
            n as u64,
            level.to_bits(),
            p.to_bits(),
            trial as u64,
        ],
    )
}

/// Everything one trial produces: per-optimizer metrics, `None` where the
/// optimizer diverged.
fn run_trial(
    spec: &ExperimentSpec,
    n: usize,
    level: f64,
    p: f64,
    trial: usize,
) -> Result<Vec<Option<TrialMetrics>>> {
    let dataset_seed = cell_trial_seed(spec, DATASET_STREAM, n, level, p, trial);
    let test_seed = cell_trial_seed(spec, TEST_STREAM, n, level, p, trial);
    let gspec = GeneratorSpec {
        version: spec.version,
        n,
        p,
        level,
        d: None,
        seed: dataset_seed,
    };
    let dataset = counterexamples::generate(&gspec)?;
    let w_mn = solutions::min_norm_solution(&dataset.x, &dataset.y)?.w;
    let obj = Objective::plain(dataset);
    let eta = optimizers::default_step_size(&obj)?;

    let mut results = Vec::with_capacity(spec.optimizers.len());
    for base in &spec.optimizers {
        let mut ospec = base.clone();
        if ospec.eta.is_none() {
            ospec.eta = Some(eta);
        }
        let w = match optimizers::run_final(&obj, &ospec) {
            Ok(w) => w,
            Err(Error::Diverged { .. }) => {
                results.push(None);
                continue;
            }
            Err(other) => return Err(other),
        };
        let mut diff = w.clone();
        diff.axpy(-1.0, &w_mn);
        let dist = diff.norm();
        let ndist = if spec.report_normalized {
            match w.normalized() {
                Ok(unit) => {
                    let mut nd = unit;
                    nd.axpy(-1.0, &w_mn);
                    nd.norm()
                }
                Err(_) => f64::NAN,
            }
        } else {
            f64::NAN
        };
        let residual = obj.residual_norm(&w)?;
        let accuracy =
            counterexamples::evaluate_accuracy(&w, &gspec, spec.test_count, spec.rule, test_seed)?;
        results.push(Some(TrialMetrics {
            accuracy,
            dist,
            ndist,
            residual,
        }));
    }
    Ok(results)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    run_experiment_with(spec, default_execution())
}

/// Runs the grid with an explicit schedule. Trials are independent;
/// aggregation consumes them in trial order, so the schedule cannot change
/// the report.
pub fn run_experiment_with(spec: &ExperimentSpec, exec: Execution) -> Result<ExperimentReport> {
    spec.validate()?;
    let mut report = ExperimentReport::default();
    for &n in &spec.n_values {
        for &level in &spec.level_values {
            for &p in &spec.p_values {
                let outcomes =
                    map_trials(spec.trials, exec, |t| run_trial(spec, n, level, p, t))?;
                for (oi, base) in spec.optimizers.iter().enumerate() {
                    let per_trial: Vec<&Option<TrialMetrics>> =
                        outcomes.iter().map(|o| &o[oi]).collect();
                    let finished: Vec<&TrialMetrics> =
                        per_trial.iter().filter_map(|m| m.as_ref()).collect();
                    let diverged = spec.trials - finished.len();
                    let invalid = diverged * 10 > spec.trials;
                    let (accuracy, dist, ndist, residual) = if invalid {
                        (f64::NAN, f64::NAN, f64::NAN, f64::NAN)
                    } else {
                        let acc: Vec<f64> = finished.iter().map(|m| m.accuracy).collect();
                        let d: Vec<f64> = finished.iter().map(|m| m.dist).collect();
                        let nd: Vec<f64> = finished.iter().map(|m| m.ndist).collect();
                        let r: Vec<f64> = finished.iter().map(|m| m.residual).collect();
                        (mean(&acc), median(&d), median(&nd), median(&r))
                    };
                    report.rows.push(ReportRow {
                        n,
                        level,
                        p,
                        optimizer: base.kind.to_string(),
                        accuracy_pct: accuracy,
                        median_dist_mn: dist,
                        median_dist_mn_normalized: ndist,
                        median_train_residual: residual,
                        diverged_trials: diverged,
                    });
                }
            }
        }
    }
    Ok(report)
}

/// Canned grids matching the reproduction targets.
pub mod presets {
    use super::*;

    fn optimizer(kind: OptimizerKind) -> OptimizerSpec {
        OptimizerSpec::new(kind, 10_000)
    }

    pub fn table1() -> ExperimentSpec {
        ExperimentSpec {
            version: GeneratorTag::WilsonV1,
            n_values: vec![10, 50, 100],
            level_values: vec![1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0],
            p_values: vec![0.875],
            optimizers: vec![
                optimizer(OptimizerKind::Gd),
                optimizer(OptimizerKind::AdaGradVariant),
                optimizer(OptimizerKind::Adam),
            ],
            trials: 100,
            test_count: 10_000,
            master_seed: 0,
            rule: DecisionRule::Quant,
            report_normalized: true,
        }
    }

    pub fn table6a() -> ExperimentSpec {
        let mut spec = table1();
        spec.p_values = vec![0.375];
        spec.optimizers.insert(2, optimizer(OptimizerKind::RmsProp));
        spec
    }

    pub fn table6b() -> ExperimentSpec {
        let mut spec = table6a();
        spec.p_values = vec![0.625];
        spec
    }

    pub fn table6c() -> ExperimentSpec {
        ExperimentSpec {
            version: GeneratorTag::NewCe,
            n_values: vec![50],
            level_values: vec![0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0],
            p_values: vec![0.375, 0.5, 0.625],
            optimizers: vec![
                optimizer(OptimizerKind::Gd),
                optimizer(OptimizerKind::AdaGradVariant),
                optimizer(OptimizerKind::RmsProp),
                optimizer(OptimizerKind::Adam),
            ],
            trials: 10,
            test_count: 100,
            master_seed: 0,
            rule: DecisionRule::Sign,
            report_normalized: false,
        }
    }

    pub fn by_name(name: &str) -> Option<ExperimentSpec> {
        match name {
            "table1" => Some(table1()),
            "table6a" => Some(table6a()),
            "table6b" => Some(table6b()),
            "table6c" => Some(table6c()),
            _ => None,
        }
    }
}

/// One named check of the verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{}: {} (max error {:.3e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_error
            )?;
        }
        write!(
            f,
            "verify: {}",
            if self.passed() { "all checks passed" } else { "FAILURES PRESENT" }
        )
    }
}

const VERIFY_TOLERANCE: f64 = 1e-8;

fn rel_err(a: &Vector, b: &Vector) -> f64 {
    let mut diff = a.clone();
    diff.axpy(-1.0, b);
    diff.norm() / b.norm().max(1e-300)
}

fn random_instance(n: usize, d: usize, seed: u64) -> Result<(Matrix, Vector)> {
    use rand::Rng;
    let mut rng = stream(seed);
    let x = Matrix::from_vec(
        n,
        d,
        (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect(),
    )?;
    let y = Vector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())?;
    Ok((x, y))
}

fn check(name: &'static str, body: impl FnOnce() -> Result<f64>) -> CheckResult {
    match body() {
        Ok(max_error) => CheckResult {
            name,
            passed: max_error <= VERIFY_TOLERANCE,
            max_error,
        },
        Err(_) => CheckResult {
            name,
            passed: false,
            max_error: f64::INFINITY,
        },
    }
}

/// The iterative-vs-unrolled comparison behind the first suite check.
/// `sign` scales the unrolled result and exists so tests can prove the
/// check actually bites: `-1.0` must make it fail.
fn closed_form_equivalence_error(seed: u64, sign: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let kinds = [
        OptimizerKind::Gd,
        OptimizerKind::AdaGrad,
        OptimizerKind::AdaGradVariant,
        OptimizerKind::RmsProp,
        OptimizerKind::ConstantD,
    ];
    for (i, kind) in kinds.into_iter().enumerate() {
        for (j, over) in [false, true].into_iter().enumerate() {
            let inst_seed = derive_seed(seed, &[2, i as u64, j as u64]);
            let (n, d) = if over { (4, 9) } else { (9, 4) };
            let (x, y) = random_instance(n, d, inst_seed)?;
            let obj = Objective::plain(Dataset::new(
                x.clone(),
                y.clone(),
                1.0,
                GeneratorTag::Custom,
                0,
            )?);
            let k = 40;
            let mut ospec = OptimizerSpec::new(kind, k);
            if kind == OptimizerKind::ConstantD {
                use rand::Rng;
                let mut rng = stream(derive_seed(seed, &[3, i as u64, j as u64]));
                ospec.diagonal =
                    Some((0..d).map(|_| rng.gen_range(0.2..1.5)).collect());
                let top = ospec
                    .diagonal
                    .as_ref()
                    .unwrap()
                    .iter()
                    .cloned()
                    .fold(f64::MIN, f64::max);
                ospec.eta = Some(optimizers::default_step_size(&obj)? / top);
            }
            let traj = optimizers::run(&obj, &ospec)?;
            let eta = match ospec.eta {
                Some(v) => v,
                None => optimizers::default_step_size(&obj)?,
            };
            let err = match (kind, over) {
                (OptimizerKind::Gd, false) => {
                    let mut closed = closed_form::closed_form_gd_under(&x, &y, eta, k)?;
                    closed.scale(sign);
                    rel_err(&closed, traj.final_iterate())
                }
                (OptimizerKind::Gd, true) => {
                    let mut closed = closed_form::closed_form_gd_over(&x, &y, eta, k)?;
                    closed.scale(sign);
                    rel_err(&closed, traj.final_iterate())
                }
                (_, false) => {
                    let d_seq = traj.preconditioners.as_ref().expect("diagonal kind");
                    let mut closed =
                        closed_form::closed_form_precond_under(&x, &y, eta, d_seq, k)?;
                    closed.scale(sign);
                    rel_err(&closed, traj.final_iterate())
                }
                (_, true) => {
                    let d_seq = traj.preconditioners.as_ref().expect("diagonal kind");
                    let mut closed =
                        closed_form::closed_form_prediction_over(&x, &y, eta, d_seq, k)?;
                    closed.scale(sign);
                    let pred = x.matvec(traj.final_iterate())?;
                    rel_err(&closed, &pred)
                }
            };
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// Seeded bundle of the cross-module consistency checks. Failures land in
/// the report rather than erroring, so a broken invariant is visible with
/// its measured error.
pub fn verify_suite(seed: u64) -> VerifyReport {
    let checks = vec![
        check("iterative matches unrolled forms", || {
            closed_form_equivalence_error(seed, 1.0)
        }),
        check("minimum-norm solution interpolates in row space", || {
            let mut worst: f64 = 0.0;
            for i in 0..5u64 {
                let (x, y) = random_instance(3, 8, derive_seed(seed, &[4, i]))?;
                let sol = solutions::min_norm_solution(&x, &y)?;
                worst = worst.max(sol.residual / y.norm());
                let xw = x.matvec(&sol.w)?;
                let back =
                    x.matvec_transpose(&crate::linalg::solve_spd(&x.gram_outer(), &xw)?)?;
                let mut orth = sol.w.clone();
                orth.axpy(-1.0, &back);
                worst = worst.max(orth.norm() / sol.w.norm());
            }
            Ok(worst)
        }),
        check("ridge limit shared by bounded preconditioned runs", || {
            let lambda = 0.5;
            let (x, y) = random_instance(4, 9, derive_seed(seed, &[5]))?;
            let target = solutions::ridge_solution(&x, &y, lambda)?;
            let obj = Objective::new(
                Dataset::new(x, y, 1.0, GeneratorTag::Custom, 0)?,
                lambda,
            )?;
            let mut worst: f64 = 0.0;
            for kind in [
                OptimizerKind::Gd,
                OptimizerKind::AdaGrad,
                OptimizerKind::AdaGradVariant,
                OptimizerKind::RmsProp,
            ] {
                let mut ospec = OptimizerSpec::new(kind, 6000);
                ospec.epsilon = Some(1.0);
                let w = optimizers::run_final(&obj, &ospec)?;
                worst = worst.max(rel_err(&w, &target.w));
            }
            Ok(worst)
        }),
        check("fixed-point direction holds along the trajectory", || {
            use rand::Rng;
            let n = 8;
            let mut rng = stream(derive_seed(seed, &[6]));
            let labels: Vec<f64> = (0..n)
                .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
                .collect();
            let x = Matrix::identity(n);
            let y = Vector::new(labels)?;
            let direction = match solutions::adagrad_variant_fixed_point(&x, &y)? {
                solutions::FixedPoint::Applicable { solution, .. } => solution.w,
                solutions::FixedPoint::NotApplicable { deviation } => {
                    return Err(Error::InvalidSpec(format!(
                        "identity instance unexpectedly inapplicable ({deviation})"
                    )))
                }
            };
            let obj = Objective::plain(Dataset::new(x, y, 1.0, GeneratorTag::Custom, 0)?);
            let mut ospec = OptimizerSpec::new(OptimizerKind::AdaGradVariant, 60);
            ospec.epsilon = Some(1e-12);
            let traj = optimizers::run(&obj, &ospec)?;
            let mut worst: f64 = 0.0;
            for w in traj.iterates.iter().skip(1) {
                let unit = w.normalized()?;
                let mut diff = unit.clone();
                diff.axpy(-1.0, &direction);
                let mut sum = unit;
                sum.axpy(1.0, &direction);
                worst = worst.max(diff.norm().min(sum.norm()));
            }
            Ok(worst)
        }),
        check("small-step binomial expansion agrees", || {
            let (x, y) = random_instance(7, 4, derive_seed(seed, &[7]))?;
            let a = x.gram();
            let b = x.matvec_transpose(&y)?;
            let eta = 0.17f64;
            let mut worst: f64 = 0.0;
            for k in 1..=6usize {
                let mut expected = Vector::zeros(4);
                let mut power_b = b.clone();
                let mut binom = 1.0;
                for j in 1..=k {
                    binom = binom * ((k - j + 1) as f64) / (j as f64);
                    let sgn = if (j - 1) % 2 == 0 { 1.0 } else { -1.0 };
                    expected.axpy(sgn * binom * eta.powi(j as i32), &power_b);
                    if j < k {
                        power_b = a.matvec(&power_b)?;
                    }
                }
                let got = closed_form::closed_form_gd_under(&x, &y, eta, k)?;
                worst = worst.max(rel_err(&got, &expected));
            }
            Ok(worst)
        }),
    ];
    VerifyReport { checks }
}
