//! Acceptance gate. One test per criterion; every tolerance is pinned as
//! a named constant. Each test prints a single `criterion N ...: PASS` or
//! `... FAIL` line (visible with `--nocapture`, or automatically on
//! failure) and fails with the full cell-by-cell detail.
//!
//! Criteria that the implementation cannot meet are asserted exactly as
//! stated anyway; the failure text records the measured values.

use std::process::Command;
use std::sync::LazyLock;
use std::time::Instant;

use overparam_core::closed_form;
use overparam_core::counterexamples::{self, GeneratorSpec};
use overparam_core::experiments::{presets, run_experiment, ExperimentReport, ReportRow};
use overparam_core::linalg::{Matrix, Vector};
use overparam_core::models::{Dataset, GeneratorTag, Objective};
use overparam_core::optimizers::{self, OptimizerKind, OptimizerSpec};
use overparam_core::rng::{derive_seed, stream};
use overparam_core::solutions::{self, FixedPoint};

/// Criterion 1: iterative/unrolled agreement, instance count and bounds.
const EQUIVALENCE_INSTANCES: usize = 200;
const EQUIVALENCE_MAX_SIDE: usize = 12;
const EQUIVALENCE_MAX_ITERS: usize = 100;
const EQUIVALENCE_REL_TOL: f64 = 1e-8;
const EQUIVALENCE_TIME_LIMIT_SECS: u64 = 30;

/// Criterion 2: plain-GD median distance to the minimum-norm solution.
const GD_MIN_NORM_TOL: f64 = 1e-6;

/// Criterion 3: accuracy and separation targets on the main grid.
const VARIANT_MIN_ACCURACY_PCT: f64 = 95.0;
const GD_ACCURACY_TOLERANCE_PCT: f64 = 10.0;
const GD_REFERENCE_ACCURACY_PCT: [f64; 9] = [63.0, 53.0, 58.0, 77.0, 80.0, 91.0, 85.0, 83.0, 100.0];
const VARIANT_DISTANCE_FACTOR: f64 = 100.0;

/// Criterion 4: band for unit-normalized variant distances.
const NORMALIZED_BAND: (f64, f64) = (0.55, 1.05);

/// Criterion 5: angular agreement with the analytic fixed point.
const FIXED_POINT_ANGULAR_TOL: f64 = 1e-6;
const FIXED_POINT_MAX_N: usize = 20;

/// Criterion 6: shared ridge limit.
const RIDGE_LAMBDAS: [f64; 2] = [0.1, 1.0];
const RIDGE_REL_TOL: f64 = 1e-6;
const RIDGE_PAIRWISE_TOL: f64 = 1e-6;

/// Criterion 7: training-fit bound relative to ‖y‖.
const RESIDUAL_FRACTION: f64 = 1e-4;

/// Default iteration budget ("default K") shared by the presets.
const DEFAULT_ITERS: usize = 10_000;

static TABLE1: LazyLock<ExperimentReport> =
    LazyLock::new(|| run_experiment(&presets::table1()).expect("main grid run"));

fn report_line(criterion: &str, failures: &[String]) {
    let status = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {status}");
}

fn finish(criterion: &str, failures: Vec<String>) {
    report_line(criterion, &failures);
    assert!(
        failures.is_empty(),
        "criterion {criterion} failed:\n{}",
        failures.join("\n")
    );
}

fn rows_for<'r>(report: &'r ExperimentReport, optimizer: &str) -> Vec<&'r ReportRow> {
    report
        .rows
        .iter()
        .filter(|r| r.optimizer == optimizer)
        .collect()
}

fn rel_dist(a: &Vector, b: &Vector) -> f64 {
    let mut diff = a.clone();
    diff.axpy(-1.0, b);
    diff.norm() / b.norm().max(1e-300)
}

fn random_instance(n: usize, d: usize, seed: u64) -> (Matrix, Vector) {
    use rand::Rng;
    let mut rng = stream(seed);
    let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .expect("finite entries");
    let y = Vector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).expect("finite");
    (x, y)
}

/// Elementwise closed expression for the first momentum step from the
/// origin: with no history, the bias-corrected averages collapse to the
/// raw gradient, so w₁ = η·b/(|b|+ε) where b = Xᵀy.
fn momentum_first_step(x: &Matrix, y: &Vector, eta: f64, eps: f64) -> Vector {
    let b = x.matvec_transpose(y).expect("dims agree");
    Vector::new(
        b.as_slice()
            .iter()
            .map(|&bj| eta * bj / (bj.abs() + eps))
            .collect(),
    )
    .expect("finite")
}

#[test]
fn criterion_1_closed_form_equivalence() {
    let start = Instant::now();
    let mut failures = Vec::new();
    let kinds = [
        OptimizerKind::Gd,
        OptimizerKind::AdaGrad,
        OptimizerKind::AdaGradVariant,
        OptimizerKind::RmsProp,
        OptimizerKind::Adam,
        OptimizerKind::ConstantD,
    ];
    use rand::Rng;
    let mut shape_rng = stream(2024);
    for i in 0..EQUIVALENCE_INSTANCES {
        let over = i % 2 == 0;
        let (n, d) = loop {
            let a = shape_rng.gen_range(2..=EQUIVALENCE_MAX_SIDE);
            let b = shape_rng.gen_range(2..=EQUIVALENCE_MAX_SIDE);
            if a != b {
                break if over { (a.min(b), a.max(b)) } else { (a.max(b), a.min(b)) };
            }
        };
        let k = shape_rng.gen_range(1..=EQUIVALENCE_MAX_ITERS);
        // Redraw until the relevant Gram factors; the unrolled forms all
        // invert it, so a near-singular draw only tests the solver's
        // rejection path.
        let (x, y) = (0..20)
            .map(|attempt| random_instance(n, d, derive_seed(7, &[i as u64, attempt])))
            .find(|(x, _)| {
                let gram = if over { x.gram_outer() } else { x.gram() };
                let probe = Vector::new(vec![1.0; gram.rows()]).expect("ones");
                overparam_core::linalg::solve_spd(&gram, &probe).is_ok()
            })
            .expect("a well-conditioned draw within twenty attempts");
        let ds = Dataset::new(x.clone(), y.clone(), 1.0, GeneratorTag::Custom, 0)
            .expect("valid dataset");
        let obj = Objective::plain(ds);
        let Ok(base_eta) = optimizers::default_step_size(&obj) else {
            continue;
        };
        for kind in kinds {
            // Momentum mixes past gradients, so no diagonal product form
            // matches a long horizon; its first step from the origin has
            // an elementwise closed expression and is checked directly.
            if kind == OptimizerKind::Adam {
                let spec = OptimizerSpec::new(kind, 1).with_eta(0.7 * base_eta);
                match optimizers::run_final(&obj, &spec) {
                    Ok(w) => {
                        let expected =
                            momentum_first_step(&x, &y, 0.7 * base_eta, spec.epsilon_value());
                        let err = rel_dist(&expected, &w);
                        if err > EQUIVALENCE_REL_TOL {
                            failures.push(format!(
                                "instance {i} Adam first step: rel err {err:.3e}"
                            ));
                        }
                    }
                    Err(e) => failures.push(format!("instance {i} Adam: run failed: {e}")),
                }
                continue;
            }
            // The unrolled identities are exact in any regime, but the
            // 1e-8 comparison needs the contraction hypothesis the
            // statements assume; the stabilizer bounds every diagonal and
            // the step size keeps η·‖A‖·max(D) at 0.7.
            let (eps_override, diag_bound) = match kind {
                OptimizerKind::AdaGrad | OptimizerKind::RmsProp => (Some(0.25), 2.0),
                OptimizerKind::AdaGradVariant => (Some(0.7), 1.0 / (0.7 * 0.7)),
                _ => (None, 1.0),
            };
            let mut spec = OptimizerSpec::new(kind, k).with_eta(0.7 * base_eta / diag_bound);
            spec.epsilon = eps_override;
            if kind == OptimizerKind::ConstantD {
                let diag: Vec<f64> = (0..d).map(|_| shape_rng.gen_range(0.2..1.5)).collect();
                let top = diag.iter().cloned().fold(f64::MIN, f64::max);
                spec = spec.with_eta(0.7 * base_eta / top);
                spec.diagonal = Some(diag);
            }
            let traj = match optimizers::run(&obj, &spec) {
                Ok(t) => t,
                Err(e) => {
                    failures.push(format!("instance {i} {kind} (n={n},d={d},K={k}): run failed: {e}"));
                    continue;
                }
            };
            let w = traj.final_iterate();
            let eta = spec.eta.expect("set above");
            let d_seq = traj.preconditioners.clone();
            let outcome = match (kind, over) {
                (OptimizerKind::Gd, false) => closed_form::closed_form_gd_under(&x, &y, eta, k)
                    .map(|closed| rel_dist(&closed, w)),
                (OptimizerKind::Gd, true) => closed_form::closed_form_gd_over(&x, &y, eta, k)
                    .map(|closed| rel_dist(&closed, w)),
                (_, false) => {
                    let seq = d_seq.as_ref().expect("diagonal family records");
                    closed_form::closed_form_precond_under(&x, &y, eta, seq, k)
                        .map(|closed| rel_dist(&closed, w))
                }
                (_, true) => {
                    let seq = d_seq.as_ref().expect("diagonal family records");
                    closed_form::closed_form_prediction_over(&x, &y, eta, seq, k).map(|closed| {
                        let pred = x.matvec(w).expect("dims agree");
                        rel_dist(&closed, &pred)
                    })
                }
            };
            match outcome {
                Ok(err) if err <= EQUIVALENCE_REL_TOL => {}
                Ok(err) => failures.push(format!(
                    "instance {i} {kind} (n={n},d={d},K={k}): rel err {err:.3e}"
                )),
                Err(e) => failures.push(format!(
                    "instance {i} {kind} (n={n},d={d},K={k}): closed form failed: {e}"
                )),
            }
            // Regularized under-parameterized runs have an unrolled form
            // of the same shape; replay those too.
            if !over && kind != OptimizerKind::Adam && kind != OptimizerKind::ConstantD {
                let lambda = 0.3;
                let robj = Objective::new(
                    Dataset::new(x.clone(), y.clone(), 1.0, GeneratorTag::Custom, 0)
                        .expect("valid dataset"),
                    lambda,
                )
                .expect("valid lambda");
                let Ok(rbase) = optimizers::default_step_size(&robj) else {
                    failures.push(format!("instance {i} {kind} ridge: no step size"));
                    continue;
                };
                let mut rspec = spec.clone();
                let reta = 0.7 * rbase / diag_bound;
                rspec.eta = Some(reta);
                match optimizers::run(&robj, &rspec) {
                    Ok(rtraj) => {
                        let seq = match kind {
                            OptimizerKind::Gd => {
                                vec![Vector::new(vec![1.0; d]).expect("ones"); k]
                            }
                            _ => rtraj.preconditioners.clone().expect("records"),
                        };
                        match closed_form::closed_form_ridge(&x, &y, reta, &seq, k, lambda) {
                            Ok(closed) => {
                                let err = rel_dist(&closed, rtraj.final_iterate());
                                if err > EQUIVALENCE_REL_TOL {
                                    failures.push(format!(
                                        "instance {i} {kind} ridge: rel err {err:.3e}"
                                    ));
                                }
                            }
                            Err(e) => failures
                                .push(format!("instance {i} {kind} ridge closed form: {e}")),
                        }
                    }
                    Err(e) => failures.push(format!("instance {i} {kind} ridge run: {e}")),
                }
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed.as_secs() >= EQUIVALENCE_TIME_LIMIT_SECS {
        failures.push(format!("runtime {elapsed:?} exceeds {EQUIVALENCE_TIME_LIMIT_SECS}s"));
    }
    finish("1 (closed-form equivalence)", failures);
}

#[test]
fn criterion_2_gd_reaches_minimum_norm() {
    let mut failures = Vec::new();
    let gd = rows_for(&TABLE1, "GD");
    assert_eq!(gd.len(), 9, "expected nine grid cells");
    for row in gd {
        if !(row.median_dist_mn <= GD_MIN_NORM_TOL) {
            failures.push(format!(
                "n={} level={}: GD median distance {:.3e} > {GD_MIN_NORM_TOL:.0e}",
                row.n, row.level, row.median_dist_mn
            ));
        }
    }
    finish("2 (plain GD lands on the minimum-norm solution)", failures);
}

#[test]
fn criterion_3_variant_generalizes_away_from_minimum_norm() {
    let mut failures = Vec::new();
    let gd = rows_for(&TABLE1, "GD");
    let variant = rows_for(&TABLE1, "AdaGradVariant");
    assert_eq!(gd.len(), 9);
    assert_eq!(variant.len(), 9);
    for (i, (g, v)) in gd.iter().zip(&variant).enumerate() {
        if !(v.accuracy_pct >= VARIANT_MIN_ACCURACY_PCT) {
            failures.push(format!(
                "n={} level={}: variant accuracy {:.2}% < {VARIANT_MIN_ACCURACY_PCT}%",
                v.n, v.level, v.accuracy_pct
            ));
        }
        let want = GD_REFERENCE_ACCURACY_PCT[i];
        if !((g.accuracy_pct - want).abs() <= GD_ACCURACY_TOLERANCE_PCT) {
            failures.push(format!(
                "n={} level={}: GD accuracy {:.2}% not within ±{GD_ACCURACY_TOLERANCE_PCT} of {want}",
                g.n, g.level, g.accuracy_pct
            ));
        }
        if !(v.median_dist_mn >= VARIANT_DISTANCE_FACTOR * g.median_dist_mn) {
            failures.push(format!(
                "n={} level={}: variant distance {:.3e} < {VARIANT_DISTANCE_FACTOR}× GD distance {:.3e}",
                v.n, v.level, v.median_dist_mn, g.median_dist_mn
            ));
        }
    }
    finish("3 (variant accuracy, reference GD accuracy, distance separation)", failures);
}

#[test]
fn criterion_4_normalized_variant_distances_in_band() {
    let mut failures = Vec::new();
    for row in rows_for(&TABLE1, "AdaGradVariant") {
        let nd = row.median_dist_mn_normalized;
        if !(nd >= NORMALIZED_BAND.0 && nd <= NORMALIZED_BAND.1) {
            failures.push(format!(
                "n={} level={}: normalized distance {:.4} outside [{}, {}]",
                row.n, row.level, nd, NORMALIZED_BAND.0, NORMALIZED_BAND.1
            ));
        }
    }
    finish("4 (normalized variant distances inside the band)", failures);
}

#[test]
fn criterion_5_fixed_point_direction_and_inapplicability() {
    let mut failures = Vec::new();
    use rand::Rng;
    for (case, n) in [2usize, 7, 13, FIXED_POINT_MAX_N].into_iter().enumerate() {
        let mut rng = stream(derive_seed(55, &[case as u64]));
        let labels: Vec<f64> = (0..n)
            .map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 })
            .collect();
        let x = Matrix::identity(n);
        let y = Vector::new(labels).expect("finite");
        let direction = match solutions::adagrad_variant_fixed_point(&x, &y) {
            Ok(FixedPoint::Applicable { solution, .. }) => solution.w,
            Ok(FixedPoint::NotApplicable { deviation }) => {
                failures.push(format!("n={n}: unexpectedly inapplicable ({deviation:.3e})"));
                continue;
            }
            Err(e) => {
                failures.push(format!("n={n}: fixed point failed: {e}"));
                continue;
            }
        };
        let obj = Objective::plain(
            Dataset::new(x, y, 1.0, GeneratorTag::Custom, 0).expect("valid dataset"),
        );
        let spec = OptimizerSpec::new(OptimizerKind::AdaGradVariant, 300);
        let traj = optimizers::run(&obj, &spec).expect("variant run");
        for (k, w) in traj.iterates.iter().enumerate().skip(1) {
            let unit = w.normalized().expect("nonzero iterate");
            let mut diff = unit.clone();
            diff.axpy(-1.0, &direction);
            let mut sum = unit;
            sum.axpy(1.0, &direction);
            let angular = diff.norm().min(sum.norm());
            if !(angular <= FIXED_POINT_ANGULAR_TOL) {
                failures.push(format!(
                    "n={n} iterate {k}: angular distance {angular:.3e} > {FIXED_POINT_ANGULAR_TOL:.0e}"
                ));
                break;
            }
        }
    }
    // A constructed instance whose gradient magnitudes differ must be
    // flagged as outside the fixed-point hypothesis.
    let x = Matrix::identity(2);
    let y = Vector::new(vec![1.0, 2.0]).expect("finite");
    match solutions::adagrad_variant_fixed_point(&x, &y) {
        Ok(FixedPoint::NotApplicable { .. }) => {}
        other => failures.push(format!("unequal-magnitude instance: expected NotApplicable, got {other:?}")),
    }
    finish("5 (analytic fixed point holds; inapplicability detected)", failures);
}

#[test]
fn criterion_6_ridge_limit_shared_by_all_kinds() {
    let mut failures = Vec::new();
    let kinds = [
        OptimizerKind::Gd,
        OptimizerKind::AdaGrad,
        OptimizerKind::AdaGradVariant,
        OptimizerKind::RmsProp,
        OptimizerKind::Adam,
    ];
    for (case, &lambda) in RIDGE_LAMBDAS.iter().enumerate() {
        let (x, y) = random_instance(5, 12, derive_seed(66, &[case as u64]));
        let target = solutions::ridge_solution(&x, &y, lambda).expect("ridge solution");
        let obj = Objective::new(
            Dataset::new(x, y, 1.0, GeneratorTag::Custom, 0).expect("valid dataset"),
            lambda,
        )
        .expect("valid lambda");
        let mut finals = Vec::new();
        for kind in kinds {
            let spec = OptimizerSpec::new(kind, DEFAULT_ITERS);
            match optimizers::run_final(&obj, &spec) {
                Ok(w) => {
                    let err = rel_dist(&w, &target.w);
                    if !(err <= RIDGE_REL_TOL) {
                        failures.push(format!(
                            "λ={lambda} {kind}: rel distance to ridge solution {err:.3e} > {RIDGE_REL_TOL:.0e}"
                        ));
                    }
                    finals.push((kind, w));
                }
                Err(e) => failures.push(format!("λ={lambda} {kind}: run failed: {e}")),
            }
        }
        for a in 0..finals.len() {
            for b in a + 1..finals.len() {
                let mut diff = finals[a].1.clone();
                diff.axpy(-1.0, &finals[b].1);
                let dist = diff.norm();
                if !(dist <= RIDGE_PAIRWISE_TOL) {
                    failures.push(format!(
                        "λ={lambda} {} vs {}: pairwise distance {dist:.3e} > {RIDGE_PAIRWISE_TOL:.0e}",
                        finals[a].0, finals[b].0
                    ));
                }
            }
        }
    }
    finish("6 (every kind converges to the ridge solution)", failures);
}

#[test]
fn criterion_7_every_optimizer_fits_the_training_data() {
    let mut failures = Vec::new();
    for row in &TABLE1.rows {
        // Labels are ±level exactly, so ‖y‖ = level·√n for every draw.
        let y_norm = row.level * (row.n as f64).sqrt();
        let bound = RESIDUAL_FRACTION * y_norm;
        if !(row.median_train_residual <= bound) {
            failures.push(format!(
                "n={} level={} {}: median residual {:.3e} > {:.3e}",
                row.n, row.level, row.optimizer, row.median_train_residual, bound
            ));
        }
    }
    finish("7 (training residual within 1e-4 of the label norm)", failures);
}

#[test]
fn criterion_8_deep_network_results_out_of_scope() {
    // The neural-network measurements require GPU-scale training and are
    // excluded by design; nothing here references them.
    finish("8 (deep-network experiments excluded by design)", Vec::new());
}

#[test]
fn criterion_9_preset_runs_are_byte_identical() {
    let mut failures = Vec::new();
    let dir = tempfile::tempdir().expect("tempdir");
    let out_a = dir.path().join("a.csv");
    let out_b = dir.path().join("b.csv");
    let exe = env!("CARGO_BIN_EXE_overparam");
    for out in [&out_a, &out_b] {
        let status = Command::new(exe)
            .args(["table", "--preset", "table1", "--out"])
            .arg(out)
            .status()
            .expect("spawn table run");
        if !status.success() {
            failures.push(format!("table invocation failed with {status}"));
        }
    }
    let a = std::fs::read(&out_a).expect("first CSV");
    let b = std::fs::read(&out_b).expect("second CSV");
    if a != b {
        failures.push("two identically-seeded preset invocations differ".into());
    }
    // The binary's CSV must also match the in-process run byte for byte.
    let in_process = TABLE1.to_csv_string();
    if a != in_process.as_bytes() {
        failures.push("binary CSV differs from the library run".into());
    }
    finish("9 (identically-seeded preset runs produce identical bytes)", failures);
}

#[test]
fn acceptance_preconditions_dataset_seeding_is_stable() {
    // The grid criteria above compare against fixed reference numbers;
    // this pins the dataset stream those numbers depend on.
    let spec = GeneratorSpec::new(GeneratorTag::WilsonV1, 10, 0.875, 0.125, 31);
    let ds = counterexamples::generate(&spec).expect("generate");
    let again = counterexamples::generate(&spec).expect("generate");
    assert_eq!(ds.to_json().unwrap(), again.to_json().unwrap());
}
