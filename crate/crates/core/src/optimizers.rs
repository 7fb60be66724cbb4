//! Full-batch iterative optimizers: plain gradient descent and the
//! preconditioned family `w_{k+1} = w_k − η D_k ∇f(w_k)` with AdaGrad,
//! AdaGrad-variant, RMSProp, Adam, and constant-diagonal preconditioners.
//!
//! All methods start from `w₀ = 0` and run a fixed iteration budget, so two
//! runs with the same inputs produce bitwise-identical trajectories.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{top_eigenvalue, Vector};
use crate::models::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Gd,
    AdaGrad,
    AdaGradVariant,
    RmsProp,
    Adam,
    ConstantD,
}

impl OptimizerKind {
    /// Kinds whose update is an explicit positive diagonal times the
    /// gradient. Adam is excluded: its momentum term mixes past gradients.
    pub fn records_preconditioner(self) -> bool {
        matches!(
            self,
            OptimizerKind::AdaGrad
                | OptimizerKind::AdaGradVariant
                | OptimizerKind::RmsProp
                | OptimizerKind::ConstantD
        )
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OptimizerKind::Gd => "GD",
            OptimizerKind::AdaGrad => "AdaGrad",
            OptimizerKind::AdaGradVariant => "AdaGradVariant",
            OptimizerKind::RmsProp => "RMSProp",
            OptimizerKind::Adam => "Adam",
            OptimizerKind::ConstantD => "ConstantD",
        };
        f.write_str(name)
    }
}

fn default_window() -> usize {
    10
}

fn default_beta1() -> f64 {
    0.9
}

fn default_beta2() -> f64 {
    0.999
}

fn default_rho() -> f64 {
    0.9
}

/// Hyperparameters for one optimizer run.
///
/// `eta = None` means "use [`default_step_size`] of the objective", which is
/// how the experiment harness runs: the step size depends on each sampled
/// dataset. `epsilon = None` picks the per-kind default (`1e-8`, or `1e-7`
/// for the variant whose squared denominator amplifies small sums).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerSpec {
    pub kind: OptimizerKind,
    #[serde(default)]
    pub eta: Option<f64>,
    pub iterations: usize,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default = "default_beta1")]
    pub beta1: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default)]
    pub diagonal: Option<Vec<f64>>,
    #[serde(default)]
    pub normalize_output: bool,
}

impl OptimizerSpec {
    pub fn new(kind: OptimizerKind, iterations: usize) -> Self {
        Self {
            kind,
            eta: None,
            iterations,
            window: default_window(),
            epsilon: None,
            beta1: default_beta1(),
            beta2: default_beta2(),
            rho: default_rho(),
            diagonal: None,
            normalize_output: false,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = Some(eta);
        self
    }

    pub fn epsilon_value(&self) -> f64 {
        self.epsilon.unwrap_or(match self.kind {
            OptimizerKind::AdaGradVariant => 1e-7,
            _ => 1e-8,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(eta) = self.eta {
            if !(eta > 0.0) || !eta.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "step size must be positive and finite, got {eta}"
                )));
            }
        }
        let eps = self.epsilon_value();
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "epsilon must be positive and finite, got {eps}"
            )));
        }
        if matches!(
            self.kind,
            OptimizerKind::AdaGrad | OptimizerKind::AdaGradVariant
        ) && self.window == 0
        {
            return Err(Error::InvalidSpec(
                "window length must be at least 1".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidSpec(format!(
                "beta1/beta2 must lie in [0, 1), got {}/{}",
                self.beta1, self.beta2
            )));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::InvalidSpec(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        match (&self.diagonal, self.kind) {
            (Some(d), OptimizerKind::ConstantD) => {
                if d.is_empty() || !d.iter().all(|x| x.is_finite() && *x > 0.0) {
                    return Err(Error::InvalidSpec(
                        "constant preconditioner entries must be positive and finite".into(),
                    ));
                }
            }
            (None, OptimizerKind::ConstantD) => {
                return Err(Error::InvalidSpec(
                    "ConstantD requires a diagonal".into(),
                ));
            }
            (Some(_), _) => {
                return Err(Error::InvalidSpec(
                    "a diagonal is only meaningful for ConstantD".into(),
                ));
            }
            (None, _) => {}
        }
        Ok(())
    }
}

/// Everything recorded along one optimizer run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `w₀ … w_K`, starting at zero.
    pub iterates: Vec<Vector>,
    /// Loss at each iterate.
    pub losses: Vec<f64>,
    /// Gradient norm at each iterate.
    pub grad_norms: Vec<f64>,
    /// `D₀ … D_{K−1}` for the explicit-diagonal kinds, `None` for GD and
    /// Adam.
    pub preconditioners: Option<Vec<Vector>>,
}

impl Trajectory {
    pub fn final_iterate(&self) -> &Vector {
        self.iterates.last().expect("trajectory never empty")
    }

    /// CSV with one row per iterate: `iteration,loss,grad_norm`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "iteration,loss,grad_norm")?;
        for (k, (loss, gnorm)) in self.losses.iter().zip(&self.grad_norms).enumerate() {
            writeln!(out, "{k},{loss:.16e},{gnorm:.16e}")?;
        }
        Ok(())
    }
}

/// `1 / λ₁(XᵀX + λI)`, a step size just inside the stable range. The top
/// eigenvalue is found on the smaller Gram matrix (the nonzero spectrum
/// is shared).
pub fn default_step_size(obj: &Objective) -> Result<f64> {
    let ds = &obj.dataset;
    let gram = if ds.n() <= ds.d() {
        ds.x.gram_outer()
    } else {
        ds.x.gram()
    };
    let lambda1 = top_eigenvalue(&gram, 1e-8, 100_000)?;
    Ok(1.0 / (lambda1 + obj.lambda))
}

/// Observer over the stepping loop. `run` records everything, `run_final`
/// records nothing; both share the exact same arithmetic.
trait StepObserver {
    /// Whether losses need computing at all; constant per impl, so the
    /// branch folds away after monomorphization.
    const WANTS_STATE: bool;
    fn on_state(&mut self, _w: &Vector, _loss: f64, _grad_norm: f64) {}
    fn on_preconditioner(&mut self, _d: &[f64]) {}
}

struct FullRecorder {
    iterates: Vec<Vector>,
    losses: Vec<f64>,
    grad_norms: Vec<f64>,
    preconditioners: Option<Vec<Vector>>,
}

impl StepObserver for FullRecorder {
    const WANTS_STATE: bool = true;

    fn on_state(&mut self, w: &Vector, loss: f64, grad_norm: f64) {
        self.iterates.push(w.clone());
        self.losses.push(loss);
        self.grad_norms.push(grad_norm);
    }

    fn on_preconditioner(&mut self, d: &[f64]) {
        if let Some(ds) = &mut self.preconditioners {
            ds.push(Vector::new_unchecked(d.to_vec()));
        }
    }
}

struct NullObserver;

impl StepObserver for NullObserver {
    const WANTS_STATE: bool = false;
}

/// Stepping state. The gradient is identically zero outside the design's
/// column support (runs start at the origin), so the adaptive accumulators
/// live on the support only; the recorded diagonals still cover every
/// coordinate, with the off-support entries prefilled to the value a zero
/// gradient history produces. The numbers are bitwise what the full-width
/// loops would compute.
struct Engine<'a> {
    spec: &'a OptimizerSpec,
    eta: f64,
    eps: f64,
    w: Vector,
    grad: Vector,
    support: Vec<usize>,
    /// Ring buffer of the last `window + 1` squared gradients (support
    /// coordinates only).
    window: Vec<Vec<f64>>,
    window_next: usize,
    sum_sq: Vec<f64>,
    second_moment: Vec<f64>,
    first_moment: Vec<f64>,
    diag: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(obj: &'a Objective, spec: &'a OptimizerSpec, eta: f64) -> Self {
        let d = obj.dataset.d();
        let eps = spec.epsilon_value();
        let support = obj.support();
        let idle = match spec.kind {
            OptimizerKind::AdaGrad | OptimizerKind::RmsProp => 1.0 / eps.sqrt(),
            OptimizerKind::AdaGradVariant => 1.0 / (eps * eps),
            _ => 0.0,
        };
        Self {
            spec,
            eta,
            eps,
            w: Vector::zeros(d),
            grad: Vector::zeros(d),
            window: Vec::new(),
            window_next: 0,
            sum_sq: vec![0.0; support.len()],
            second_moment: vec![0.0; support.len()],
            first_moment: vec![0.0; support.len()],
            diag: vec![idle; d],
            support,
        }
    }

    /// Windowed sum of squared gradients over iterations
    /// `max(0, k−J) … k`, current gradient included.
    fn push_window(&mut self) {
        let capacity = self.spec.window + 1;
        let g = self.grad.as_slice();
        if self.window.len() < capacity {
            self.window
                .push(self.support.iter().map(|&j| g[j] * g[j]).collect());
        } else {
            for (slot, &j) in self.window[self.window_next].iter_mut().zip(&self.support) {
                *slot = g[j] * g[j];
            }
            self.window_next = (self.window_next + 1) % capacity;
        }
        self.sum_sq.iter_mut().for_each(|s| *s = 0.0);
        for past in &self.window {
            for (s, &v) in self.sum_sq.iter_mut().zip(past) {
                *s += v;
            }
        }
    }

    /// One update; returns false on a non-finite iterate.
    fn step(&mut self, k: usize) -> bool {
        match self.spec.kind {
            OptimizerKind::Gd => {
                self.w.axpy(-self.eta, &self.grad);
            }
            OptimizerKind::AdaGrad => {
                self.push_window();
                for (si, &s) in self.sum_sq.iter().enumerate() {
                    self.diag[self.support[si]] = 1.0 / (s + self.eps).sqrt();
                }
                self.apply_diag();
            }
            OptimizerKind::AdaGradVariant => {
                self.push_window();
                for (si, &s) in self.sum_sq.iter().enumerate() {
                    let base = s + self.eps;
                    self.diag[self.support[si]] = 1.0 / (base * base);
                }
                self.apply_diag();
            }
            OptimizerKind::RmsProp => {
                let rho = self.spec.rho;
                let g = self.grad.as_slice();
                for (si, v) in self.second_moment.iter_mut().enumerate() {
                    let gj = g[self.support[si]];
                    *v = rho * *v + (1.0 - rho) * gj * gj;
                    self.diag[self.support[si]] = 1.0 / (*v + self.eps).sqrt();
                }
                self.apply_diag();
            }
            OptimizerKind::Adam => {
                let (b1, b2) = (self.spec.beta1, self.spec.beta2);
                let t = (k + 1) as i32;
                let c1 = 1.0 - b1.powi(t);
                let c2 = 1.0 - b2.powi(t);
                let w = self.w.as_mut_slice();
                let g = self.grad.as_slice();
                for (si, &j) in self.support.iter().enumerate() {
                    let gj = g[j];
                    let m = &mut self.first_moment[si];
                    let v = &mut self.second_moment[si];
                    *m = b1 * *m + (1.0 - b1) * gj;
                    *v = b2 * *v + (1.0 - b2) * gj * gj;
                    let m_hat = *m / c1;
                    let v_hat = *v / c2;
                    w[j] -= self.eta * m_hat / (v_hat.sqrt() + self.eps);
                }
            }
            OptimizerKind::ConstantD => {
                let d = self.spec.diagonal.as_ref().expect("validated");
                for ((w, &di), &g) in self
                    .w
                    .as_mut_slice()
                    .iter_mut()
                    .zip(d)
                    .zip(self.grad.as_slice())
                {
                    *w -= self.eta * di * g;
                }
            }
        }
        self.w.is_finite()
    }

    fn apply_diag(&mut self) {
        let w = self.w.as_mut_slice();
        let g = self.grad.as_slice();
        for &j in &self.support {
            w[j] -= self.eta * self.diag[j] * g[j];
        }
    }
}

fn step_loop<O: StepObserver>(
    obj: &Objective,
    spec: &OptimizerSpec,
    obs: &mut O,
) -> Result<Vector> {
    spec.validate()?;
    if let Some(d) = &spec.diagonal {
        if d.len() != obj.dataset.d() {
            return Err(Error::LengthMismatch {
                op: "constant preconditioner",
                expected: obj.dataset.d(),
                got: d.len(),
            });
        }
    }
    let eta = match spec.eta {
        Some(v) => v,
        None => default_step_size(obj)?,
    };
    let mut engine = Engine::new(obj, spec, eta);
    for k in 0..spec.iterations {
        engine.grad = obj.gradient(&engine.w)?;
        if O::WANTS_STATE {
            obs.on_state(&engine.w, obj.loss(&engine.w)?, engine.grad.norm());
        }
        let norm_before = engine.w.scaled_norm();
        if !engine.step(k) {
            return Err(Error::Diverged {
                iteration: k + 1,
                norm: norm_before,
            });
        }
        if spec.kind.records_preconditioner() {
            if spec.kind == OptimizerKind::ConstantD {
                obs.on_preconditioner(spec.diagonal.as_ref().expect("validated"));
            } else {
                obs.on_preconditioner(&engine.diag);
            }
        }
    }
    if O::WANTS_STATE {
        let final_grad = obj.gradient(&engine.w)?;
        obs.on_state(&engine.w, obj.loss(&engine.w)?, final_grad.norm());
    }
    Ok(engine.w)
}

/// Runs the optimizer and records the full trajectory.
pub fn run(obj: &Objective, spec: &OptimizerSpec) -> Result<Trajectory> {
    let mut rec = FullRecorder {
        iterates: Vec::with_capacity(spec.iterations + 1),
        losses: Vec::with_capacity(spec.iterations + 1),
        grad_norms: Vec::with_capacity(spec.iterations + 1),
        preconditioners: spec
            .kind
            .records_preconditioner()
            .then(|| Vec::with_capacity(spec.iterations)),
    };
    step_loop(obj, spec, &mut rec)?;
    Ok(Trajectory {
        iterates: rec.iterates,
        losses: rec.losses,
        grad_norms: rec.grad_norms,
        preconditioners: rec.preconditioners,
    })
}

/// Runs the optimizer keeping only the final iterate. Identical arithmetic
/// to [`run`]; the experiment harness uses this to avoid storing K+1
/// iterates per trial.
pub fn run_final(obj: &Objective, spec: &OptimizerSpec) -> Result<Vector> {
    step_loop(obj, spec, &mut NullObserver)
}

/// Final model of a trajectory, optionally unit-normalized.
pub fn final_model(traj: &Trajectory, spec: &OptimizerSpec) -> Result<Vector> {
    let w = traj.final_iterate();
    if spec.normalize_output {
        w.normalized()
    } else {
        Ok(w.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::models::{Dataset, GeneratorTag};

    fn identity_instance(y: Vec<f64>) -> Objective {
        let n = y.len();
        let ds = Dataset::new(
            Matrix::identity(n),
            Vector::new(y).unwrap(),
            1.0,
            GeneratorTag::Custom,
            0,
        )
        .unwrap();
        Objective::plain(ds)
    }

    fn random_instance(n: usize, d: usize, seed: u64) -> Objective {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed);
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .unwrap();
        let y = Vector::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        Objective::plain(Dataset::new(x, y, 1.0, GeneratorTag::Custom, seed).unwrap())
    }

    #[test]
    fn one_gd_step_on_identity_reaches_labels() {
        let obj = identity_instance(vec![2.0, -1.0, 0.5]);
        let spec = OptimizerSpec::new(OptimizerKind::Gd, 1).with_eta(1.0);
        let traj = run(&obj, &spec).unwrap();
        assert_eq!(traj.final_iterate().as_slice(), obj.dataset.y.as_slice());
        assert_eq!(traj.iterates.len(), 2);
    }

    #[test]
    fn zero_iterations_stays_at_origin() {
        for kind in [
            OptimizerKind::Gd,
            OptimizerKind::AdaGrad,
            OptimizerKind::AdaGradVariant,
            OptimizerKind::RmsProp,
            OptimizerKind::Adam,
        ] {
            let obj = identity_instance(vec![1.0, 2.0]);
            let spec = OptimizerSpec::new(kind, 0).with_eta(0.5);
            let traj = run(&obj, &spec).unwrap();
            assert_eq!(traj.final_iterate().as_slice(), &[0.0, 0.0]);
            assert_eq!(traj.losses.len(), 1);
            assert_eq!(traj.grad_norms.len(), 1);
        }
    }

    #[test]
    fn default_step_size_identity_and_scaled() {
        let obj = identity_instance(vec![1.0, 1.0]);
        assert!((default_step_size(&obj).unwrap() - 1.0).abs() <= 1e-7);

        let ds = Dataset::new(
            Matrix::from_vec(1, 1, vec![2.0]).unwrap(),
            Vector::new(vec![1.0]).unwrap(),
            1.0,
            GeneratorTag::Custom,
            0,
        )
        .unwrap();
        let eta = default_step_size(&Objective::plain(ds)).unwrap();
        assert!((eta - 0.25).abs() <= 1e-7);
    }

    #[test]
    fn gd_descends_with_default_step_size() {
        let obj = random_instance(6, 4, 11);
        let spec = OptimizerSpec::new(OptimizerKind::Gd, 100);
        let traj = run(&obj, &spec).unwrap();
        for pair in traj.losses.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "loss increased: {pair:?}");
        }
    }

    #[test]
    fn constant_identity_diagonal_matches_gd_bitwise() {
        let obj = random_instance(5, 8, 3);
        let eta = default_step_size(&obj).unwrap();
        let gd = run(&obj, &OptimizerSpec::new(OptimizerKind::Gd, 60).with_eta(eta)).unwrap();
        let mut spec = OptimizerSpec::new(OptimizerKind::ConstantD, 60).with_eta(eta);
        spec.diagonal = Some(vec![1.0; 8]);
        let cd = run(&obj, &spec).unwrap();
        for (a, b) in gd.iterates.iter().zip(&cd.iterates) {
            assert_eq!(a.as_slice(), b.as_slice());
        }
    }

    #[test]
    fn run_final_equals_run_bitwise() {
        for kind in [
            OptimizerKind::Gd,
            OptimizerKind::AdaGrad,
            OptimizerKind::AdaGradVariant,
            OptimizerKind::RmsProp,
            OptimizerKind::Adam,
        ] {
            let obj = random_instance(4, 7, 19);
            let spec = OptimizerSpec::new(kind, 50);
            let traj = run(&obj, &spec).unwrap();
            let w = run_final(&obj, &spec).unwrap();
            assert_eq!(traj.final_iterate().as_slice(), w.as_slice(), "{kind}");
        }
    }

    #[test]
    fn losses_recompute_from_iterates() {
        let obj = random_instance(5, 3, 23);
        let spec = OptimizerSpec::new(OptimizerKind::AdaGrad, 40);
        let traj = run(&obj, &spec).unwrap();
        for (w, &loss) in traj.iterates.iter().zip(&traj.losses) {
            assert!((obj.loss(w).unwrap() - loss).abs() <= 1e-10 * loss.max(1.0));
        }
    }

    #[test]
    fn preconditioners_recorded_for_diagonal_family_only() {
        let obj = random_instance(4, 6, 29);
        for kind in [OptimizerKind::Gd, OptimizerKind::Adam] {
            let traj = run(&obj, &OptimizerSpec::new(kind, 5)).unwrap();
            assert!(traj.preconditioners.is_none(), "{kind}");
        }
        for kind in [
            OptimizerKind::AdaGrad,
            OptimizerKind::AdaGradVariant,
            OptimizerKind::RmsProp,
        ] {
            let traj = run(&obj, &OptimizerSpec::new(kind, 5)).unwrap();
            let ds = traj.preconditioners.expect("recorded");
            assert_eq!(ds.len(), 5);
            assert!(ds
                .iter()
                .all(|d| d.as_slice().iter().all(|&x| x > 0.0)), "{kind}");
        }
    }

    #[test]
    fn divergence_reports_iteration() {
        // A huge step size blows GD up on any nontrivial instance.
        let obj = random_instance(4, 4, 31);
        let spec = OptimizerSpec::new(OptimizerKind::Gd, 10_000).with_eta(1e12);
        match run_final(&obj, &spec) {
            Err(Error::Diverged { iteration, norm }) => {
                assert!(iteration >= 1);
                assert!(norm.is_finite());
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn normalized_final_model_is_unit_length() {
        let obj = identity_instance(vec![3.0, 4.0]);
        let mut spec = OptimizerSpec::new(OptimizerKind::Gd, 1).with_eta(1.0);
        spec.normalize_output = true;
        let traj = run(&obj, &spec).unwrap();
        let w = final_model(&traj, &spec).unwrap();
        assert!((w.as_slice()[0] - 0.6).abs() <= 1e-15);
        assert!((w.as_slice()[1] - 0.8).abs() <= 1e-15);

        spec.normalize_output = false;
        let raw = final_model(&traj, &spec).unwrap();
        assert_eq!(raw.as_slice(), traj.final_iterate().as_slice());
    }

    #[test]
    fn normalizing_a_zero_model_errors() {
        let obj = identity_instance(vec![1.0]);
        let mut spec = OptimizerSpec::new(OptimizerKind::Gd, 0).with_eta(1.0);
        spec.normalize_output = true;
        let traj = run(&obj, &spec).unwrap();
        assert!(matches!(final_model(&traj, &spec), Err(Error::ZeroNorm)));
    }

    #[test]
    fn trajectory_csv_shape() {
        let obj = identity_instance(vec![1.0, 2.0]);
        let spec = OptimizerSpec::new(OptimizerKind::Gd, 3).with_eta(0.5);
        let traj = run(&obj, &spec).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "iteration,loss,grad_norm");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].starts_with("0,"));
    }

    #[test]
    fn spec_validation_catches_bad_values() {
        let mut s = OptimizerSpec::new(OptimizerKind::AdaGrad, 10);
        s.window = 0;
        assert!(s.validate().is_err());

        let s = OptimizerSpec::new(OptimizerKind::Gd, 10).with_eta(-1.0);
        assert!(s.validate().is_err());

        let s = OptimizerSpec::new(OptimizerKind::ConstantD, 10);
        assert!(s.validate().is_err());

        let mut s = OptimizerSpec::new(OptimizerKind::Adam, 10);
        s.beta1 = 1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_round_trip_fills_defaults() {
        let text = r#"{"kind":"AdaGradVariant","iterations":100}"#;
        let spec: OptimizerSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.window, 10);
        assert_eq!(spec.epsilon_value(), 1e-7);
        assert!(spec.eta.is_none());
        assert!(!spec.normalize_output);
    }
}
