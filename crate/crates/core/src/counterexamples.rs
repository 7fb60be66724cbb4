//! Structured sparse classification datasets where plain and adaptive
//! gradient methods pick provably different interpolators, plus the two
//! decision rules used to score a trained model on fresh draws.
//!
//! Both layouts share the idea: column 0 carries the label (the only
//! informative feature), a small block of columns is 1 on every row, and
//! each row gets its own private columns that no other row (and no test
//! example) touches. Because training starts at zero and gradients are
//! supported on the training columns, a trained model is exactly zero on
//! any fresh example's private columns, so test scores reduce to the shared
//! coordinates.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::models::{Dataset, GeneratorTag};
use crate::rng;

/// Configuration for one generated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub version: GeneratorTag,
    pub n: usize,
    /// Probability of the `+level` class.
    pub p: f64,
    /// Label magnitude ℓ.
    pub level: f64,
    /// Optional dimension override; must cover the private columns.
    #[serde(default)]
    pub d: Option<usize>,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(version: GeneratorTag, n: usize, p: f64, level: f64, seed: u64) -> Self {
        Self {
            version,
            n,
            p,
            level,
            d: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version == GeneratorTag::Custom {
            return Err(Error::InvalidSpec(
                "custom datasets have no generator; use WilsonV1 or NewCE".into(),
            ));
        }
        if self.n == 0 {
            return Err(Error::InvalidSpec("need at least one sample".into()));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "class probability must lie strictly between 0 and 1, got {}",
                self.p
            )));
        }
        if !(self.level > 0.0) || !self.level.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "level must be positive and finite, got {}",
                self.level
            )));
        }
        if let Some(d) = self.d {
            if d < self.min_dimension() {
                return Err(Error::InvalidSpec(format!(
                    "dimension override {d} is smaller than the {} columns the layout uses",
                    self.min_dimension()
                )));
            }
        }
        Ok(())
    }

    /// Columns the layout actually addresses (shared block plus the last
    /// row's private block).
    pub fn min_dimension(&self) -> usize {
        match self.version {
            GeneratorTag::WilsonV1 => 5 * self.n + 3,
            GeneratorTag::NewCe => 5 * self.n + 2,
            GeneratorTag::Custom => 0,
        }
    }

    /// Actual dimension: the override if given, else `max(6n, minimum)`.
    pub fn dimension(&self) -> usize {
        self.d.unwrap_or_else(|| (6 * self.n).max(self.min_dimension()))
    }

    /// Columns where a fresh example overlaps any trained model's support:
    /// the label column plus the always-one block.
    pub fn common_columns(&self) -> &'static [usize] {
        match self.version {
            GeneratorTag::WilsonV1 => &[0, 1, 2],
            GeneratorTag::NewCe => &[0, 1, 2, 3, 5],
            GeneratorTag::Custom => &[],
        }
    }

    fn draw_label(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.gen::<f64>() < self.p {
            self.level
        } else {
            -self.level
        }
    }
}

/// A fresh example reduced to its label and the coordinates it shares with
/// the trained support.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledExample {
    pub label: f64,
    pub overlap: Vec<f64>,
}

impl LabeledExample {
    fn draw(spec: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Self {
        let label = spec.draw_label(rng);
        let mut overlap = vec![1.0; spec.common_columns().len()];
        overlap[0] = label;
        Self { label, overlap }
    }
}

/// Builds the design matrix and labels for the configured layout.
pub fn generate(spec: &GeneratorSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n;
    let d = spec.dimension();
    let mut rng = rng::stream(spec.seed);
    let labels: Vec<f64> = (0..n).map(|_| spec.draw_label(&mut rng)).collect();

    let mut x = Matrix::zeros(n, d);
    for (i, &label) in labels.iter().enumerate() {
        x.set(i, 0, label);
        let positive = label > 0.0;
        match spec.version {
            GeneratorTag::WilsonV1 => {
                x.set(i, 1, 1.0);
                x.set(i, 2, 1.0);
                let base = 3 + 5 * i;
                if positive {
                    x.set(i, base, 1.0);
                } else {
                    for c in base..base + 5 {
                        x.set(i, c, 1.0);
                    }
                }
            }
            GeneratorTag::NewCe => {
                for c in [1, 2, 3, 5] {
                    x.set(i, c, 1.0);
                }
                let private = if positive { 4 + 5 * i } else { 6 + 5 * i };
                x.set(i, private, 1.0);
            }
            GeneratorTag::Custom => unreachable!("validated"),
        }
    }
    Dataset::new(
        x,
        Vector::new(labels)?,
        spec.level,
        spec.version,
        spec.seed,
    )
}

/// Nearest point of `{+level, −level}` to `alpha`, settling the exact tie
/// at zero toward `+level`.
pub fn quantize(alpha: f64, level: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::NonFinite {
            context: "quantize score",
        });
    }
    if !(level > 0.0) || !level.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "level must be positive and finite, got {level}"
        )));
    }
    Ok(if alpha < 0.0 { -level } else { level })
}

/// How a score becomes a predicted label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecisionRule {
    /// Nearest of {±ℓ} to the score.
    Quant,
    /// Sign of the score mapped onto {±ℓ}.
    Sign,
}

impl DecisionRule {
    pub fn predict(self, score: f64, level: f64) -> Result<f64> {
        match self {
            DecisionRule::Quant => quantize(score, level),
            DecisionRule::Sign => {
                if !score.is_finite() {
                    return Err(Error::NonFinite {
                        context: "sign-rule score",
                    });
                }
                Ok(if score < 0.0 { -level } else { level })
            }
        }
    }
}

/// Percent of `q` fresh draws the model labels correctly.
///
/// Fresh examples only meet the trained support on the shared columns, so
/// the score is the overlap inner product; the private columns of unseen
/// examples contribute exactly zero for any model trained from the origin
/// on this layout.
pub fn evaluate_accuracy(
    w: &Vector,
    spec: &GeneratorSpec,
    q: usize,
    rule: DecisionRule,
    seed: u64,
) -> Result<f64> {
    spec.validate()?;
    if q == 0 {
        return Err(Error::InvalidSpec(
            "need at least one test example".into(),
        ));
    }
    if w.dim() != spec.dimension() {
        return Err(Error::LengthMismatch {
            op: "evaluate_accuracy",
            expected: spec.dimension(),
            got: w.dim(),
        });
    }
    let cols = spec.common_columns();
    let ws = w.as_slice();
    let mut rng = rng::stream(seed);
    let mut correct = 0usize;
    for _ in 0..q {
        let example = LabeledExample::draw(spec, &mut rng);
        let score: f64 = cols
            .iter()
            .zip(&example.overlap)
            .map(|(&c, &v)| ws[c] * v)
            .sum();
        if rule.predict(score, spec.level)? == example.label {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / q as f64)
}
