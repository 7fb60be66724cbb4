//! Problem definitions: the dataset container and the (optionally ridge
//! regularized) least-squares objective with its gradient.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Which generator produced a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorTag {
    WilsonV1,
    #[serde(rename = "NewCE")]
    NewCe,
    Custom,
}

/// A regression instance: features `X` (n×d), labels `y` (n), the class
/// level of the labels, and provenance.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vector,
    pub level: f64,
    pub generator: GeneratorTag,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct DatasetJson {
    n: usize,
    d: usize,
    level: f64,
    generator: GeneratorTag,
    seed: u64,
    #[serde(rename = "X")]
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vector, level: f64, generator: GeneratorTag, seed: u64) -> Result<Self> {
        if y.dim() != x.rows() {
            return Err(Error::LengthMismatch {
                op: "Dataset::new",
                expected: x.rows(),
                got: y.dim(),
            });
        }
        if !(level > 0.0) || !level.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "class level must be positive and finite, got {level}"
            )));
        }
        Ok(Self {
            x,
            y,
            level,
            generator,
            seed,
        })
    }

    pub fn n(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    /// More columns than rows: infinitely many interpolating solutions.
    pub fn is_overparameterized(&self) -> bool {
        self.d() > self.n()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = DatasetJson {
            n: self.n(),
            d: self.d(),
            level: self.level,
            generator: self.generator,
            seed: self.seed,
            x: self.x.data().to_vec(),
            y: self.y.as_slice().to_vec(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DatasetJson = serde_json::from_str(text)?;
        let x = Matrix::from_vec(doc.n, doc.d, doc.x)?;
        let y = Vector::new(doc.y)?;
        Dataset::new(x, y, doc.level, doc.generator, doc.seed)
    }
}

/// Least-squares objective `½‖Xw − y‖² + ½λ‖w‖²`. `lambda = 0` is the plain
/// problem; the ridge term uses the halved convention so the gradient is
/// `Xᵀ(Xw − y) + λw`.
///
/// The structured designs are mostly zeros, so the objective caches each
/// row's nonzero entries once and evaluates residuals and gradients
/// through them. Adding an exact `0.0` to a running sum never changes it,
/// so this produces bitwise the same numbers as the dense loops.
#[derive(Debug, Clone)]
pub struct Objective {
    pub dataset: Dataset,
    pub lambda: f64,
    sparse_rows: Vec<Vec<(usize, f64)>>,
}

fn sparse_rows(x: &Matrix) -> Vec<Vec<(usize, f64)>> {
    (0..x.rows())
        .map(|i| {
            x.row(i)
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(j, &v)| (j, v))
                .collect()
        })
        .collect()
}

impl Objective {
    pub fn new(dataset: Dataset, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "ridge weight must be finite and nonnegative, got {lambda}"
            )));
        }
        let sparse_rows = sparse_rows(&dataset.x);
        Ok(Self {
            dataset,
            lambda,
            sparse_rows,
        })
    }

    pub fn plain(dataset: Dataset) -> Self {
        let sparse_rows = sparse_rows(&dataset.x);
        Self {
            dataset,
            lambda: 0.0,
            sparse_rows,
        }
    }

    fn check_dim(&self, w: &Vector, op: &'static str) -> Result<()> {
        if w.dim() != self.dataset.d() {
            return Err(Error::LengthMismatch {
                op,
                expected: self.dataset.d(),
                got: w.dim(),
            });
        }
        Ok(())
    }

    /// `Xw − y`.
    pub fn residual(&self, w: &Vector) -> Result<Vector> {
        self.check_dim(w, "Objective::residual")?;
        let ws = w.as_slice();
        let out: Vec<f64> = self
            .sparse_rows
            .iter()
            .zip(self.dataset.y.as_slice())
            .map(|(row, &yi)| row.iter().map(|&(j, v)| v * ws[j]).sum::<f64>() - yi)
            .collect();
        Ok(Vector::new_unchecked(out))
    }

    pub fn gradient(&self, w: &Vector) -> Result<Vector> {
        let r = self.residual(w)?;
        let mut g = vec![0.0; self.dataset.d()];
        for (row, &ri) in self.sparse_rows.iter().zip(r.as_slice()) {
            if ri == 0.0 {
                continue;
            }
            for &(j, v) in row {
                g[j] += ri * v;
            }
        }
        let mut g = Vector::new_unchecked(g);
        if self.lambda != 0.0 {
            g.axpy(self.lambda, w);
        }
        Ok(g)
    }

    pub fn loss(&self, w: &Vector) -> Result<f64> {
        let r = self.residual(w)?;
        let mut value = 0.5 * r.dot(&r);
        if self.lambda != 0.0 {
            value += 0.5 * self.lambda * w.dot(w);
        }
        Ok(value)
    }

    /// `‖Xw − y‖₂`, the training residual reported by the experiment tables.
    pub fn residual_norm(&self, w: &Vector) -> Result<f64> {
        Ok(self.residual(w)?.norm())
    }

    /// Sorted union of columns with any nonzero entry. Gradients of this
    /// objective are exactly zero outside it, so optimizers started at the
    /// origin never move the remaining coordinates.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = vec![false; self.dataset.d()];
        for row in &self.sparse_rows {
            for &(j, _) in row {
                seen[j] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter(|(_, &s)| s)
            .map(|(j, _)| j)
            .collect()
    }
}
