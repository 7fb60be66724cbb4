//! Dense real linear algebra: row-major matrices, a Cholesky solver for
//! symmetric positive definite systems, and power iteration for the top
//! eigenvalue. Everything downstream builds on these three pieces.

use crate::error::{Error, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::LengthMismatch {
                op: "Matrix::from_vec",
                expected: rows * cols,
                got: data.len(),
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite {
                context: "matrix construction",
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a_ik) in a_row.iter().enumerate() {
                if a_ik == 0.0 {
                    continue;
                }
                let b_row = other.row(k);
                for (o, &b_kj) in out_row.iter_mut().zip(b_row) {
                    *o += a_ik * b_kj;
                }
            }
        }
        Ok(out)
    }

    /// `A v` for a vector `v` of length `cols`.
    pub fn matvec(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.cols {
            return Err(Error::LengthMismatch {
                op: "matvec",
                expected: self.cols,
                got: v.dim(),
            });
        }
        let mut out = vec![0.0; self.rows];
        for (o, i) in out.iter_mut().zip(0..self.rows) {
            *o = dot(self.row(i), v.as_slice());
        }
        Ok(Vector::new_unchecked(out))
    }

    /// `Aᵀ v` for a vector `v` of length `rows`, without materializing the
    /// transpose. Row-major access keeps this cache friendly.
    pub fn matvec_transpose(&self, v: &Vector) -> Result<Vector> {
        if v.dim() != self.rows {
            return Err(Error::LengthMismatch {
                op: "matvec_transpose",
                expected: self.rows,
                got: v.dim(),
            });
        }
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let vi = v.as_slice()[i];
            if vi == 0.0 {
                continue;
            }
            for (o, &a_ij) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a_ij;
            }
        }
        Ok(Vector::new_unchecked(out))
    }

    /// Gram matrix `XᵀX` (cols × cols).
    pub fn gram(&self) -> Matrix {
        let mut out = Matrix::zeros(self.cols, self.cols);
        for i in 0..self.rows {
            let row = self.row(i);
            for (j, &xj) in row.iter().enumerate() {
                if xj == 0.0 {
                    continue;
                }
                let out_row = &mut out.data[j * self.cols..(j + 1) * self.cols];
                for (o, &xk) in out_row.iter_mut().zip(row) {
                    *o += xj * xk;
                }
            }
        }
        out
    }

    /// Outer Gram matrix `XXᵀ` (rows × rows).
    pub fn gram_outer(&self) -> Matrix {
        let mut out = Matrix::zeros(self.rows, self.rows);
        for i in 0..self.rows {
            for j in i..self.rows {
                let v = dot(self.row(i), self.row(j));
                out.data[i * self.rows + j] = v;
                out.data[j * self.rows + i] = v;
            }
        }
        out
    }

    /// Adds `value` to every diagonal entry. Square matrices only.
    pub fn add_diagonal(&mut self, value: f64) {
        debug_assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            self.data[i * self.cols + i] += value;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

/// Dense vector of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::LengthMismatch {
                op: "Vector::new",
                expected: 1,
                got: 0,
            });
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite {
                context: "vector construction",
            });
        }
        Ok(Self { data })
    }

    /// Internal constructor for values produced by our own arithmetic.
    pub(crate) fn new_unchecked(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            data: vec![0.0; dim],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.data, &other.data)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Norm with the entries rescaled by their largest magnitude first, so
    /// the squares cannot overflow while the entries are still finite.
    pub(crate) fn scaled_norm(&self) -> f64 {
        let m = self.data.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        m * self
            .data
            .iter()
            .map(|&v| {
                let r = v / m;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Vector) {
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn scale(&mut self, alpha: f64) {
        for a in &mut self.data {
            *a *= alpha;
        }
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Vector::new_unchecked(data)
    }

    /// Returns `self / ‖self‖`, or an error on the zero vector.
    pub fn normalized(&self) -> Result<Vector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let mut out = self.clone();
        out.scale(1.0 / n);
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` for symmetric positive definite `A` via Cholesky.
///
/// Symmetry is checked up to `1e-10` relative to the largest entry; a
/// non-positive pivot reports the matrix as not positive definite.
pub fn solve_spd(a: &Matrix, b: &Vector) -> Result<Vector> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::ShapeMismatch {
            op: "solve_spd",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: n,
            right_cols: 1,
        });
    }
    if b.dim() != n {
        return Err(Error::LengthMismatch {
            op: "solve_spd",
            expected: n,
            got: b.dim(),
        });
    }
    let scale = a.max_abs().max(1.0);
    let mut max_dev: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_dev = max_dev.max((a.get(i, j) - a.get(j, i)).abs());
        }
    }
    if max_dev > 1e-10 * scale {
        return Err(Error::NotSymmetric {
            max_deviation: max_dev,
        });
    }

    // Lower-triangular Cholesky factor, stored dense.
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                // A pivot this far below the matrix scale means rank
                // deficiency up to rounding, not a usable factor.
                if sum <= 1e-12 * scale {
                    return Err(Error::NotPositiveDefinite {
                        pivot: i,
                        value: sum,
                    });
                }
                l[i * n + i] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }

    // Forward substitution L z = b, then backward Lᵀ x = z.
    let mut x = b.as_slice().to_vec();
    for i in 0..n {
        for k in 0..i {
            x[i] -= l[i * n + k] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in (i + 1)..n {
            x[i] -= l[k * n + i] * x[k];
        }
        x[i] /= l[i * n + i];
    }
    Ok(Vector::new_unchecked(x))
}

/// Top eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration. Starts from the normalized all-ones vector; if that start
/// lies in the null space it restarts from a fixed perturbed vector.
pub fn top_eigenvalue(a: &Matrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::ShapeMismatch {
            op: "top_eigenvalue",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: a.rows(),
            right_cols: a.cols(),
        });
    }
    if a.max_abs() == 0.0 {
        return Err(Error::ZeroMatrix);
    }

    let mut v = Vector::new_unchecked(vec![1.0 / (n as f64).sqrt(); n]);
    let mut lambda = 0.0;
    let mut restarted = false;
    for it in 0..max_iter {
        let av = a.matvec(&v)?;
        let norm = av.norm();
        if norm == 0.0 {
            if restarted {
                return Err(Error::NoConvergence {
                    iterations: it,
                    last_estimate: lambda,
                });
            }
            // Start vector was annihilated; use a graded restart vector.
            let data: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 + 1.0).sqrt()).collect();
            v = Vector::new_unchecked(data).normalized()?;
            restarted = true;
            continue;
        }
        let next_lambda = v.dot(&av);
        let mut next_v = av;
        next_v.scale(1.0 / norm);
        if it > 0 && (next_lambda - lambda).abs() <= tol * next_lambda.abs().max(f64::MIN_POSITIVE)
        {
            return Ok(next_lambda);
        }
        lambda = next_lambda;
        v = next_v;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        last_estimate: lambda,
    })
}
