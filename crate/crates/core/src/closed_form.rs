//! Non-iterative evaluation of the optimizer recursions.
//!
//! Running `w_{k+1} = w_k − η D_k ∇f(w_k)` from zero on a linear
//! least-squares objective unrolls into a matrix product acting on `Xᵀy`
//! (or on `y` for predictions), so the final iterate can be computed
//! without stepping. These forms are the independent cross-check for the
//! iterative engine: both paths must agree to tight relative error.
//!
//! Plain-GD forms use a matrix power computed by repeated squaring; the
//! varying-preconditioner forms accumulate the product factor by factor
//! against a vector, applying the earliest preconditioner first.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Matrix, Vector};

/// Inputs shared by the unrolled forms.
#[derive(Debug, Clone)]
pub struct UnrollInput<'a> {
    /// `XᵀX` or `XXᵀ`, whichever side the regime needs.
    pub gram: Matrix,
    pub eta: f64,
    pub iterations: usize,
    /// Per-step diagonals; `None` means plain GD.
    pub d_sequence: Option<&'a [Vector]>,
    pub lambda: f64,
}

impl<'a> UnrollInput<'a> {
    pub fn validate(&self) -> Result<()> {
        if !self.eta.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "step size must be finite, got {}",
                self.eta
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "regularization strength must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        if let Some(seq) = self.d_sequence {
            if seq.len() != self.iterations {
                return Err(Error::LengthMismatch {
                    op: "preconditioner sequence",
                    expected: self.iterations,
                    got: seq.len(),
                });
            }
            for d in seq {
                if d.dim() != self.gram.rows() {
                    return Err(Error::LengthMismatch {
                        op: "preconditioner diagonal",
                        expected: self.gram.rows(),
                        got: d.dim(),
                    });
                }
                if !d.is_finite() {
                    return Err(Error::NonFinite {
                        context: "preconditioner diagonal",
                    });
                }
            }
        }
        Ok(())
    }
}

/// `m^k` by repeated squaring.
fn matrix_power(m: &Matrix, k: usize) -> Result<Matrix> {
    let mut result = Matrix::identity(m.rows());
    let mut base = m.clone();
    let mut exp = k;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result.matmul(&base)?;
        }
        exp >>= 1;
        if exp > 0 {
            base = base.matmul(&base)?;
        }
    }
    Ok(result)
}

/// `I − ηA` for a square `A`.
fn step_matrix(a: &Matrix, eta: f64) -> Matrix {
    let n = a.rows();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let v = -eta * a.get(i, j);
            m.set(i, j, if i == j { 1.0 + v } else { v });
        }
    }
    m
}

/// Applies `∏_{i=K−1}^{0} (I − ηAD_i)` to `v0`: the factor with the lowest
/// index sits rightmost, so it acts first.
fn apply_varying_product(
    a: &Matrix,
    eta: f64,
    d_seq: &[Vector],
    v0: &Vector,
) -> Result<Vector> {
    let mut v = v0.clone();
    let mut scaled = vec![0.0; v0.dim()];
    for d in d_seq {
        for ((s, &di), &vi) in scaled.iter_mut().zip(d.as_slice()).zip(v.as_slice()) {
            *s = di * vi;
        }
        let av = a.matvec(&Vector::new_unchecked(scaled.clone()))?;
        v.axpy(-eta, &av);
    }
    Ok(v)
}

/// `b − (I − ηA)^K b`, then one SPD solve against `A`: the plain-GD
/// iterate in the regime where `A` is the invertible Gram side.
fn gd_form(a: &Matrix, b: &Vector, eta: f64, k: usize) -> Result<Vector> {
    let p = matrix_power(&step_matrix(a, eta), k)?;
    let pb = p.matvec(b)?;
    let mut rhs = b.clone();
    rhs.axpy(-1.0, &pb);
    solve_spd(a, &rhs)
}

/// Plain-GD iterate after `k` steps when the columns are independent
/// (`n ≥ d`): the trajectory lives in a space where `XᵀX` is invertible.
pub fn closed_form_gd_under(x: &Matrix, y: &Vector, eta: f64, k: usize) -> Result<Vector> {
    let input = UnrollInput {
        gram: x.gram(),
        eta,
        iterations: k,
        d_sequence: None,
        lambda: 0.0,
    };
    input.validate()?;
    let b = x.matvec_transpose(y)?;
    gd_form(&input.gram, &b, eta, k)
}

/// Plain-GD iterate after `k` steps when the rows are independent
/// (`d ≥ n`): the iterate stays in the row space, so it is `Xᵀ` applied to
/// an `n`-dimensional solve. As `k → ∞` this approaches the minimum-norm
/// interpolator.
pub fn closed_form_gd_over(x: &Matrix, y: &Vector, eta: f64, k: usize) -> Result<Vector> {
    let input = UnrollInput {
        gram: x.gram_outer(),
        eta,
        iterations: k,
        d_sequence: None,
        lambda: 0.0,
    };
    input.validate()?;
    let z = gd_form(&input.gram, y, eta, k)?;
    x.matvec_transpose(&z)
}

/// Preconditioned iterate after `k` steps, `n ≥ d` regime:
/// one `(I − ηXᵀXD_i)` factor per step applied to `Xᵀy`, then an SPD
/// solve maps the accumulated vector back to weights.
pub fn closed_form_precond_under(
    x: &Matrix,
    y: &Vector,
    eta: f64,
    d_seq: &[Vector],
    k: usize,
) -> Result<Vector> {
    let input = UnrollInput {
        gram: x.gram(),
        eta,
        iterations: k,
        d_sequence: Some(d_seq),
        lambda: 0.0,
    };
    input.validate()?;
    let b = x.matvec_transpose(y)?;
    let v = apply_varying_product(&input.gram, eta, d_seq, &b)?;
    let mut rhs = b;
    rhs.axpy(-1.0, &v);
    solve_spd(&input.gram, &rhs)
}

/// Training predictions `ŷ_k = Xw_k` after `k` preconditioned steps in the
/// `d ≥ n` regime. The weight vector itself has no such form when the
/// preconditioners vary, but the predictions do, and no solve is needed.
pub fn closed_form_prediction_over(
    x: &Matrix,
    y: &Vector,
    eta: f64,
    d_seq: &[Vector],
    k: usize,
) -> Result<Vector> {
    for d in d_seq {
        if d.dim() != x.cols() {
            return Err(Error::LengthMismatch {
                op: "preconditioner diagonal",
                expected: x.cols(),
                got: d.dim(),
            });
        }
        if !d.is_finite() {
            return Err(Error::NonFinite {
                context: "preconditioner diagonal",
            });
        }
    }
    if d_seq.len() != k {
        return Err(Error::LengthMismatch {
            op: "preconditioner sequence",
            expected: k,
            got: d_seq.len(),
        });
    }
    if !eta.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "step size must be finite, got {eta}"
        )));
    }
    // u ← (I − ηXD_iXᵀ)u, factor i = 0 first; ŷ_k = y − u_k.
    let mut u = y.clone();
    let mut scaled = vec![0.0; x.cols()];
    for d in d_seq {
        let xtu = x.matvec_transpose(&u)?;
        for ((s, &di), &vi) in scaled.iter_mut().zip(d.as_slice()).zip(xtu.as_slice()) {
            *s = di * vi;
        }
        let xdxtu = x.matvec(&Vector::new_unchecked(scaled.clone()))?;
        u.axpy(-eta, &xdxtu);
    }
    let mut pred = y.clone();
    pred.axpy(-1.0, &u);
    Ok(pred)
}

/// Where a constant positive diagonal sends the iterates in the `d ≥ n`
/// regime: `D Xᵀ (XDXᵀ)⁻¹ y`, the interpolator of minimum `D⁻¹`-weighted
/// norm. Equals the minimum-norm interpolator only when `D` is a multiple
/// of the identity.
pub fn constant_d_limit_over(x: &Matrix, y: &Vector, d: &Vector) -> Result<Vector> {
    if d.dim() != x.cols() {
        return Err(Error::LengthMismatch {
            op: "preconditioner diagonal",
            expected: x.cols(),
            got: d.dim(),
        });
    }
    if !d.as_slice().iter().all(|&v| v > 0.0) {
        return Err(Error::InvalidSpec(
            "preconditioner diagonals must be strictly positive".into(),
        ));
    }
    // XDXᵀ = (X√D)(X√D)ᵀ, so scaling the columns by √D and taking the
    // outer Gram keeps the matrix exactly symmetric.
    let n = x.rows();
    let cols = x.cols();
    let sqrt_d: Vec<f64> = d.as_slice().iter().map(|&v| v.sqrt()).collect();
    let mut xd = Matrix::zeros(n, cols);
    for i in 0..n {
        for j in 0..cols {
            xd.set(i, j, x.get(i, j) * sqrt_d[j]);
        }
    }
    let xdxt = xd.gram_outer();
    let z = x.matvec_transpose(&solve_spd(&xdxt, y)?)?;
    let out: Vec<f64> = z
        .as_slice()
        .iter()
        .zip(d.as_slice())
        .map(|(&zi, &di)| di * zi)
        .collect();
    Vector::new(out)
}

/// Preconditioned ridge iterate after `k` steps: same shape as the
/// unregularized form but with `XᵀX + λI` as the operator, which is
/// invertible in every regime once `λ > 0`. As `k → ∞` with bounded
/// preconditioners this approaches the ridge solution regardless of the
/// `D_i`, which is why regularization flattens the differences between
/// the methods.
pub fn closed_form_ridge(
    x: &Matrix,
    y: &Vector,
    eta: f64,
    d_seq: &[Vector],
    k: usize,
    lambda: f64,
) -> Result<Vector> {
    let mut gram = x.gram();
    gram.add_diagonal(lambda);
    let input = UnrollInput {
        gram,
        eta,
        iterations: k,
        d_sequence: Some(d_seq),
        lambda,
    };
    input.validate()?;
    let b = x.matvec_transpose(y)?;
    let v = apply_varying_product(&input.gram, eta, d_seq, &b)?;
    let mut rhs = b;
    rhs.axpy(-1.0, &v);
    solve_spd(&input.gram, &rhs)
}
