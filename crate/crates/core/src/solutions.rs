//! Reference points the optimizer trajectories are measured against: the
//! unique least-squares solution (when columns are independent), the
//! minimum-norm interpolator (when rows are independent), the ridge
//! solution, and the fixed-point direction that the squared-denominator
//! preconditioner locks onto for a narrow class of problems.

use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Matrix, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    LeftInverse,
    MinNorm,
    Ridge,
    AdaGradVariantFixedPoint,
}

/// An analytic solution together with its training residual `‖Xw − y‖₂`.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub w: Vector,
    pub kind: SolutionKind,
    pub residual: f64,
}

fn residual_norm(x: &Matrix, y: &Vector, w: &Vector) -> Result<f64> {
    let mut r = x.matvec(w)?;
    r.axpy(-1.0, y);
    Ok(r.norm())
}

/// `(XᵀX)⁻¹Xᵀy`: the unique minimizer when the columns are independent.
pub fn least_squares_solution(x: &Matrix, y: &Vector) -> Result<ReferenceSolution> {
    let w = solve_spd(&x.gram(), &x.matvec_transpose(y)?)?;
    let residual = residual_norm(x, y, &w)?;
    Ok(ReferenceSolution {
        w,
        kind: SolutionKind::LeftInverse,
        residual,
    })
}

/// `Xᵀ(XXᵀ)⁻¹y`: of all interpolating solutions (rows independent), the
/// one with the smallest norm, and the one plain GD from zero reaches.
pub fn min_norm_solution(x: &Matrix, y: &Vector) -> Result<ReferenceSolution> {
    let w = x.matvec_transpose(&solve_spd(&x.gram_outer(), y)?)?;
    let residual = residual_norm(x, y, &w)?;
    Ok(ReferenceSolution {
        w,
        kind: SolutionKind::MinNorm,
        residual,
    })
}

/// `(XᵀX + λI)⁻¹Xᵀy` for `λ > 0`: the unique ridge minimizer in every
/// regime.
pub fn ridge_solution(x: &Matrix, y: &Vector, lambda: f64) -> Result<ReferenceSolution> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "ridge weight must be positive and finite, got {lambda}"
        )));
    }
    let mut gram = x.gram();
    gram.add_diagonal(lambda);
    let w = solve_spd(&gram, &x.matvec_transpose(y)?)?;
    let residual = residual_norm(x, y, &w)?;
    Ok(ReferenceSolution {
        w,
        kind: SolutionKind::Ridge,
        residual,
    })
}

/// Outcome of the fixed-point construction: either the direction (with
/// the scalar relating `X·direction` to `y`), or a report that the
/// problem sits outside the narrow class where the construction applies.
#[derive(Debug, Clone)]
pub enum FixedPoint {
    Applicable {
        solution: ReferenceSolution,
        /// `X · w = scale · y` for the stored unit-norm `w`.
        scale: f64,
    },
    /// `X v` was not collinear with `y`; carries the relative deviation.
    NotApplicable { deviation: f64 },
}

/// Direction the squared-denominator preconditioner converges to when it
/// applies: `v ∝ Q⁻¹ sign(Xᵀy)` with `Q = diag(|Xᵀy|³)`, valid only when
/// `Xv` is collinear with `y`. The direction is returned unit-normalized
/// since the construction fixes it only up to scale.
pub fn adagrad_variant_fixed_point(x: &Matrix, y: &Vector) -> Result<FixedPoint> {
    let b = x.matvec_transpose(y)?;
    for (i, &bi) in b.as_slice().iter().enumerate() {
        if bi.abs() <= 1e-12 {
            return Err(Error::ZeroGradientComponent { index: i });
        }
    }
    let v: Vec<f64> = b
        .as_slice()
        .iter()
        .map(|&bi| bi.signum() / bi.abs().powi(3))
        .collect();
    let v = Vector::new(v)?;
    let xv = x.matvec(&v)?;
    let xv_norm = xv.norm();
    if xv_norm == 0.0 {
        return Ok(FixedPoint::NotApplicable { deviation: 1.0 });
    }
    let c_raw = y.dot(&xv) / y.dot(y);
    let mut cross = xv.clone();
    cross.axpy(-c_raw, y);
    let deviation = cross.norm() / xv_norm;
    if deviation > 1e-8 {
        return Ok(FixedPoint::NotApplicable { deviation });
    }
    let w = v.normalized()?;
    let scale = c_raw / v.norm();
    let residual = residual_norm(x, y, &w)?;
    Ok(FixedPoint::Applicable {
        solution: ReferenceSolution {
            w,
            kind: SolutionKind::AdaGradVariantFixedPoint,
            residual,
        },
        scale,
    })
}
