//! Variational objectives for the Perron root.
//!
//! * Collatz–Wielandt ratios `[Ax]_i / x_i`, whose min and max bracket
//!   `r(A)` for every positive `x`.
//! * The Donsker–Varadhan–Friedland objective `Σ p_i [Ax]_i / x_i`.
//! * The Fiedler objective `yᵀAx / yᵀx`.
//! * The diagonally scaled Rayleigh quotient
//!   `ψ(x, y) = xᵀ D_y A D_y⁻¹ x / xᵀx`, with
//!   `r(A) = sup_x inf_y ψ(x, y)`.
//!
//! The inner infimum `φ(x) = inf_y ψ(x, y)` is a balancing problem:
//! `xᵀ D_y A D_y⁻¹ x = yᵀ M y⁻¹` with `M = D_x A D_x`, minimized by the
//! scaling that makes `D_y M D_y⁻¹` line-sum symmetric.

mod saddle;

pub use saddle::{
    phi_gradient, saddle_direct, saddle_iterative, SaddleCertificate, SaddleMethod, DEFAULT_DIRECT_TOL,
    DEFAULT_ITERATIVE_TOL,
};

use serde::Serialize;

use crate::balancing::{balance_from, DEFAULT_TOL as BALANCE_TOL};
use crate::error::{Error, Result};
use crate::matrix::{check_dim, Matrix, PositiveVector};

/// Allowed deviation of `Σ p_i` from one.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// Nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Empty);
        }
        let sum: f64 = p.iter().sum();
        if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotOnSimplex { sum });
        }
        Ok(Self(p))
    }

    /// `z / Σ z_i`.
    pub fn from_weights(z: &PositiveVector) -> Self {
        let s = z.sum();
        Self(z.as_slice().iter().map(|v| v / s).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

fn ratios(a: &Matrix, x: &PositiveVector) -> Result<Vec<f64>> {
    let ax = x.apply(a)?;
    Ok(ax.iter().zip(x.as_slice()).map(|(p, q)| p / q).collect())
}

/// `(min_i [Ax]_i / x_i, max_i [Ax]_i / x_i)`.
pub fn cw_ratios(a: &Matrix, x: &PositiveVector) -> Result<(f64, f64)> {
    Ok(ratios(a, x)?
        .into_iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t))))
}

/// `Σ_i p_i [Ax]_i / x_i`.
pub fn dvf_objective(a: &Matrix, p: &SimplexVector, x: &PositiveVector) -> Result<f64> {
    check_dim(a.dim(), p.dim())?;
    Ok(ratios(a, x)?.iter().zip(p.as_slice()).map(|(t, w)| t * w).sum())
}

/// `yᵀAx / yᵀx`.
pub fn fiedler_objective(a: &Matrix, x: &PositiveVector, y: &PositiveVector) -> Result<f64> {
    check_dim(a.dim(), y.dim())?;
    let ax = x.apply(a)?;
    let num: f64 = y.as_slice().iter().zip(&ax).map(|(p, q)| p * q).sum();
    Ok(num / y.dot(x)?)
}

/// `ψ(x, y) = Σ_ij x_i (y_i A_ij / y_j) x_j / Σ_i x_i²`.
pub fn scaled_rayleigh(a: &Matrix, x: &PositiveVector, y: &PositiveVector) -> Result<f64> {
    let n = a.dim();
    check_dim(n, x.dim())?;
    check_dim(n, y.dim())?;
    let (xs, ys) = (x.as_slice(), y.as_slice());
    let mut num = 0.0;
    for i in 0..n {
        let row = a.row(i);
        let mut acc = 0.0;
        for j in 0..n {
            acc += ys[i] * row[j] / ys[j] * xs[j];
        }
        num += xs[i] * acc;
    }
    Ok(num / x.dot(x)?)
}

/// Inner infimum `φ(x)` and the minimizing scaling.
#[derive(Debug, Clone, Serialize)]
pub struct InnerInfimum {
    pub phi: f64,
    /// Minimizer `y*`, normalized so `y*_1 = 1`.
    pub y_star: PositiveVector,
    pub iterations: usize,
}

/// `φ(x) = inf_y ψ(x, y)` by balancing `M = D_x A D_x`.
pub fn inner_infimum(a: &Matrix, x: &PositiveVector, tol: f64) -> Result<InnerInfimum> {
    inner_infimum_from(a, x, &PositiveVector::ones(a.dim()), tol)
}

/// As [`inner_infimum`], warm-starting the balancing at `y0`.
pub fn inner_infimum_from(a: &Matrix, x: &PositiveVector, y0: &PositiveVector, tol: f64) -> Result<InnerInfimum> {
    a.classify().require_nonnegative_irreducible()?;
    let m = a.diag_scale(x, x)?;
    let res = balance_from(&m, y0, tol)?;
    Ok(InnerInfimum {
        phi: res.objective / x.dot(x)?,
        y_star: res.z,
        iterations: res.iterations,
    })
}

/// Default balancing tolerance used for inner infima.
pub const INNER_TOL: f64 = BALANCE_TOL;

/// Change of variables from Fiedler's `(x, y)` to Donsker–Varadhan–Friedland
/// data: `p = (x ∘ y) / Σ(x ∘ y)`, `x` unchanged.
pub fn fiedler_to_dvf(x: &PositiveVector, y: &PositiveVector) -> Result<(SimplexVector, PositiveVector)> {
    let z = x.hadamard(y)?;
    Ok((SimplexVector::from_weights(&z), x.clone()))
}

/// Spectral bound of a Metzler matrix with its shift and certificate.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralBound {
    pub value: f64,
    /// `t = min_i A_ii`; `A − tI` is nonnegative.
    pub shift: f64,
    pub certificate: SaddleCertificate,
}

/// `s(A) = r(A − tI) + t` with `t = min_i A_ii`.
pub fn spectral_bound(a: &Matrix, tol: f64) -> Result<f64> {
    Ok(spectral_bound_with_certificate(a, tol)?.value)
}

pub fn spectral_bound_with_certificate(a: &Matrix, tol: f64) -> Result<SpectralBound> {
    a.classify().require_metzler_irreducible()?;
    let t = a.diagonal().into_iter().fold(f64::INFINITY, f64::min);
    let n = a.dim();
    // Subtract in place so the diagonal minimum becomes exactly zero.
    let mut data = a.data().to_vec();
    for i in 0..n {
        data[i * n + i] -= t;
    }
    let b = Matrix::new(n, data)?;
    let certificate = saddle_direct(&b, tol)?;
    Ok(SpectralBound {
        value: certificate.r_estimate + t,
        shift: t,
        certificate,
    })
}
