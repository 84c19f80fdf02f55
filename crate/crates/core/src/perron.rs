//! Perron root and Perron vectors of nonnegative irreducible matrices, and
//! Collatz–Wielandt enclosures of the Perron root.
//!
//! Both solvers iterate on the shifted matrix `A + cI` with
//! `c = 1 + max_i A_ii`. The shift makes the iteration matrix primitive, so
//! cyclic patterns such as `[[0, 1], [1, 0]]` converge, and it keeps all
//! iterates strictly positive.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{Matrix, PositiveVector};
use crate::variational::cw_ratios;

pub const DEFAULT_TOL: f64 = 1e-12;

/// Perron root `r` with left (`uᵀA = r uᵀ`) and right (`Av = r v`) Perron
/// vectors normalized so that `uᵀv = 1` and `‖u‖₂ = ‖v‖₂`.
#[derive(Debug, Clone, Serialize)]
pub struct PerronPair {
    pub r: f64,
    pub u: PositiveVector,
    pub v: PositiveVector,
    /// `max(‖Av − rv‖∞/‖v‖∞, ‖uᵀA − ruᵀ‖∞/‖u‖∞) / ‖A‖∞`.
    pub residual: f64,
    pub iterations: usize,
}

/// Certified enclosure `[lo, hi]` of the Perron root: the min and max
/// Collatz–Wielandt ratios of `A` at `witness_x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInterval {
    pub lo: f64,
    pub hi: f64,
    pub witness_x: PositiveVector,
}

impl BoundInterval {
    /// Ratios recomputed from the witness. Any positive witness is valid.
    pub fn from_witness(a: &Matrix, witness_x: PositiveVector) -> Result<Self> {
        let (lo, hi) = cw_ratios(a, &witness_x)?;
        Ok(Self { lo, hi, witness_x })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, value: f64, slack: f64) -> bool {
        self.lo - slack <= value && value <= self.hi + slack
    }
}

/// Shift constant applied before power iteration.
pub fn power_shift(a: &Matrix) -> f64 {
    1.0 + a.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Iteration budget `100 · n · ⌈log10(1/tol)⌉`.
pub fn iteration_budget(n: usize, tol: f64) -> usize {
    let digits = (1.0 / tol).log10().ceil().max(1.0) as usize;
    100 * n * digits
}

fn inf_normalize(x: &mut [f64]) {
    let m = x.iter().copied().fold(0.0, f64::max);
    x.iter_mut().for_each(|v| *v /= m);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn relative_residual(ax: &[f64], r: f64, x: &[f64]) -> f64 {
    let xmax = x.iter().copied().fold(0.0, f64::max);
    let rmax = ax.iter().zip(x).map(|(a, b)| (a - r * b).abs()).fold(0.0, f64::max);
    rmax / xmax
}

/// Unpivoted LU factorization of `σI − A`. For a nonnegative irreducible
/// `A` it exists with positive pivots iff `σ > r(A)`, and then `(σI − A)⁻¹`
/// is entrywise positive.
struct ShiftInvert {
    n: usize,
    lu: Vec<f64>,
}

impl ShiftInvert {
    fn factor(a: &Matrix, sigma: f64) -> Option<Self> {
        let n = a.dim();
        let mut lu: Vec<f64> = a.data().iter().map(|v| -v).collect();
        for i in 0..n {
            lu[i * n + i] += sigma;
        }
        for k in 0..n {
            let pivot = lu[k * n + k];
            if pivot.is_nan() || pivot <= 0.0 {
                return None;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= f * lu[k * n + j];
                    }
                }
            }
        }
        Some(Self { n, lu })
    }

    /// Solves `(σI − A) x = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, lu) = (self.n, &self.lu);
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= lu[i * n + k] * x[k];
            }
            x[i] /= lu[i * n + i];
        }
        x
    }

    /// Solves `(σI − A)ᵀ x = b`.
    fn solve_transposed(&self, b: &[f64]) -> Vec<f64> {
        let (n, lu) = (self.n, &self.lu);
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= lu[k * n + i] * x[k];
            }
            x[i] /= lu[i * n + i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= lu[k * n + i] * x[k];
            }
        }
        x
    }

    /// Factors at the first `σ = hi · (1 + δ)`, `δ = 1e-8, 1e-6, ...`, that
    /// lies strictly above `r(A)`.
    fn above(a: &Matrix, hi: f64) -> Option<Self> {
        let base = hi.abs().max(f64::MIN_POSITIVE);
        [1e-8, 1e-6, 1e-4, 1e-2, 1.0]
            .iter()
            .find_map(|d| Self::factor(a, hi + d * base))
    }
}

const REFINE_STEPS: usize = 100;

fn cw_hi(a: &Matrix, x: &[f64]) -> f64 {
    a.mul_slice(x)
        .iter()
        .zip(x)
        .map(|(p, q)| p / q)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn positive_iterate(mut x: Vec<f64>) -> Option<Vec<f64>> {
    if x.iter().all(|v| v.is_finite() && *v > 0.0) {
        inf_normalize(&mut x);
        Some(x)
    } else {
        None
    }
}

struct PairState {
    r: f64,
    residual: f64,
}

fn pair_state(a: &Matrix, u: &[f64], v: &[f64], scale: f64) -> PairState {
    let av = a.mul_slice(v);
    let ua = a.mul_slice_left(u);
    let r = dot(u, &av) / dot(u, v);
    let residual = relative_residual(&av, r, v).max(relative_residual(&ua, r, u)) / scale;
    PairState { r, residual }
}

/// Perron root and vectors by shifted power iteration on `A` and `Aᵀ`.
///
/// If the power budget runs out (slow spectral gap), the iterates are
/// refined by inverse iteration with `σ` just above the Collatz–Wielandt
/// upper bound, which converges at rate `(σ − r) / |σ − λ₂|`.
pub fn perron_pair(a: &Matrix, tol: f64) -> Result<PerronPair> {
    a.classify().require_nonnegative_irreducible()?;
    assert!(tol > 0.0, "tolerance must be positive");
    let n = a.dim();
    let shift = power_shift(a);
    let norm = a.inf_norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let budget = iteration_budget(n, tol);

    let mut v = vec![1.0; n];
    let mut u = vec![1.0; n];
    for iteration in 0..budget {
        let av = a.mul_slice(&v);
        let ua = a.mul_slice_left(&u);
        let r = dot(&u, &av) / dot(&u, &v);
        let residual = relative_residual(&av, r, &v).max(relative_residual(&ua, r, &u)) / scale;
        if residual <= tol {
            return Ok(finish_pair(r, u, v, residual, iteration));
        }
        for ((vi, avi), (ui, uai)) in v.iter_mut().zip(&av).zip(u.iter_mut().zip(&ua)) {
            *vi = avi + shift * *vi;
            *ui = uai + shift * *ui;
        }
        inf_normalize(&mut v);
        inf_normalize(&mut u);
    }

    let no_convergence = Error::NoConvergence {
        what: "perron power iteration",
        iterations: budget + REFINE_STEPS,
    };
    let hi = cw_hi(a, &v).max(cw_hi(&a.transpose(), &u));
    let Some(lu) = ShiftInvert::above(a, hi) else {
        return Err(no_convergence);
    };
    for step in 0..=REFINE_STEPS {
        let state = pair_state(a, &u, &v, scale);
        if state.residual <= tol {
            return Ok(finish_pair(state.r, u, v, state.residual, budget + step));
        }
        match (
            positive_iterate(lu.solve(&v)),
            positive_iterate(lu.solve_transposed(&u)),
        ) {
            (Some(nv), Some(nu)) => {
                v = nv;
                u = nu;
            }
            _ => break,
        }
    }
    Err(no_convergence)
}

fn finish_pair(r: f64, mut u: Vec<f64>, mut v: Vec<f64>, residual: f64, iterations: usize) -> PerronPair {
    let nu = dot(&u, &u).sqrt();
    let nv = dot(&v, &v).sqrt();
    u.iter_mut().for_each(|x| *x /= nu);
    v.iter_mut().for_each(|x| *x /= nv);
    let s = dot(&u, &v).sqrt();
    u.iter_mut().for_each(|x| *x /= s);
    v.iter_mut().for_each(|x| *x /= s);
    PerronPair {
        r,
        u: PositiveVector::new(u).expect("power iterates of a shifted nonnegative matrix stay positive"),
        v: PositiveVector::new(v).expect("power iterates of a shifted nonnegative matrix stay positive"),
        residual,
        iterations,
    }
}

fn ratio_range(a: &Matrix, x: &[f64]) -> (f64, f64) {
    a.mul_slice(x)
        .iter()
        .zip(x)
        .map(|(p, q)| p / q)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)))
}

/// Shrinks a Collatz–Wielandt interval around `r(A)` by iterating
/// `x ← (A + cI)x` until `hi − lo ≤ eps · max(1, |hi|)`, with the same
/// inverse-iteration fallback as [`perron_pair`].
pub fn cw_certified_interval(a: &Matrix, eps: f64) -> Result<BoundInterval> {
    a.classify().require_nonnegative_irreducible()?;
    assert!(eps > 0.0, "eps must be positive");
    let n = a.dim();
    let shift = power_shift(a);
    let budget = iteration_budget(n, eps);
    let narrow = |lo: f64, hi: f64| hi - lo <= eps * hi.abs().max(1.0);
    let certify = |x: Vec<f64>| BoundInterval::from_witness(a, PositiveVector::new(x).expect("positive iterate"));

    let mut x = vec![1.0; n];
    for _ in 0..budget {
        let ax = a.mul_slice(&x);
        let (lo, hi) = ratio_range(a, &x);
        if narrow(lo, hi) {
            return certify(x);
        }
        for (xi, axi) in x.iter_mut().zip(&ax) {
            *xi = axi + shift * *xi;
        }
        inf_normalize(&mut x);
    }

    let no_convergence = Error::NoConvergence {
        what: "collatz-wielandt interval",
        iterations: budget + REFINE_STEPS,
    };
    let Some(lu) = ShiftInvert::above(a, ratio_range(a, &x).1) else {
        return Err(no_convergence);
    };
    for _ in 0..=REFINE_STEPS {
        let (lo, hi) = ratio_range(a, &x);
        if narrow(lo, hi) {
            return certify(x);
        }
        match positive_iterate(lu.solve(&x)) {
            Some(next) => x = next,
            None => break,
        }
    }
    Err(no_convergence)
}
