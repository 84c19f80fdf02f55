//! Saddle points of `ψ(x, y) = xᵀ D_y A D_y⁻¹ x / xᵀx`.
//!
//! The direct solver uses Perron data: `x̂ = √(u ∘ v)`, `ŷ = √(u / v)`.
//! The iterative solver never touches Perron vectors. It maximizes
//! `φ(x) = inf_y ψ(x, y)` over `x = exp(ξ)` with quasi-Newton steps and an
//! Armijo backtracking line search, solving each inner problem by balancing.
//! By the envelope theorem the gradient of `φ` is the `x`-gradient of `ψ` at
//! the inner minimizer, which is available in closed form.
//!
//! Both solvers bracket `r(A)` from above with Collatz–Wielandt ratios at the
//! candidate Perron vectors `x̂ / ŷ` (right) and `x̂ ∘ ŷ` (left).

use serde::Serialize;

use super::{inner_infimum, inner_infimum_from, scaled_rayleigh, INNER_TOL};
use crate::balancing::symmetrizing_scaling;
use crate::error::{Error, Result};
use crate::matrix::{check_dim, Matrix, PositiveVector};
use crate::perron::{perron_pair, BoundInterval, DEFAULT_TOL as PERRON_TOL};

pub const DEFAULT_DIRECT_TOL: f64 = 1e-10;
pub const DEFAULT_ITERATIVE_TOL: f64 = 1e-8;

const ARMIJO: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
/// Largest step in any log-coordinate per iteration.
const MAX_LOG_STEP: f64 = 2.0;
/// Consecutive non-improving steps that count as a stall.
const STALL_STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SaddleMethod {
    Direct,
    Iterative,
}

/// Witness `(x̂, ŷ)` for `r(A) = sup_x inf_y ψ(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct SaddleCertificate {
    pub method: SaddleMethod,
    pub r_estimate: f64,
    /// Unit Euclidean length.
    pub x_hat: PositiveVector,
    /// Determined only up to a positive factor.
    pub y_hat: PositiveVector,
    /// `ψ(x̂, ŷ)`.
    pub objective_at_saddle: f64,
    /// `ψ(x̂, ŷ) − φ(x̂)`, with `φ(x̂)` recomputed from scratch.
    pub inner_gap: f64,
    /// Collatz–Wielandt ratios of `A` at `x̂ / ŷ`.
    pub cw_interval: BoundInterval,
    /// Best certified upper bound on `r(A)` minus `r_estimate`.
    pub gap: f64,
    pub tolerance: f64,
    pub iterations: usize,
}

impl SaddleCertificate {
    /// Re-derives the recomputable fields against `a`; returns the names of
    /// the checks that fail.
    pub fn violations(&self, a: &Matrix) -> Vec<&'static str> {
        let mut out = Vec::new();
        let scale = self.r_estimate.abs().max(1.0);
        let slack = self.tolerance * scale;
        match scaled_rayleigh(a, &self.x_hat, &self.y_hat) {
            Ok(psi) if (psi - self.objective_at_saddle).abs() <= 1e-12 * scale => {}
            _ => out.push("objective_at_saddle"),
        }
        if (self.objective_at_saddle - self.r_estimate).abs() > slack {
            out.push("r_estimate");
        }
        match BoundInterval::from_witness(a, self.cw_interval.witness_x.clone()) {
            Ok(iv) if iv == self.cw_interval => {}
            _ => out.push("cw_interval"),
        }
        if !self.cw_interval.contains(self.r_estimate, slack) {
            out.push("cw_bracket");
        }
        if self.inner_gap > slack {
            out.push("inner_gap");
        }
        out
    }
}

/// `(Bx)_i = y_i [A (x / y)]_i` and `(Bᵀx)_i = [Aᵀ (x ∘ y)]_i / y_i` for
/// `B = D_y A D_y⁻¹`.
fn scaled_products(a: &Matrix, x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let right: Vec<f64> = x.iter().zip(y).map(|(p, q)| p / q).collect();
    let left: Vec<f64> = x.iter().zip(y).map(|(p, q)| p * q).collect();
    let bx = a.mul_slice(&right).into_iter().zip(y).map(|(t, q)| t * q).collect();
    let btx = a.mul_slice_left(&left).into_iter().zip(y).map(|(t, q)| t / q).collect();
    (bx, btx)
}

/// Gradient of `φ` in log coordinates `ξ = ln x`, given the inner minimizer
/// `y` and `φ(x)`:
/// `∂φ/∂ξ_i = x_i ((Bx)_i + (Bᵀx)_i − 2φ x_i) / xᵀx`.
pub fn phi_gradient(a: &Matrix, x: &PositiveVector, y: &PositiveVector, phi: f64) -> Result<Vec<f64>> {
    check_dim(a.dim(), x.dim())?;
    check_dim(a.dim(), y.dim())?;
    let xs = x.as_slice();
    let (bx, btx) = scaled_products(a, xs, y.as_slice());
    let xx = x.dot(x)?;
    Ok((0..xs.len())
        .map(|i| xs[i] * (bx[i] + btx[i] - 2.0 * phi * xs[i]) / xx)
        .collect())
}

/// `min(max_i (Bx)_i / x_i, max_i (Bᵀx)_i / x_i)`: Collatz–Wielandt upper
/// bounds of `A` at `x / y` and of `Aᵀ` at `x ∘ y`.
fn upper_bound(a: &Matrix, x: &[f64], y: &[f64]) -> f64 {
    let (bx, btx) = scaled_products(a, x, y);
    let hi = |v: &[f64]| v.iter().zip(x).map(|(p, q)| p / q).fold(f64::NEG_INFINITY, f64::max);
    hi(&bx).min(hi(&btx))
}

/// Closed-form saddle from the Perron pair.
pub fn saddle_direct(a: &Matrix, tol: f64) -> Result<SaddleCertificate> {
    let pp = perron_pair(a, tol.min(PERRON_TOL))?;
    let x_hat = pp.u.hadamard(&pp.v)?.sqrt();
    let y_hat = symmetrizing_scaling(&pp)?;
    let psi = scaled_rayleigh(a, &x_hat, &y_hat)?;
    let scale = pp.r.abs().max(1.0);
    if (psi - pp.r).abs() > tol * scale {
        return Err(Error::NoConvergence {
            what: "closed-form saddle value",
            iterations: pp.iterations,
        });
    }
    let inner = inner_infimum(a, &x_hat, INNER_TOL)?;
    let inner_gap = psi - inner.phi;
    if inner_gap > tol * scale {
        return Err(Error::NoConvergence {
            what: "closed-form saddle attainment",
            iterations: pp.iterations,
        });
    }
    let upper = upper_bound(a, x_hat.as_slice(), y_hat.as_slice());
    let cw_interval = BoundInterval::from_witness(a, pp.v.clone())?;
    Ok(SaddleCertificate {
        method: SaddleMethod::Direct,
        r_estimate: psi,
        gap: upper.min(cw_interval.hi) - psi,
        x_hat,
        y_hat,
        objective_at_saddle: psi,
        inner_gap,
        cw_interval,
        tolerance: tol,
        iterations: pp.iterations,
    })
}

#[derive(Debug, Clone)]
struct Iterate {
    x: PositiveVector,
    y: PositiveVector,
    phi: f64,
    grad: Vec<f64>,
    upper: f64,
}

impl Iterate {
    fn at(a: &Matrix, x: PositiveVector, y0: &PositiveVector) -> Result<Self> {
        let x = x.normalized();
        let inner = inner_infimum_from(a, &x, y0, INNER_TOL)?;
        let grad = phi_gradient(a, &x, &inner.y_star, inner.phi)?;
        let upper = upper_bound(a, x.as_slice(), inner.y_star.as_slice());
        Ok(Self {
            x,
            y: inner.y_star,
            phi: inner.phi,
            grad,
            upper,
        })
    }

    fn gap(&self) -> f64 {
        self.upper - self.phi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Converged,
    Stalled,
    Exhausted,
}

fn outer_budget(n: usize) -> usize {
    100 * n.max(2)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|t| *t -= mean);
}

/// Quasi-Newton ascent of `φ` from one start. Works on `f = −φ` so the
/// standard minimization form of the inverse-Hessian update applies.
fn ascend(a: &Matrix, start: PositiveVector, tol: f64, budget: usize) -> Result<(Iterate, Outcome, usize)> {
    let n = a.dim();
    let mut cur = Iterate::at(a, start, &PositiveVector::ones(n))?;
    let mut h = identity(n, 1.0 / cur.phi.abs().max(1.0));
    let mut fresh = true;
    let mut flat_steps = 0;

    for iteration in 0..budget {
        let scale = cur.phi.abs().max(1.0);
        if cur.gap() <= tol * scale {
            return Ok((cur, Outcome::Converged, iteration));
        }
        let gf: Vec<f64> = cur.grad.iter().map(|g| -g).collect();
        let mut d = mat_vec(&h, &gf, n);
        d.iter_mut().for_each(|t| *t = -*t);
        let mut slope = dot(&gf, &d);
        if slope >= 0.0 {
            h = identity(n, 1.0 / scale);
            fresh = true;
            d = cur.grad.iter().map(|g| g / scale).collect();
            slope = dot(&gf, &d);
        }
        let dmax = d.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        if dmax > MAX_LOG_STEP {
            let k = MAX_LOG_STEP / dmax;
            d.iter_mut().for_each(|t| *t *= k);
            slope *= k;
        }

        let log_x: Vec<f64> = cur.x.as_slice().iter().map(|t| t.ln()).collect();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: Vec<f64> = log_x.iter().zip(&d).map(|(l, s)| (l + alpha * s).exp()).collect();
            let Ok(trial) = PositiveVector::new(trial) else {
                alpha *= SHRINK;
                continue;
            };
            let cand = Iterate::at(a, trial, &cur.y)?;
            if -cand.phi <= -cur.phi + ARMIJO * alpha * slope {
                accepted = Some(cand);
                break;
            }
            alpha *= SHRINK;
        }
        let Some(next) = accepted else {
            return Ok((cur, Outcome::Stalled, iteration));
        };

        let mut s: Vec<f64> = next.x.as_slice().iter().zip(&log_x).map(|(t, l)| t.ln() - l).collect();
        center(&mut s);
        let mut yv: Vec<f64> = cur.grad.iter().zip(&next.grad).map(|(g0, g1)| g0 - g1).collect();
        center(&mut yv);
        let sy = dot(&s, &yv);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&yv, &yv).sqrt() {
            if fresh {
                h = identity(n, sy / dot(&yv, &yv));
                fresh = false;
            }
            bfgs_update(&mut h, &s, &yv, sy, n);
        }

        let improvement = next.phi - cur.phi;
        cur = next;
        if improvement <= 1e-15 * scale {
            flat_steps += 1;
            if flat_steps >= STALL_STEPS {
                return Ok((cur, Outcome::Stalled, iteration + 1));
            }
        } else {
            flat_steps = 0;
        }
    }
    let outcome = if cur.gap() <= tol * cur.phi.abs().max(1.0) {
        Outcome::Converged
    } else {
        Outcome::Exhausted
    };
    Ok((cur, outcome, budget))
}

fn identity(n: usize, diag: f64) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = diag;
    }
    h
}

fn mat_vec(h: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|i| dot(&h[i * n..(i + 1) * n], v)).collect()
}

/// `H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ`, `ρ = 1 / sᵀy`.
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64, n: usize) {
    let rho = 1.0 / sy;
    let hy = mat_vec(h, y, n);
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Sup-inf solve without Perron vectors, multi-started from `e`, `Ae`, `Aᵀe`.
///
/// Succeeds when the certified gap `upper − φ(x)` drops to
/// `tol · max(1, |φ|)`, or when the ascent stalls at round-off with the gap
/// within `√tol · max(1, |φ|)` (φ is flat to second order at the saddle, so
/// its error is then of order `tol`). Otherwise returns
/// [`Error::SaddleNoConvergence`] carrying the best iterate.
pub fn saddle_iterative(a: &Matrix, tol: f64) -> Result<SaddleCertificate> {
    a.classify().require_nonnegative_irreducible()?;
    assert!(tol > 0.0, "tolerance must be positive");
    let n = a.dim();
    let starts = [
        PositiveVector::ones(n),
        PositiveVector::new(a.row_sums())?,
        PositiveVector::new(a.col_sums())?,
    ];
    let budget = outer_budget(n);
    let mut iterations = 0;
    let mut best: Option<(Iterate, Outcome)> = None;
    for start in starts {
        let (it, outcome, used) = ascend(a, start, tol, budget)?;
        iterations += used;
        if outcome == Outcome::Converged {
            return certificate(a, it, tol, iterations);
        }
        if best.as_ref().is_none_or(|(b, _)| it.phi > b.phi) {
            best = Some((it, outcome));
        }
    }
    let (it, outcome) = best.expect("at least one start");
    let accepted = outcome == Outcome::Stalled && it.gap() <= tol.sqrt() * it.phi.abs().max(1.0);
    let cert = certificate(a, it, tol, iterations)?;
    if accepted {
        Ok(cert)
    } else {
        Err(Error::SaddleNoConvergence {
            iterations,
            best: Box::new(cert),
        })
    }
}

fn certificate(a: &Matrix, it: Iterate, tol: f64, iterations: usize) -> Result<SaddleCertificate> {
    let psi = scaled_rayleigh(a, &it.x, &it.y)?;
    let inner = inner_infimum(a, &it.x, INNER_TOL)?;
    let cw_interval = BoundInterval::from_witness(a, it.x.divide(&it.y)?)?;
    Ok(SaddleCertificate {
        method: SaddleMethod::Iterative,
        r_estimate: psi,
        gap: it.upper - psi,
        inner_gap: psi - inner.phi,
        x_hat: it.x,
        y_hat: it.y,
        objective_at_saddle: psi,
        cw_interval,
        tolerance: tol,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    fn assert_proportional(x: &PositiveVector, expected: &[f64], tol: f64) {
        let k = x[0] / expected[0];
        for (xi, ei) in x.as_slice().iter().zip(expected) {
            assert_abs_diff_eq!(*xi, k * ei, epsilon = tol);
        }
    }

    #[test]
    fn direct_two_by_two() {
        let a = m(&[&[0.0, 2.0], &[8.0, 0.0]]);
        let c = saddle_direct(&a, DEFAULT_DIRECT_TOL).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(c.x_hat[0], h, epsilon = 1e-10);
        assert_abs_diff_eq!(c.x_hat[1], h, epsilon = 1e-10);
        assert_proportional(&c.y_hat, &[0.5f64.sqrt(), 0.125f64.sqrt()], 1e-10);
        assert_abs_diff_eq!(c.r_estimate, 4.0, epsilon = 1e-10);
        assert!(c.inner_gap.abs() <= 1e-10);
        assert!(c.violations(&a).is_empty(), "{:?}", c.violations(&a));
    }

    #[test]
    fn direct_symmetric_has_unit_scaling() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (a, r) in [
            (m(&[&[1.0, 1.0], &[1.0, 1.0]]), 2.0),
            (m(&[&[0.0, 1.0], &[1.0, 0.0]]), 1.0),
        ] {
            let c = saddle_direct(&a, DEFAULT_DIRECT_TOL).unwrap();
            assert_abs_diff_eq!(c.r_estimate, r, epsilon = 1e-10);
            for i in 0..2 {
                assert_abs_diff_eq!(c.x_hat[i], h, epsilon = 1e-10);
                assert_abs_diff_eq!(c.y_hat[i], 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn iterative_small_examples() {
        let a = m(&[&[0.0, 2.0], &[8.0, 0.0]]);
        let c = saddle_iterative(&a, 1e-8).unwrap();
        assert_abs_diff_eq!(c.r_estimate, 4.0, epsilon = 1e-7);
        assert_proportional(&c.x_hat, &[1.0, 1.0], 1e-6);
        assert!(c.violations(&a).is_empty(), "{:?}", c.violations(&a));

        let c = saddle_iterative(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), 1e-8).unwrap();
        assert_abs_diff_eq!(c.r_estimate, 2.0, epsilon = 1e-7);

        let c = saddle_iterative(&m(&[&[3.0]]), 1e-8).unwrap();
        assert_eq!(c.r_estimate, 3.0);
        assert_eq!(c.iterations, 0);
    }

    #[test]
    fn iterative_three_by_three() {
        let a = m(&[&[1.0, 2.0, 0.0], &[0.0, 0.5, 3.0], &[4.0, 0.0, 0.2]]);
        let direct = saddle_direct(&a, DEFAULT_DIRECT_TOL).unwrap();
        let iter = saddle_iterative(&a, DEFAULT_ITERATIVE_TOL).unwrap();
        assert_abs_diff_eq!(iter.r_estimate, direct.r_estimate, epsilon = 1e-7);
        // x̂ is unique up to scale and both are unit length.
        for i in 0..3 {
            assert_abs_diff_eq!(iter.x_hat[i], direct.x_hat[i], epsilon = 1e-4);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let a = m(&[
            &[0.5, 2.0, 0.0, 1.0],
            &[0.0, 0.0, 3.0, 0.0],
            &[1.0, 0.0, 0.0, 2.0],
            &[0.0, 4.0, 0.0, 1.0],
        ]);
        let x = PositiveVector::new(vec![0.3, 1.1, 0.7, 2.0]).unwrap();
        let inner = inner_infimum(&a, &x, INNER_TOL).unwrap();
        let g = phi_gradient(&a, &x, &inner.y_star, inner.phi).unwrap();
        let h = 1e-6;
        for i in 0..4 {
            let bump = |s: f64| {
                let mut v = x.as_slice().to_vec();
                v[i] *= (s * h).exp();
                inner_infimum(&a, &PositiveVector::new(v).unwrap(), INNER_TOL)
                    .unwrap()
                    .phi
            };
            let fd = (bump(1.0) - bump(-1.0)) / (2.0 * h);
            assert_abs_diff_eq!(g[i], fd, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(g.iter().sum::<f64>(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_reducible() {
        let a = m(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(matches!(saddle_iterative(&a, 1e-8), Err(Error::NotIrreducible)));
        assert!(matches!(saddle_direct(&a, 1e-8), Err(Error::NotIrreducible)));
    }
}
