//! Line-sum balancing by diagonal similarity.
//!
//! For a nonnegative `M` with irreducible support, `f(z) = zᵀ M z⁻¹ =
//! Σ_ij M_ij z_i / z_j` has a minimizer, unique up to scale, and the
//! minimizer is exactly the scaling that makes `D_z M D_z⁻¹` line-sum
//! symmetric (row sums equal column sums). The scheme here is cyclic
//! coordinate minimization: for fixed other coordinates, `f` is
//! `z_i · out_i + in_i / z_i`, minimized at `z_i ← z_i · √(in_i / out_i)`
//! in terms of the currently scaled matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{check_dim, Matrix, PositiveVector};
use crate::perron::PerronPair;

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct BalanceResult {
    /// Scaling normalized so that `z_1 = 1`.
    pub z: PositiveVector,
    /// `D_z M D_z⁻¹`.
    pub balanced: Matrix,
    /// `‖balanced·e − balancedᵀ·e‖∞`.
    pub residual: f64,
    /// `zᵀ M z⁻¹`, the entry sum of `balanced`.
    pub objective: f64,
    /// Full sweeps performed.
    pub iterations: usize,
}

/// `‖Me − Mᵀe‖∞`.
pub fn line_sum_residual(m: &Matrix) -> f64 {
    m.row_sums()
        .into_iter()
        .zip(m.col_sums())
        .map(|(r, c)| (r - c).abs())
        .fold(0.0, f64::max)
}

/// Sweep budget `200 · n · ⌈log10(1/tol)⌉`.
fn sweep_budget(n: usize, tol: f64) -> usize {
    let digits = (1.0 / tol).log10().ceil().max(1.0) as usize;
    200 * n * digits
}

/// Scales `m` to line-sum symmetry within `tol · (1 + objective)`.
pub fn balance(m: &Matrix, tol: f64) -> Result<BalanceResult> {
    balance_from(m, &PositiveVector::ones(m.dim()), tol)
}

/// As [`balance`], starting the sweeps from the scaling `z0`.
pub fn balance_from(m: &Matrix, z0: &PositiveVector, tol: f64) -> Result<BalanceResult> {
    let class = m.classify();
    if !class.nonnegative {
        return Err(Error::NotNonnegative);
    }
    if !class.irreducible {
        return Err(Error::NotIrreducible);
    }
    check_dim(m.dim(), z0.dim())?;
    assert!(tol > 0.0, "tolerance must be positive");

    let n = m.dim();
    let mut z = z0.as_slice().to_vec();
    let mut b = m.diag_similarity(z0)?.data().to_vec();
    let budget = sweep_budget(n, tol);

    let mut sweeps = 0;
    loop {
        let (residual, objective) = line_sums(&b, n);
        if residual <= tol * (1.0 + objective) {
            break;
        }
        if sweeps == budget {
            return Err(Error::NoConvergence {
                what: "line-sum balancing",
                iterations: budget,
            });
        }
        for i in 0..n {
            let mut out = 0.0;
            let mut inflow = 0.0;
            for j in 0..n {
                if j != i {
                    out += b[i * n + j];
                    inflow += b[j * n + i];
                }
            }
            let alpha = (inflow / out).sqrt();
            z[i] *= alpha;
            for j in 0..n {
                if j != i {
                    b[i * n + j] *= alpha;
                    b[j * n + i] /= alpha;
                }
            }
        }
        sweeps += 1;
    }

    let z1 = z[0];
    let z = PositiveVector::new(z.into_iter().map(|v| v / z1).collect())?;
    let balanced = m.diag_similarity(&z)?;
    Ok(BalanceResult {
        residual: line_sum_residual(&balanced),
        objective: balanced.total(),
        z,
        balanced,
        iterations: sweeps,
    })
}

fn line_sums(b: &[f64], n: usize) -> (f64, f64) {
    let mut residual: f64 = 0.0;
    let mut total = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        let mut col = 0.0;
        for j in 0..n {
            row += b[i * n + j];
            col += b[j * n + i];
        }
        total += row;
        residual = residual.max((row - col).abs());
    }
    (residual, total)
}

/// `√(u / v)` for a Perron pair: the scaling whose similarity gives the
/// matrix identical left and right Perron vectors `√(u ∘ v)`.
pub fn symmetrizing_scaling(pp: &PerronPair) -> Result<PositiveVector> {
    Ok(pp.u.divide(&pp.v)?.sqrt())
}

/// `D_ŷ A D_ŷ⁻¹` with `ŷ = √(u / v)`.
pub fn symmetrizer(a: &Matrix, pp: &PerronPair) -> Result<Matrix> {
    check_dim(a.dim(), pp.u.dim())?;
    a.diag_similarity(&symmetrizing_scaling(pp)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perron::{perron_pair, DEFAULT_TOL as PERRON_TOL};
    use approx::assert_abs_diff_eq;

    fn m(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn residual_examples() {
        assert_eq!(line_sum_residual(&m(&[&[0.0, 4.0], &[4.0, 0.0]])), 0.0);
        assert_eq!(line_sum_residual(&m(&[&[0.0, 2.0], &[8.0, 0.0]])), 6.0);
        assert_eq!(line_sum_residual(&m(&[&[5.0]])), 0.0);
    }

    #[test]
    fn balance_two_by_two() {
        let res = balance(&m(&[&[0.0, 2.0], &[8.0, 0.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(res.z[0], 1.0);
        assert_abs_diff_eq!(res.z[1], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(res.objective, 8.0, epsilon = 1e-11);
        assert_abs_diff_eq!(res.balanced.get(0, 1), 4.0, epsilon = 1e-11);
        assert_abs_diff_eq!(res.balanced.get(1, 0), 4.0, epsilon = 1e-11);
    }

    #[test]
    fn already_balanced_needs_no_sweep() {
        for a in [m(&[&[0.0, 4.0], &[4.0, 0.0]]), m(&[&[1.0, 1.0], &[1.0, 1.0]])] {
            let res = balance(&a, DEFAULT_TOL).unwrap();
            assert_eq!(res.iterations, 0);
            assert_eq!(res.z.as_slice(), &[1.0, 1.0]);
            assert_eq!(res.balanced, a);
        }
        assert_eq!(
            balance(&m(&[&[1.0, 1.0], &[1.0, 1.0]]), DEFAULT_TOL).unwrap().objective,
            4.0
        );
    }

    #[test]
    fn one_by_one_and_errors() {
        let res = balance(&m(&[&[7.0]]), DEFAULT_TOL).unwrap();
        assert_eq!(res.objective, 7.0);
        assert!(matches!(
            balance(&m(&[&[1.0, 0.0], &[3.0, 1.0]]), DEFAULT_TOL),
            Err(Error::NotIrreducible)
        ));
        assert!(matches!(
            balance(&m(&[&[0.0, -1.0], &[3.0, 0.0]]), DEFAULT_TOL),
            Err(Error::NotNonnegative)
        ));
    }

    #[test]
    fn three_cycle_balances_to_geometric_mean() {
        // A weighted 3-cycle balances to the constant geometric mean weight.
        let a = m(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 8.0], &[27.0, 0.0, 0.0]]);
        let res = balance(&a, DEFAULT_TOL).unwrap();
        let g = (1.0f64 * 8.0 * 27.0).cbrt();
        for (i, j) in [(0, 1), (1, 2), (2, 0)] {
            assert_abs_diff_eq!(res.balanced.get(i, j), g, epsilon = 1e-10);
        }
        assert!(res.residual <= DEFAULT_TOL * (1.0 + res.objective));
    }

    #[test]
    fn symmetrizer_examples() {
        let a = m(&[&[0.0, 2.0], &[8.0, 0.0]]);
        let pp = perron_pair(&a, PERRON_TOL).unwrap();
        let b = symmetrizer(&a, &pp).unwrap();
        assert_abs_diff_eq!(b.get(0, 1), 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(b.get(1, 0), 4.0, epsilon = 1e-10);

        let s = m(&[&[1.0, 3.0], &[3.0, 2.0]]);
        let pp = perron_pair(&s, PERRON_TOL).unwrap();
        let b = symmetrizer(&s, &pp).unwrap();
        for (x, y) in b.data().iter().zip(s.data()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-10);
        }
        assert!(line_sum_residual(&b) <= 1e-12 * 9.0);

        let one = m(&[&[3.0]]);
        let pp = perron_pair(&one, PERRON_TOL).unwrap();
        assert_eq!(symmetrizer(&one, &pp).unwrap(), one);
        assert!(symmetrizer(&a, &perron_pair(&one, PERRON_TOL).unwrap()).is_err());
    }
}
