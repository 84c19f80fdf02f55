//! Ground truth for verification, and seeded random test instances.
//!
//! The oracle depends on [`crate::matrix`] only. For `n <= 2` it evaluates
//! the closed-form root of the characteristic polynomial. For `n >= 3` it
//! starts from the Collatz–Wielandt bracket at a few shifted power iterates
//! and bisects on `λ` with an M-matrix test: for nonnegative irreducible
//! `A`, `λ > r(A)` iff every pivot of the unpivoted LU factorization of
//! `λI − A` is positive.
//!
//! # Instance generator
//!
//! [`gen_instance`] draws from SplitMix64 seeded with `spec.seed` (state =
//! seed, first output for seed 0 is `0xE220A8397B1DCDAF`). A uniform draw on
//! `[lo, hi)` is `lo + (hi − lo) · (next_u64() >> 11) · 2⁻⁵³`. Draws happen
//! in this order:
//!
//! 1. Fisher–Yates permutation `π` of `0..n`: for `i = n−1` down to `1`,
//!    `j = next_u64() % (i + 1)`, swap `π[i]` and `π[j]`.
//! 2. Planted cycle: for `k = 0..n`, entry `(π[k], π[(k+1) % n])` gets a
//!    uniform draw from `entry_range` (for `n = 1` this is the single entry).
//! 3. Sprinkling: for every other `(i, j)` in row-major order, including the
//!    diagonal, one uniform `[0, 1)` draw `t`; if `t < density` the entry gets
//!    a second draw from `entry_range`.
//! 4. If `metzler_diag_range` is set, every diagonal entry `i = 0..n` is
//!    replaced by a draw from that range.
//!
//! [`derive_seed`] splits one base seed into independent per-instance seeds.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{Matrix, PositiveVector};

pub const DEFAULT_EPS: f64 = 1e-12;
const MAX_BISECTIONS: usize = 400;

/// A certified enclosure `lo <= r(A) <= hi` produced by the oracle.
#[derive(Debug, Clone, Serialize)]
pub struct OracleBracket {
    pub lo: f64,
    pub hi: f64,
    /// The vector whose Collatz–Wielandt ratios seeded the bracket.
    pub witness: PositiveVector,
    pub bisections: usize,
}

impl OracleBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

fn precondition(a: &Matrix) -> Result<()> {
    if a.data().iter().any(|&v| v < 0.0) {
        return Err(Error::NotNonnegative);
    }
    if !a.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    Ok(())
}

fn ratio_bounds(a: &Matrix, x: &[f64]) -> (f64, f64) {
    a.mul_slice(x)
        .iter()
        .zip(x)
        .map(|(p, q)| p / q)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| (lo.min(t), hi.max(t)))
}

/// True iff `λI − A` is a nonsingular M-matrix, i.e. `λ > r(A)`.
fn exceeds_radius(a: &Matrix, lambda: f64) -> bool {
    let n = a.dim();
    let mut w: Vec<f64> = a.data().iter().map(|v| -v).collect();
    for i in 0..n {
        w[i * n + i] += lambda;
    }
    for k in 0..n {
        let pivot = w[k * n + k];
        if pivot.is_nan() || pivot <= 0.0 {
            return false;
        }
        for i in k + 1..n {
            let f = w[i * n + k] / pivot;
            if f == 0.0 {
                continue;
            }
            for j in k + 1..n {
                w[i * n + j] -= f * w[k * n + j];
            }
        }
    }
    true
}

fn closed_form(a: &Matrix) -> (f64, Vec<f64>) {
    if a.dim() == 1 {
        return (a.get(0, 0), vec![1.0]);
    }
    let (p, q, s, t) = (a.get(0, 0), a.get(0, 1), a.get(1, 0), a.get(1, 1));
    let half_diff = 0.5 * (t - p);
    let root = (half_diff * half_diff + q * s).sqrt();
    let lambda = 0.5 * (p + t) + root;
    // Right eigenvector (q, λ − p), with λ − p = (t − p)/2 + root > 0.
    (lambda, vec![q, half_diff + root])
}

/// Certified bracket around `r(A)` of width at most `eps · max(1, |r|)`.
pub fn oracle_bracket(a: &Matrix, eps: f64) -> Result<OracleBracket> {
    precondition(a)?;
    assert!(eps > 0.0, "eps must be positive");
    let n = a.dim();
    if n <= 2 {
        let (r, w) = closed_form(a);
        return Ok(OracleBracket {
            lo: r,
            hi: r,
            witness: PositiveVector::new(w)?,
            bisections: 0,
        });
    }

    let shift = 1.0 + a.diagonal().into_iter().fold(f64::NEG_INFINITY, f64::max);
    let mut x = vec![1.0; n];
    for _ in 0..10 * n {
        let ax = a.mul_slice(&x);
        for (xi, axi) in x.iter_mut().zip(ax) {
            *xi = axi + shift * *xi;
        }
        let m = x.iter().copied().fold(0.0, f64::max);
        x.iter_mut().for_each(|v| *v /= m);
    }
    let (mut lo, mut hi) = ratio_bounds(a, &x);
    let witness = PositiveVector::new(x)?;

    let mut bisections = 0;
    while hi - lo > eps * hi.abs().max(1.0) {
        if bisections == MAX_BISECTIONS {
            return Err(Error::NoConvergence {
                what: "oracle bisection",
                iterations: bisections,
            });
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if exceeds_radius(a, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        bisections += 1;
    }
    Ok(OracleBracket {
        lo,
        hi,
        witness,
        bisections,
    })
}

/// Reference spectral radius of a nonnegative irreducible matrix.
pub fn oracle_spectral_radius(a: &Matrix, eps: f64) -> Result<f64> {
    Ok(oracle_bracket(a, eps)?.midpoint())
}

/// Reference spectral bound of an irreducible Metzler matrix, via
/// `s(A) = r(A − tI) + t`, `t = min_i A_ii`.
pub fn oracle_spectral_bound(a: &Matrix, eps: f64) -> Result<f64> {
    let n = a.dim();
    if (0..n).any(|i| (0..n).any(|j| i != j && a.get(i, j) < 0.0)) {
        return Err(Error::NotMetzler);
    }
    let t = a.diagonal().into_iter().fold(f64::INFINITY, f64::min);
    let mut data = a.data().to_vec();
    for i in 0..n {
        data[i * n + i] -= t;
    }
    Ok(oracle_spectral_radius(&Matrix::new(n, data)?, eps)? + t)
}

/// Parameters of a random irreducible instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub n: usize,
    /// Probability that an entry outside the planted cycle is nonzero.
    #[serde(default = "default_density")]
    pub density: f64,
    #[serde(default = "default_entry_range")]
    pub entry_range: (f64, f64),
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metzler_diag_range: Option<(f64, f64)>,
}

fn default_density() -> f64 {
    0.5
}

fn default_entry_range() -> (f64, f64) {
    (0.1, 10.0)
}

impl InstanceSpec {
    pub fn new(n: usize, density: f64, seed: u64) -> Self {
        Self {
            n,
            density,
            entry_range: default_entry_range(),
            seed,
            metzler_diag_range: None,
        }
    }

    pub fn with_entry_range(mut self, lo: f64, hi: f64) -> Self {
        self.entry_range = (lo, hi);
        self
    }

    pub fn with_metzler_diag(mut self, lo: f64, hi: f64) -> Self {
        self.metzler_diag_range = Some((lo, hi));
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInstance(msg.to_string()));
        if self.n == 0 {
            return bad("n must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.density) {
            return bad("density must lie in [0, 1]");
        }
        let (lo, hi) = self.entry_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return bad("entry_range must satisfy 0 < lo <= hi");
        }
        if let Some((lo, hi)) = self.metzler_diag_range {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return bad("metzler_diag_range must satisfy lo <= hi");
            }
        }
        Ok(())
    }
}

/// Per-instance seed `k` derived from `base`: the first SplitMix64 output
/// for state `base ^ (k · 0x9E3779B97F4A7C15)`.
pub fn derive_seed(base: u64, k: u64) -> u64 {
    splitmix(base ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)).next_u64()
}

fn splitmix(seed: u64) -> SplitMix64 {
    SplitMix64::from_seed(seed.to_le_bytes())
}

fn unit(rng: &mut SplitMix64) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform(rng: &mut SplitMix64, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * unit(rng)
}

/// Deterministic random nonnegative irreducible (or Metzler) matrix.
pub fn gen_instance(spec: &InstanceSpec) -> Result<Matrix> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = splitmix(spec.seed);

    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = (rng.next_u64() % (i as u64 + 1)) as usize;
        perm.swap(i, j);
    }

    let mut data = vec![0.0; n * n];
    let mut planted = vec![false; n * n];
    for k in 0..n {
        let idx = perm[k] * n + perm[(k + 1) % n];
        data[idx] = uniform(&mut rng, spec.entry_range);
        planted[idx] = true;
    }
    for idx in 0..n * n {
        if planted[idx] {
            continue;
        }
        if unit(&mut rng) < spec.density {
            data[idx] = uniform(&mut rng, spec.entry_range);
        }
    }
    if let Some(range) = spec.metzler_diag_range {
        for i in 0..n {
            data[i * n + i] = uniform(&mut rng, range);
        }
    }
    Matrix::new(n, data)
}
