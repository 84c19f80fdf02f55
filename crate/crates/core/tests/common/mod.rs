//! Seeded instance families shared by the integration and acceptance tests.
#![allow(dead_code)]

use perron_saddle::oracle::{derive_seed, gen_instance, InstanceSpec};
use perron_saddle::{Matrix, PositiveVector};
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub const BASE_SEED: u64 = 0x5eed_2024;
const DENSITIES: [f64; 3] = [0.2, 0.5, 0.9];

/// Instance `k` of the standard family: `n = lo + k mod (hi − lo + 1)`.
pub fn spec(k: u64, lo: usize, hi: usize) -> InstanceSpec {
    let n = lo + (k as usize) % (hi - lo + 1);
    InstanceSpec::new(n, DENSITIES[(k % 3) as usize], derive_seed(BASE_SEED, k))
}

pub fn instance(k: u64, lo: usize, hi: usize) -> Matrix {
    gen_instance(&spec(k, lo, hi)).unwrap()
}

/// `n ∈ {2..8}`.
pub fn standard(k: u64) -> Matrix {
    instance(k, 2, 8)
}

pub fn metzler(k: u64) -> Matrix {
    gen_instance(&spec(k, 2, 8).with_metzler_diag(-5.0, 2.0)).unwrap()
}

/// `A + Aᵀ` for an irreducible nonnegative `A`.
pub fn symmetric(k: u64) -> Matrix {
    let a = standard(k);
    let n = a.dim();
    let data = (0..n * n)
        .map(|idx| a.get(idx / n, idx % n) + a.get(idx % n, idx / n))
        .collect();
    Matrix::new(n, data).unwrap()
}

pub struct Rng(SplitMix64);

impl Rng {
    pub fn new(stream: u64) -> Self {
        Rng(SplitMix64::seed_from_u64(derive_seed(BASE_SEED ^ 0xabcd, stream)))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Log-uniform on `[lo, hi]`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * self.unit()).exp()
    }

    pub fn positive(&mut self, n: usize, lo: f64, hi: f64) -> PositiveVector {
        PositiveVector::new((0..n).map(|_| self.log_uniform(lo, hi)).collect()).unwrap()
    }
}

pub fn rel_err(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)
}
