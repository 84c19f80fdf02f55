//! Dense square matrices, strictly positive vectors and the structural
//! classification (nonnegative, Metzler, irreducible) every solver checks.
//!
//! Storage is row-major: `data[i * n + j]` holds entry `(i, j)`. Entries are
//! always finite; a value is structurally zero iff it equals `0.0` exactly.

use serde::ser::{Serialize, SerializeSeq, Serializer};

use crate::error::{Error, Result};

/// Dense real `n x n` matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Builds a matrix from row-major data.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / n, col: k % n });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::NonSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(n, data)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, vec![0.0; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.n)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Matrix { n, data }
    }

    /// `A + shift * I`.
    pub fn shifted(&self, shift: f64) -> Result<Matrix> {
        let mut data = self.data.clone();
        for i in 0..self.n {
            data[i * self.n + i] += shift;
        }
        Matrix::new(self.n, data)
    }

    /// `A x` for a plain slice.
    pub fn mul_slice(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        self.rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᵀ A` for a plain slice.
    pub fn mul_slice_left(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut out = vec![0.0; self.n];
        for (xi, row) in x.iter().zip(self.rows()) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += xi * a;
            }
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows().map(|row| row.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for row in self.rows() {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a;
            }
        }
        out
    }

    pub fn total(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.rows()
            .map(|row| row.iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Structural classification of the matrix.
    pub fn classify(&self) -> MatrixClass {
        let n = self.n;
        let nonnegative = self.data.iter().all(|&a| a >= 0.0);
        let metzler = (0..n).all(|i| (0..n).all(|j| i == j || self.get(i, j) >= 0.0));
        MatrixClass {
            nonnegative,
            metzler,
            irreducible: self.is_irreducible(),
        }
    }

    /// Strong connectivity of the off-diagonal support graph (edge `i -> j`
    /// iff `A_ij != 0`, `i != j`). A 1 x 1 matrix is irreducible.
    #[allow(clippy::needless_range_loop)]
    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        let reach_all = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0usize];
            seen[0] = true;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let a = if forward { self.get(i, j) } else { self.get(j, i) };
                    if j != i && a != 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach_all(true) && reach_all(false)
    }

    /// Diagonal similarity scaling `D_y A D_y⁻¹`, i.e. `B_ij = y_i A_ij / y_j`.
    pub fn diag_similarity(&self, y: &PositiveVector) -> Result<Matrix> {
        check_dim(self.n, y.dim())?;
        let y = y.as_slice();
        let n = self.n;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    data[i * n + j] = y[i] * data[i * n + j] / y[j];
                }
            }
        }
        Matrix::new(n, data)
    }

    /// Two-sided diagonal scaling `D_l A D_r`, i.e. `B_ij = l_i A_ij r_j`.
    pub fn diag_scale(&self, left: &PositiveVector, right: &PositiveVector) -> Result<Matrix> {
        check_dim(self.n, left.dim())?;
        check_dim(self.n, right.dim())?;
        let (l, r) = (left.as_slice(), right.as_slice());
        let n = self.n;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = l[i] * data[i * n + j] * r[j];
            }
        }
        Matrix::new(n, data)
    }
}

/// Free-function form of [`Matrix::classify`].
pub fn classify(a: &Matrix) -> MatrixClass {
    a.classify()
}

/// Free-function form of [`Matrix::diag_similarity`].
pub fn apply_diag_similarity(a: &Matrix, y: &PositiveVector) -> Result<Matrix> {
    a.diag_similarity(y)
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.n))?;
        for row in self.rows() {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

/// Structural flags of a matrix. `nonnegative` implies `metzler`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct MatrixClass {
    pub nonnegative: bool,
    pub metzler: bool,
    pub irreducible: bool,
}

impl MatrixClass {
    /// Precondition of the Perron-root solvers.
    pub fn require_nonnegative_irreducible(&self) -> Result<()> {
        if !self.nonnegative {
            return Err(Error::NotNonnegative);
        }
        if !self.irreducible {
            return Err(Error::NotIrreducible);
        }
        Ok(())
    }

    /// Precondition of the spectral-bound solver.
    pub fn require_metzler_irreducible(&self) -> Result<()> {
        if !self.metzler {
            return Err(Error::NotMetzler);
        }
        if !self.irreducible {
            return Err(Error::NotIrreducible);
        }
        Ok(())
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// A vector whose entries are all finite and strictly positive.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(transparent)]
pub struct PositiveVector(Vec<f64>);

impl PositiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::NotPositive { index, value });
        }
        Ok(Self(values))
    }

    /// The all-ones vector `e`.
    pub fn ones(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        Self(vec![1.0; n])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn dot(&self, other: &PositiveVector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    pub fn norm2(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Hadamard product `x ∘ y`.
    pub fn hadamard(&self, other: &PositiveVector) -> Result<PositiveVector> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Elementwise quotient `x / y`.
    pub fn divide(&self, other: &PositiveVector) -> Result<PositiveVector> {
        self.zip_with(other, |a, b| a / b)
    }

    /// Elementwise inverse `x⁻¹`.
    pub fn inverse(&self) -> PositiveVector {
        self.map(|a| 1.0 / a)
    }

    pub fn sqrt(&self) -> PositiveVector {
        self.map(f64::sqrt)
    }

    pub fn scale(&self, factor: f64) -> Result<PositiveVector> {
        PositiveVector::new(self.0.iter().map(|a| a * factor).collect())
    }

    /// Rescaled to unit Euclidean length.
    pub fn normalized(&self) -> PositiveVector {
        let norm = self.norm2();
        self.map(|a| a / norm)
    }

    /// `A x`.
    pub fn apply(&self, a: &Matrix) -> Result<Vec<f64>> {
        check_dim(a.dim(), self.dim())?;
        Ok(a.mul_slice(&self.0))
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> PositiveVector {
        // Results of operations on positive values can still underflow or
        // overflow; those are reported rather than silently stored.
        PositiveVector::new(self.0.iter().map(|&a| f(a)).collect()).expect("elementwise map left the positive orthant")
    }

    fn zip_with(&self, other: &PositiveVector, f: impl Fn(f64, f64) -> f64) -> Result<PositiveVector> {
        check_dim(self.dim(), other.dim())?;
        PositiveVector::new(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }
}

impl TryFrom<Vec<f64>> for PositiveVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        PositiveVector::new(values)
    }
}

impl std::ops::Index<usize> for PositiveVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// `x ∘ y`.
pub fn hadamard(x: &PositiveVector, y: &PositiveVector) -> Result<PositiveVector> {
    x.hadamard(y)
}
