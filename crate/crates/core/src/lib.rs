//! Spectral radius of nonnegative irreducible matrices, and spectral bound of
//! Metzler matrices, through four variational formulas: Collatz–Wielandt,
//! Donsker–Varadhan–Friedland, Fiedler, and the diagonally scaled Rayleigh
//! quotient `r(A) = sup_x inf_y xᵀ D_y A D_y⁻¹ x / xᵀx`.
//!
//! Every solver returns data that can be re-checked independently: Perron
//! pairs with residuals, Collatz–Wielandt intervals with their witness
//! vector, balanced matrices, and saddle certificates.

pub mod balancing;
pub mod cli;
pub mod error;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod perron;
pub mod report;
pub mod variational;

pub use error::{Error, Result};
pub use matrix::{Matrix, MatrixClass, PositiveVector};
