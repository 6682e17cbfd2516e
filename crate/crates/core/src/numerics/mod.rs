//! Small dense linear-algebra kernels and a derivative-free minimizer.
//!
//! Everything here works on matrices of at most a few dozen entries, so the
//! algorithms favour accuracy over asymptotic speed: cyclic Jacobi for
//! symmetric eigenproblems, one-sided Jacobi for least squares, and an
//! adaptive Nelder-Mead simplex for minimization.

mod eigen;
mod levmar;
mod lstsq;
mod simplex;
mod svd;

pub use eigen::{min_eigvec, sym_eig, SymmetricEigenResult};
pub use levmar::{least_squares, LeastSquaresMinimum, LeastSquaresOptions};
pub use lstsq::{lstsq, singular_values};
pub use simplex::{minimize, Minimum, MinimizeOptions};
pub use svd::{svd3, Svd3Result};

use thiserror::Error;

/// Dynamically sized dense matrix used by the kernels.
pub type MatrixNM = nalgebra::DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("matrix is not symmetric (asymmetry {asymmetry:e} relative to scale {scale:e})")]
    NonSymmetric { asymmetry: f64, scale: f64 },
    #[error("iteration did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("matrix is rank deficient (smallest/largest singular value = {ratio:e})")]
    RankDeficient { ratio: f64 },
    #[error("objective returned a non-finite value")]
    NonFiniteObjective,
    #[error("input contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub(crate) fn check_finite(m: &MatrixNM) -> Result<(), NumericsError> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(NumericsError::NonFinite)
    }
}
