//! Dense linear algebra, matrix exponential, Riccati solver and seeded random streams.

mod eigen;
mod expm;
mod matrix;
mod riccati;
mod rng;

pub use eigen::{char_poly, eigenvalues, poly_roots, spectral_radius};
pub use expm::mat_exp;
pub use matrix::Matrix;
pub use riccati::{dare_residual, riccati_map, solve_dare, DARE_MAX_ITERATIONS, DARE_TOLERANCE};
pub use rng::{rng_stream, RngStream};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{op}: dimension mismatch {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("expected a square matrix, got {0:?}")]
    NotSquare((usize, usize)),
    #[error("{0}: non-finite entries")]
    NonFinite(&'static str),
    #[error("rows have unequal lengths")]
    Ragged,
    #[error("matrix is not positive semidefinite")]
    NotPositiveSemidefinite,
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("Riccati iteration diverged after {iterations} iterations")]
    RiccatiDivergence { iterations: usize },
}
