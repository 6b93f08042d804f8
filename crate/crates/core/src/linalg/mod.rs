//! Dense symmetric linear algebra: eigenvalues, SPD inversion, principal
//! submatrices and eigenvalue interlacing.

mod cholesky;
mod eigen;
mod interlacing;
mod matrix;
mod subset;
mod symmetric;

pub use cholesky::{invert_spd, Cholesky};
pub use eigen::{
    eigenvalues_symmetric, jacobi_eigen, spectral_radius_of_inverse, EigenDecomposition,
    SpectralSummary, JACOBI_MAX_SWEEPS, JACOBI_TOLERANCE,
};
pub use interlacing::{check_interlacing, InterlacingReport};
pub use matrix::{dot, max_abs, norm2, Matrix};
pub use subset::{principal_submatrix, ColumnSubset};
pub use symmetric::{SymmetricMatrix, SYMMETRY_TOLERANCE};

/// A symmetric matrix is treated as singular when its smallest eigenvalue
/// (or Cholesky pivot) is at or below this fraction of its scale.
pub const RANK_TOLERANCE: f64 = 1e-10;
