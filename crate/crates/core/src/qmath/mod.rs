//! Dense complex linear algebra and information measures for the small
//! (dimension ≤ 8) matrices that appear in the security analysis.

mod eigen;
mod info;
mod matrix;

pub use eigen::{eigenvalues, hermitian_eigen, Eigen, MAX_SWEEPS, OFF_DIAGONAL_TOL};
pub use info::{
    binary_entropy, entropy_of_spectrum, mutual_information, von_neumann_entropy, JointDistribution, CLIP_WINDOW,
    DISTRIBUTION_TOL,
};
pub use matrix::{Complex, ComplexMatrix, DensityMatrix, StateVector, HERMITIAN_TOL, NORM_TOL, PSD_TOL, TRACE_TOL};

pub(crate) use matrix::{c, inner};

use crate::error::Result;

/// Sorted (descending) eigenvalues of a density matrix.
pub fn hermitian_eigenvalues(m: &DensityMatrix) -> Result<Vec<f64>> {
    eigenvalues(m.matrix())
}
