//! Dense complex linear algebra: Hermitian eigendecomposition, spectral matrix
//! functions, singular values, trace norm and fidelity.

mod eig;
mod functions;
mod matrix;

pub use eig::{eig_hermitian, EigenDecomposition};
pub use functions::{
    density_eig, fidelity, matrix_function, singular_values, trace_norm, MatrixFunction,
    PSD_CLAMP_TOL, TRACE_TOL,
};
pub use matrix::{ComplexMatrix, HermitianOperator, HERMITIAN_TOL, UNITARY_TOL};
pub use num_complex::Complex64;
