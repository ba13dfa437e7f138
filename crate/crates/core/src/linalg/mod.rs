//! Dense complex Hermitian linear algebra.

mod density;
mod eigen;
mod hermitian;
mod matrix;

pub use density::{gibbs, matrix_exp_normalized, Density, ENTROPY_FLOOR};
pub use eigen::{ascending_order, eig_with, eigenvalues_only, jacobi, tridiagonal_ql, EigenDecomposition, EigenMethod, AUTO_JACOBI_MAX_DIM};
pub use hermitian::{Hermitian, Norms};
pub use matrix::CMatrix;
