//! Matrix online learning on the spectraplex.

pub mod adversaries;
pub mod error;
pub mod inequality;
pub mod learners;
pub mod linalg;
pub mod potentials;
pub mod quantum;
pub mod rng;
pub mod scalar;
pub mod special;

pub use error::{Error, Result};
pub use scalar::Real;

pub use num_complex::Complex;

pub type C64 = Complex<f64>;
pub type HermitianMatrix = linalg::Hermitian<f64>;
pub type DensityMatrix = linalg::Density<f64>;
pub type EigenDecomposition = linalg::EigenDecomposition<f64>;
