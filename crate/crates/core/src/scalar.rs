//! Real scalar abstraction shared by the linear algebra, potentials and learners.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type usable as the real part of matrix entries: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute tolerance on `|a_ij - conj(a_ji)|` accepted when constructing a Hermitian matrix.
    const HERMITIAN_TOL: f64;
    /// Relative off-diagonal mass at which the Jacobi sweeps stop.
    const JACOBI_TOL: f64;
    /// Slack on the smallest eigenvalue and the trace of a density matrix.
    const DENSITY_TOL: f64;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const HERMITIAN_TOL: f64 = 1e-12;
    const JACOBI_TOL: f64 = 1e-13;
    const DENSITY_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const HERMITIAN_TOL: f64 = 1e-5;
    const JACOBI_TOL: f64 = 1e-6;
    const DENSITY_TOL: f64 = 1e-4;
}

/// `max(1, |a|, |b|)`, the scale used by relative-with-floor tolerances.
pub fn unit_scale<T: Real>(a: T, b: T) -> T {
    T::one().max(a.abs()).max(b.abs())
}
