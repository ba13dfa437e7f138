//! Online learners on the spectraplex: the potential-method learner with its
//! reduction, and matrix multiplicative weights.

pub mod invariants;
pub mod lea;
pub mod mmwu;
pub mod reduction;
pub mod regret;
pub mod unconstrained;

pub use invariants::{InvariantMonitor, InvariantReport, InvariantTolerances};
pub use lea::LeaLearner;
pub use mmwu::{LearningRate, MmwuLearner};
pub use reduction::{reduce_predict, surrogate, surrogate_loss, ReductionContext, Surrogate, FALLBACK_FLOOR};
pub use regret::{format_f64, Comparator, RegretRecord, RegretTrace, RegretTracker, CSV_HEADER};
pub use unconstrained::{UnconstrainedLearner, LOSS_NORM_SLACK};

use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian};
use crate::scalar::Real;

/// Predict-then-observe protocol shared by all learners.
pub trait MatrixLearner<T: Real> {
    fn dim(&self) -> usize;

    /// Index of the round about to be played, starting at 1.
    fn round(&self) -> u64;

    /// Declared bound `l` on `‖G_t‖_op`.
    fn loss_bound(&self) -> T;

    /// `X_t`. Repeated calls within a round return the same state.
    fn predict(&mut self) -> Result<Density<T>>;

    fn observe(&mut self, g: &Hermitian<T>) -> Result<()>;

    fn step(&mut self, g: &Hermitian<T>) -> Result<Density<T>> {
        let x = self.predict()?;
        self.observe(g)?;
        Ok(x)
    }
}

/// Checks the dimension and `‖G‖_op ≤ l + slack`, returning `‖G‖_op`.
pub(crate) fn check_loss<T: Real>(g: &Hermitian<T>, dim: usize, l: T) -> Result<T> {
    if g.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: g.dim() });
    }
    let norm = g.op_norm()?;
    if !(norm <= l + T::lit(LOSS_NORM_SLACK) * l.max(T::one())) {
        return Err(Error::LossBound { norm: norm.to_f64_lossy(), bound: l.to_f64_lossy() });
    }
    Ok(norm)
}
