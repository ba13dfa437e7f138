use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{matrix_exp_normalized, Density, Hermitian};
use crate::scalar::Real;

use super::{check_loss, MatrixLearner};

/// Step size schedule for matrix multiplicative weights.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "schedule", rename_all = "snake_case")]
pub enum LearningRate<T> {
    /// `η_t = √(log d / t)`.
    Minimax,
    /// `η_t = √(S / t)` for a known relative entropy `S` of the comparator.
    Oracle { s_rel: T },
    Fixed { eta: T },
}

/// `X_t ∝ exp(−(η_t / l) Σ_{i<t} G_i)`.
#[derive(Clone, Debug)]
pub struct MmwuLearner<T: Real> {
    cumulative: Hermitian<T>,
    t: u64,
    l: T,
    rate: LearningRate<T>,
    cached: Option<Density<T>>,
}

impl<T: Real> MmwuLearner<T> {
    pub fn new(l: T, dim: usize, rate: LearningRate<T>) -> Result<Self> {
        if !(l > T::zero()) {
            return Err(Error::Domain(format!("loss bound must be positive, got {l}")));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        match rate {
            LearningRate::Oracle { s_rel } if !(s_rel >= T::zero()) => {
                return Err(Error::Domain(format!("oracle relative entropy must be nonnegative, got {s_rel}")))
            }
            LearningRate::Fixed { eta } if !(eta >= T::zero()) => {
                return Err(Error::Domain(format!("learning rate must be non-negative, got {eta}")))
            }
            _ => {}
        }
        Ok(Self { cumulative: Hermitian::zeros(dim), t: 1, l, rate, cached: None })
    }

    pub fn rate(&self) -> LearningRate<T> {
        self.rate
    }

    /// `η_t` for the current round.
    pub fn eta(&self) -> T {
        let t = T::from_usize_lossy(self.t as usize);
        match self.rate {
            LearningRate::Minimax => (T::from_usize_lossy(self.dim()).ln() / t).sqrt(),
            LearningRate::Oracle { s_rel } => (s_rel / t).sqrt(),
            LearningRate::Fixed { eta } => eta,
        }
    }

    pub fn cumulative_loss(&self) -> &Hermitian<T> {
        &self.cumulative
    }
}

impl<T: Real> MatrixLearner<T> for MmwuLearner<T> {
    fn dim(&self) -> usize {
        self.cumulative.dim()
    }

    fn round(&self) -> u64 {
        self.t
    }

    fn loss_bound(&self) -> T {
        self.l
    }

    fn predict(&mut self) -> Result<Density<T>> {
        if let Some(x) = &self.cached {
            return Ok(x.clone());
        }
        let x = matrix_exp_normalized(&self.cumulative.scale(-self.eta() / self.l))?;
        self.cached = Some(x.clone());
        Ok(x)
    }

    fn observe(&mut self, g: &Hermitian<T>) -> Result<()> {
        check_loss(g, self.dim(), self.l)?;
        self.cumulative = &self.cumulative + g;
        self.t += 1;
        self.cached = None;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_prediction_is_mixed() {
        let mut m = MmwuLearner::new(1.0, 4, LearningRate::Minimax).unwrap();
        let x = m.predict().unwrap();
        assert!((x.as_hermitian() - Density::maximally_mixed(4).as_hermitian()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn diagonal_losses_give_softmax() {
        let mut m = MmwuLearner::new(1.0, 2, LearningRate::Fixed { eta: 0.5 }).unwrap();
        m.observe(&Hermitian::diag(&[1.0, 0.0])).unwrap();
        m.observe(&Hermitian::diag(&[1.0, -0.5])).unwrap();
        let x = m.predict().unwrap();
        let w = [(-0.5f64 * 2.0).exp(), (0.5f64 * 0.5).exp()];
        let z = w[0] + w[1];
        assert!((x.as_hermitian().entry(0, 0).re - w[0] / z).abs() < 1e-14);
        assert!((x.as_hermitian().entry(1, 1).re - w[1] / z).abs() < 1e-14);
    }

    #[test]
    fn schedules() {
        let mut m = MmwuLearner::new(1.0, 8, LearningRate::Minimax).unwrap();
        assert!((m.eta() - 8f64.ln().sqrt()).abs() < 1e-15);
        m.observe(&Hermitian::zeros(8)).unwrap();
        assert!((m.eta() - (8f64.ln() / 2.0).sqrt()).abs() < 1e-15);
        let o = MmwuLearner::new(1.0, 8, LearningRate::Oracle { s_rel: 0.25 }).unwrap();
        assert_eq!(o.eta(), 0.5);
        assert!(MmwuLearner::new(1.0, 8, LearningRate::Oracle { s_rel: -0.1 }).is_err());
    }

    #[test]
    fn oversized_loss_is_rejected() {
        let mut m = MmwuLearner::new(0.5, 2, LearningRate::Minimax).unwrap();
        assert!(matches!(m.observe(&Hermitian::diag(&[0.0, 0.7])), Err(Error::LossBound { .. })));
    }
}
