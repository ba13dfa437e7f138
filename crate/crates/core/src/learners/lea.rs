use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian};
use crate::potentials::PotentialFamily;
use crate::scalar::Real;

use super::invariants::{InvariantMonitor, InvariantReport, InvariantTolerances, RoundRecord};
use super::reduction::{reduce_predict, surrogate, ReductionContext, Surrogate};
use super::unconstrained::UnconstrainedLearner;
use super::{check_loss, MatrixLearner};

/// Matrix LEA learner: the unconstrained potential learner behind the
/// spectraplex reduction.
#[derive(Clone, Debug)]
pub struct LeaLearner<T: Real> {
    base: UnconstrainedLearner<T>,
    l: T,
    ctx: Option<Pending<T>>,
    monitor: Option<InvariantMonitor>,
    last: Option<Surrogate<T>>,
}

#[derive(Clone, Debug)]
struct Pending<T: Real> {
    ctx: ReductionContext<T>,
    s_eigs: Vec<T>,
}

impl<T: Real> LeaLearner<T> {
    pub fn new(family: PotentialFamily<T>, l: T, dim: usize) -> Result<Self> {
        Ok(Self { base: UnconstrainedLearner::new(family, l, dim)?, l, ctx: None, monitor: None, last: None })
    }

    pub fn erfi(l: T, dim: usize) -> Result<Self> {
        Self::new(PotentialFamily::Erfi, l, dim)
    }

    /// Turns on the per-round invariant checks; `seed` drives the sampled comparators.
    pub fn with_invariants(mut self, tolerances: InvariantTolerances, seed: u64) -> Self {
        self.monitor = Some(InvariantMonitor::new(tolerances, seed));
        self
    }

    pub fn invariant_report(&self) -> Option<&InvariantReport> {
        self.monitor.as_ref().map(|m| m.report())
    }

    pub fn base(&self) -> &UnconstrainedLearner<T> {
        &self.base
    }

    /// The reduction data of the latest completed round.
    pub fn last_surrogate(&self) -> Option<&Surrogate<T>> {
        self.last.as_ref()
    }

    /// Context for the current round's prediction, computing it if needed.
    pub fn context(&mut self) -> Result<&ReductionContext<T>> {
        self.ensure_prediction()?;
        Ok(&self.ctx.as_ref().expect("prediction was just made").ctx)
    }

    fn ensure_prediction(&mut self) -> Result<()> {
        if self.ctx.as_ref().is_some_and(|p| p.ctx.round() == self.base.round()) {
            return Ok(());
        }
        let (x_tilde, s_eigs) = self.base.predict_with_state_spectrum()?;
        let (_, ctx) = reduce_predict(x_tilde, self.base.round())?;
        self.ctx = Some(Pending { ctx, s_eigs });
        Ok(())
    }

    /// Predicts `X_t`, then feeds `G_t` through the reduction. Returns `X_t`.
    pub fn lea_step(&mut self, g: &Hermitian<T>) -> Result<Density<T>> {
        let x = self.predict()?;
        self.observe(g)?;
        Ok(x)
    }

    /// [`Self::lea_step`] on a gradient. `big_l` must not exceed the declared loss bound.
    pub fn oco_step(&mut self, grad: &Hermitian<T>, big_l: T) -> Result<Density<T>> {
        if big_l > self.l {
            return Err(Error::Domain(format!("gradient bound {big_l} exceeds the learner's loss bound {}", self.l)));
        }
        check_loss(grad, self.dim(), big_l)?;
        self.lea_step(grad)
    }
}

impl<T: Real> MatrixLearner<T> for LeaLearner<T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn round(&self) -> u64 {
        self.base.round()
    }

    fn loss_bound(&self) -> T {
        self.l
    }

    fn predict(&mut self) -> Result<Density<T>> {
        self.ensure_prediction()?;
        Ok(self.ctx.as_ref().expect("prediction was just made").ctx.prediction().clone())
    }

    fn observe(&mut self, g: &Hermitian<T>) -> Result<()> {
        let g_norm = check_loss(g, self.dim(), self.l)?;
        self.ensure_prediction()?;
        let pending = self.ctx.take().expect("prediction was just made");
        let t = self.base.round();
        let sur = surrogate(g, &pending.ctx, t)?;
        let g_tilde_norm = sur.g_tilde.op_norm()?;
        self.base.update_with_norm(&sur.g_tilde, g_tilde_norm)?;
        if let Some(monitor) = self.monitor.as_mut() {
            let s_next = self.base.state().eig()?.eigenvalues();
            monitor.observe(&RoundRecord {
                round: t,
                potential: self.base.potential(),
                s_eigs: &pending.s_eigs,
                s_next_eigs: s_next,
                surrogate: &sur,
                g,
                g_norm,
                g_tilde_norm,
            })?;
        }
        self.last = Some(sur);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::PotentialSpec;

    #[test]
    fn zero_losses_keep_the_mixed_state() {
        let mut lea = LeaLearner::erfi(1.0, 3).unwrap();
        for _ in 0..5 {
            let x = lea.lea_step(&Hermitian::zeros(3)).unwrap();
            assert_eq!(x, Density::maximally_mixed(3));
        }
    }

    // commuting losses reduce the whole loop to scalars
    #[test]
    fn diagonal_run_matches_scalar_simulation() {
        let l = 1.0;
        let losses = [[0.5, -0.25], [1.0, 0.0], [-0.5, 0.75]];
        let mut lea = LeaLearner::erfi(l, 2).unwrap();
        let p = PotentialSpec::erfi(2.0 * l, 2).unwrap();
        let mut s = [0.0f64; 2];
        for (i, g) in losses.iter().enumerate() {
            let t = i as u64 + 1;
            let xt: Vec<f64> = s.iter().map(|&v| (p.eval(v + 2.0, t).unwrap() - p.eval(v - 2.0, t).unwrap()) / 4.0).collect();
            let pos: Vec<f64> = xt.iter().map(|v| v.max(0.0)).collect();
            let total: f64 = pos.iter().sum();
            let x: Vec<f64> = if total > 1e-14 { pos.iter().map(|v| v / total).collect() } else { vec![0.5; 2] };
            let loss = g[0] * x[0] + g[1] * x[1];
            let mut gbar = [g[0] - loss, g[1] - loss];
            let neg: Vec<f64> = xt.iter().map(|v| v.min(0.0)).collect();
            let fro = neg.iter().map(|v| v * v).sum::<f64>().sqrt();
            if fro > 0.0 {
                let u: Vec<f64> = neg.iter().map(|v| v / fro).collect();
                let m = (gbar[0] * u[0] + gbar[1] * u[1]).min(0.0);
                gbar = [gbar[0] - m * u[0], gbar[1] - m * u[1]];
            }

            let got = lea.lea_step(&Hermitian::diag(g)).unwrap();
            for k in 0..2 {
                assert!((got.as_hermitian().entry(k, k).re - x[k]).abs() < 1e-13, "round {t}");
            }
            s = [s[0] - gbar[0], s[1] - gbar[1]];
        }
        let st = lea.base().state();
        assert!((st.entry(0, 0).re - s[0]).abs() < 1e-13);
        assert!((st.entry(1, 1).re - s[1]).abs() < 1e-13);
    }

    #[test]
    fn oco_on_linear_loss_is_lea() {
        let g = Hermitian::from_real_rows(&[&[0.3, 0.4], &[0.4, -0.2]]).unwrap();
        let mut a = LeaLearner::erfi(1.0, 2).unwrap();
        let mut b = LeaLearner::erfi(1.0, 2).unwrap();
        for _ in 0..4 {
            assert_eq!(a.lea_step(&g).unwrap(), b.oco_step(&g, 1.0).unwrap());
        }
    }

    #[test]
    fn declared_bound_is_enforced() {
        let mut lea = LeaLearner::erfi(0.5, 2).unwrap();
        assert!(matches!(lea.observe(&Hermitian::diag(&[0.6, 0.0])), Err(Error::LossBound { .. })));
        assert_eq!(lea.round(), 1);
    }
}
