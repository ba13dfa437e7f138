use crate::error::{Error, Result};
use crate::linalg::{ascending_order, Hermitian};
use crate::potentials::{PotentialFamily, PotentialSpec};
use crate::scalar::Real;

/// Slack on `‖G‖_op ≤ ε` before an update is rejected.
pub const LOSS_NORM_SLACK: f64 = 1e-9;

/// Potential-method learner on all Hermitian matrices.
///
/// Holds `S_t = −Σ_{i<t} G_i`; predicts the symmetric discrete derivative
/// `(Φ_t(S_t+εI) − Φ_t(S_t−εI)) / 2ε`.
#[derive(Clone, Debug)]
pub struct UnconstrainedLearner<T: Real> {
    s: Hermitian<T>,
    t: u64,
    potential: PotentialSpec<T>,
}

impl<T: Real> UnconstrainedLearner<T> {
    /// `ε = 2l` for losses with `‖G‖_op ≤ l` fed through the reduction.
    pub fn new(family: PotentialFamily<T>, l: T, dim: usize) -> Result<Self> {
        if !(l > T::zero()) {
            return Err(Error::Domain(format!("loss bound must be positive, got {l}")));
        }
        let potential = PotentialSpec::new(family, T::lit(2.0) * l, dim)?;
        Ok(Self { s: Hermitian::zeros(dim), t: 1, potential })
    }

    pub fn from_spec(potential: PotentialSpec<T>) -> Self {
        Self { s: Hermitian::zeros(potential.dim), t: 1, potential }
    }

    #[inline]
    pub fn eps(&self) -> T {
        self.potential.eps
    }

    #[inline]
    pub fn round(&self) -> u64 {
        self.t
    }

    pub fn potential(&self) -> &PotentialSpec<T> {
        &self.potential
    }

    /// `S_t`.
    pub fn state(&self) -> &Hermitian<T> {
        &self.s
    }

    pub fn dim(&self) -> usize {
        self.potential.dim
    }

    /// Spectral values of `X̃_t` on the eigenbasis of `S_t`.
    pub fn predict_spectrum(&self) -> Result<Vec<T>> {
        let e = self.s.eig()?;
        let eps = self.eps();
        let two_eps = T::lit(2.0) * eps;
        e.eigenvalues()
            .iter()
            .map(|&l| Ok((self.potential.eval(l + eps, self.t)? - self.potential.eval(l - eps, self.t)?) / two_eps))
            .collect()
    }

    /// `X̃_t`, sharing eigenvectors with `S_t`.
    pub fn predict(&self) -> Result<Hermitian<T>> {
        let vals = self.predict_spectrum()?;
        Ok(Hermitian::from_eigen_shared(self.s.eig()?, vals))
    }

    /// `X̃_t` together with the eigenvalues of `S_t` listed in the order of
    /// `X̃_t`'s cached eigenvectors.
    pub fn predict_with_state_spectrum(&self) -> Result<(Hermitian<T>, Vec<T>)> {
        let vals = self.predict_spectrum()?;
        let order = ascending_order(&vals);
        let s_vals = self.s.eig()?.eigenvalues();
        let s_sorted = order.iter().map(|&k| s_vals[k]).collect();
        Ok((Hermitian::from_eigen_shared(self.s.eig()?, vals), s_sorted))
    }

    /// `S ← S − G`, `t ← t + 1`. Rejects `‖G‖_op > ε + 1e-9`.
    pub fn update(&mut self, g: &Hermitian<T>) -> Result<()> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: g.dim() });
        }
        let norm = g.op_norm()?;
        self.update_with_norm(g, norm)
    }

    /// [`Self::update`] with `‖G‖_op` already known.
    pub(crate) fn update_with_norm(&mut self, g: &Hermitian<T>, norm: T) -> Result<()> {
        let bound = self.eps();
        if !(norm <= bound + T::lit(LOSS_NORM_SLACK)) {
            return Err(Error::LossBound { norm: norm.to_f64_lossy(), bound: bound.to_f64_lossy() });
        }
        self.s = &self.s - g;
        self.t += 1;
        Ok(())
    }
}
