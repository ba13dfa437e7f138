use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian};

/// Absolute slack on `λ_min(O) ≥ 0` for the nonlinear losses.
pub const PSD_TOL: f64 = 1e-12;

/// Tolerance below which `tr(O(ρ_t − ρ))` counts as zero in the l1 subgradient.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    /// `|tr(Oρ_t) − tr(Oρ)|`.
    L1,
    /// `tr(Oρ_t²)`.
    VirtualCooling,
    /// `tr(Oρ_tOρ_t)`.
    Renyi2,
}

impl LossKind {
    /// Bound on `‖∇ℓ‖_op` given `‖O‖_op ≤ l`.
    pub fn gradient_bound(self, l: f64) -> f64 {
        match self {
            LossKind::L1 => l,
            LossKind::VirtualCooling => 2.0 * l,
            LossKind::Renyi2 => 2.0 * l * l,
        }
    }

    /// Loss only, for finite differences on arbitrary Hermitian `ρ`.
    pub fn value(self, o: &Hermitian<f64>, rho: &Hermitian<f64>, truth: Option<&Density<f64>>) -> Result<f64> {
        match self {
            LossKind::L1 => {
                let truth = truth.ok_or_else(|| Error::Domain("the l1 loss needs a target state".into()))?;
                Ok((o.inner(rho)? - o.inner(truth.as_hermitian())?).abs())
            }
            LossKind::VirtualCooling => {
                let rho2 = rho.as_matrix().matmul(rho.as_matrix());
                Ok(o.as_matrix().trace_product(&rho2).re)
            }
            LossKind::Renyi2 => {
                let orho = o.as_matrix().matmul(rho.as_matrix());
                Ok(orho.trace_product(&orho).re)
            }
        }
    }
}

/// Loss and gradient at `ρ_t`; the gradient norm is checked against
/// [`LossKind::gradient_bound`] with `l = ‖O‖_op`.
pub fn loss_and_grad(
    kind: LossKind,
    o: &Hermitian<f64>,
    rho_t: &Density<f64>,
    truth: Option<&Density<f64>>,
) -> Result<(f64, Hermitian<f64>)> {
    if o.dim() != rho_t.dim() {
        return Err(Error::DimensionMismatch { expected: rho_t.dim(), found: o.dim() });
    }
    let (lo, hi) = o.extreme_eigenvalues()?;
    if kind != LossKind::L1 && lo < -PSD_TOL {
        return Err(Error::Domain(format!("observable must be PSD for this loss, min eigenvalue {lo:e}")));
    }
    let l = lo.abs().max(hi.abs());
    let rho = rho_t.as_hermitian();
    let (loss, grad) = match kind {
        LossKind::L1 => {
            let truth = truth.ok_or_else(|| Error::Domain("the l1 loss needs a target state".into()))?;
            if truth.dim() != rho.dim() {
                return Err(Error::DimensionMismatch { expected: rho.dim(), found: truth.dim() });
            }
            let diff = o.inner(rho)? - o.inner(truth.as_hermitian())?;
            let sign = if diff > SIGN_TOL { 1.0 } else if diff < -SIGN_TOL { -1.0 } else { 0.0 };
            (diff.abs(), o.scale(sign))
        }
        LossKind::VirtualCooling => (kind.value(o, rho, truth)?, o.anticommutator(rho)),
        LossKind::Renyi2 => (kind.value(o, rho, truth)?, o.sandwich(rho).scale(2.0)),
    };
    let bound = kind.gradient_bound(l);
    let norm = grad.op_norm()?;
    if norm > bound * (1.0 + 1e-9) + 1e-12 {
        return Err(Error::LossBound { norm, bound });
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::states::{noisy_circuit_state, random_product_state, BlochEnsemble};
    use crate::rng::{gaussian_hermitian, rng_from_seed};

    #[test]
    fn l1_at_truth_vanishes() {
        let (rho, _) = random_product_state(2, &BlochEnsemble::UniformPure, 1).unwrap();
        let o = gaussian_hermitian::<f64>(4, &mut rng_from_seed(2));
        let (loss, grad) = loss_and_grad(LossKind::L1, &o, &rho, Some(&rho)).unwrap();
        assert_eq!(loss, 0.0);
        assert_eq!(grad.frobenius_norm(), 0.0);
        assert!(loss_and_grad(LossKind::L1, &o, &rho, None).is_err());
    }

    #[test]
    fn purity_endpoints() {
        let i = Hermitian::identity(4);
        let (pure, _) = random_product_state(2, &BlochEnsemble::Zero, 0).unwrap();
        let (a, _) = loss_and_grad(LossKind::VirtualCooling, &i, &pure, None).unwrap();
        let (b, _) = loss_and_grad(LossKind::VirtualCooling, &i, &Density::maximally_mixed(4), None).unwrap();
        assert!((a - 1.0).abs() < 1e-15 && (b - 0.25).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_losses_need_psd_observables() {
        let o = Hermitian::diag(&[1.0, -0.5]);
        let rho = Density::maximally_mixed(2);
        assert!(loss_and_grad(LossKind::Renyi2, &o, &rho, None).is_err());
        assert!(loss_and_grad(LossKind::L1, &o, &rho, Some(&rho)).is_ok());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = rng_from_seed(10);
        let rho = noisy_circuit_state(3, 2, 0.2, 4).unwrap();
        let truth = noisy_circuit_state(3, 2, 0.3, 5).unwrap();
        let a = gaussian_hermitian::<f64>(8, &mut rng);
        let o = a.sandwich(&Hermitian::identity(8)).scale(0.1);
        for kind in [LossKind::L1, LossKind::VirtualCooling, LossKind::Renyi2] {
            let (_, grad) = loss_and_grad(kind, &o, &rho, Some(&truth)).unwrap();
            for _ in 0..20 {
                let dir = gaussian_hermitian::<f64>(8, &mut rng);
                let h = 1e-5;
                let plus = kind.value(&o, &rho.as_hermitian().add_scaled(h, &dir), Some(&truth)).unwrap();
                let minus = kind.value(&o, &rho.as_hermitian().add_scaled(-h, &dir), Some(&truth)).unwrap();
                let fd = (plus - minus) / (2.0 * h);
                let an = grad.inner(&dir).unwrap();
                assert!((fd - an).abs() <= 1e-5 * an.abs().max(1e-3), "{kind:?}: {fd} vs {an}");
            }
        }
    }
}
