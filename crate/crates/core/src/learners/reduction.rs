//! Spectraplex-to-Hermitian reduction: normalized positive part as the
//! prediction, and a two-step projection of the loss for the base learner.

use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian};
use crate::scalar::Real;

/// If no eigenvalue of `X̃` exceeds this, the prediction falls back to `I/d`.
pub const FALLBACK_FLOOR: f64 = 1e-14;

/// Everything [`surrogate_loss`] needs from the round's prediction.
#[derive(Clone, Debug)]
pub struct ReductionContext<T: Real> {
    round: u64,
    x_tilde: Hermitian<T>,
    x: Density<T>,
    /// Weights of `X_t` on the eigenbasis of `X̃_t`.
    x_weights: Vec<T>,
    /// Coordinates of `U_t` on the same basis; all zero when `X̃_t ⪰ 0`.
    u_weights: Vec<T>,
    u: Option<Hermitian<T>>,
    fallback: bool,
}

impl<T: Real> ReductionContext<T> {
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn x_tilde(&self) -> &Hermitian<T> {
        &self.x_tilde
    }

    pub fn prediction(&self) -> &Density<T> {
        &self.x
    }

    /// Frobenius-normalized negative part of `X̃_t`, if any eigenvalue is negative.
    pub fn u(&self) -> Option<&Hermitian<T>> {
        self.u.as_ref()
    }

    /// True when `X_t = I/d` because `X̃_t` had no positive eigenvalue.
    pub fn used_fallback(&self) -> bool {
        self.fallback
    }
}

/// Surrogate loss together with quantities the invariant checks reuse.
#[derive(Clone, Debug)]
pub struct Surrogate<T: Real> {
    pub g_tilde: Hermitian<T>,
    /// `⟨G, X_t⟩`.
    pub loss: T,
    /// `⟨Ḡ, U_t⟩` (zero without `U_t`).
    pub g_bar_dot_u: T,
    /// `v_k† G̃ v_k` on the eigenbasis of `X̃_t`.
    pub g_tilde_diag: Vec<T>,
    /// `⟨G̃, X̃_t⟩`.
    pub g_tilde_dot_x_tilde: T,
    /// `λ_min(G − G̃)`, which is diagonal on the same basis.
    pub min_eig_g_minus_g_tilde: T,
}

/// `X_t = X̃⁺ / tr X̃⁺`, or `I/d` when `X̃_t` has no eigenvalue above [`FALLBACK_FLOOR`].
pub fn reduce_predict<T: Real>(x_tilde: Hermitian<T>, round: u64) -> Result<(Density<T>, ReductionContext<T>)> {
    let d = x_tilde.dim();
    let e = x_tilde.eig()?;
    let vals = e.eigenvalues();
    let floor = T::lit(FALLBACK_FLOOR);
    let fallback = !vals.iter().any(|&l| l > floor);

    let (x, x_weights) = if fallback {
        let w = T::one() / T::from_usize_lossy(d);
        (Density::maximally_mixed(d), vec![w; d])
    } else {
        let pos: Vec<T> = vals.iter().map(|&l| l.max(T::zero())).collect();
        let total: T = pos.iter().copied().sum();
        let w: Vec<T> = pos.iter().map(|&p| p / total).collect();
        (Density::from_spectrum(e, &w)?, w)
    };

    let neg: Vec<T> = vals.iter().map(|&l| l.min(T::zero())).collect();
    let fro = neg.iter().map(|&v| v * v).sum::<T>().sqrt();
    let (u, u_weights) = if fro > T::zero() {
        let w: Vec<T> = neg.iter().map(|&v| v / fro).collect();
        (Some(Hermitian::from_eigen_shared(e, w.clone())), w)
    } else {
        (None, vec![T::zero(); d])
    };

    let ctx = ReductionContext { round, x_tilde, x: x.clone(), x_weights, u_weights, u, fallback };
    Ok((x, ctx))
}

/// `Ḡ = G − ⟨G,X_t⟩I`, then `G̃ = Ḡ − min{0, ⟨Ḡ,U_t⟩} U_t` when `U_t` exists.
pub fn surrogate<T: Real>(g: &Hermitian<T>, ctx: &ReductionContext<T>, round: u64) -> Result<Surrogate<T>> {
    if ctx.round != round {
        return Err(Error::StaleContext { context_round: ctx.round, round });
    }
    if g.dim() != ctx.x_tilde.dim() {
        return Err(Error::DimensionMismatch { expected: ctx.x_tilde.dim(), found: g.dim() });
    }
    let e = ctx.x_tilde.eig()?;
    let g_diag = e.diagonal_in_basis(g.as_matrix());
    let loss: T = g_diag.iter().zip(&ctx.x_weights).map(|(&a, &b)| a * b).sum();
    let g_bar_dot_u: T = g_diag.iter().zip(&ctx.u_weights).map(|(&a, &u)| (a - loss) * u).sum();
    let m = g_bar_dot_u.min(T::zero());

    let mut g_tilde = g.shift(-loss);
    if m < T::zero() {
        if let Some(u) = &ctx.u {
            g_tilde = g_tilde.add_scaled(-m, u);
        }
    }
    let g_tilde_diag: Vec<T> = g_diag.iter().zip(&ctx.u_weights).map(|(&a, &u)| a - loss - m * u).collect();
    let g_tilde_dot_x_tilde = g_tilde_diag.iter().zip(e.eigenvalues()).map(|(&a, &x)| a * x).sum();
    let min_shift = ctx.u_weights.iter().map(|&u| m * u).fold(T::infinity(), T::min);
    Ok(Surrogate {
        g_tilde,
        loss,
        g_bar_dot_u,
        g_tilde_diag,
        g_tilde_dot_x_tilde,
        min_eig_g_minus_g_tilde: loss + min_shift,
    })
}

/// The surrogate loss matrix `G̃_t` alone.
pub fn surrogate_loss<T: Real>(g: &Hermitian<T>, ctx: &ReductionContext<T>, round: u64) -> Result<Hermitian<T>> {
    Ok(surrogate(g, ctx, round)?.g_tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;
    use crate::rng::{gaussian_hermitian, haar_vector, hermitian_with_op_norm, rng_from_seed};

    type H = Hermitian<f64>;

    #[test]
    fn density_input_is_unchanged() {
        let x = H::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]).unwrap();
        let (d, ctx) = reduce_predict(x.clone(), 1).unwrap();
        assert!((d.as_hermitian() - &x).frobenius_norm() < 1e-10);
        assert!(ctx.u().is_none());
    }

    #[test]
    fn clamp_then_normalize() {
        let (d, ctx) = reduce_predict(H::diag(&[2.0, -1.0]), 1).unwrap();
        assert!((d.as_hermitian() - &H::diag(&[1.0, 0.0])).frobenius_norm() < 1e-15);
        let u = ctx.u().unwrap();
        assert!((u.frobenius_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_falls_back_to_mixed() {
        let (d, ctx) = reduce_predict(H::zeros(3), 1).unwrap();
        assert_eq!(d, Density::maximally_mixed(3));
        assert!(ctx.used_fallback());
    }

    #[test]
    fn traceless_orthogonal_loss_is_untouched() {
        let x = H::diag(&[0.5, 0.5, 0.0]);
        let (_, ctx) = reduce_predict(x, 4).unwrap();
        // ⟨G, X⟩ = 0 and tr G = 0
        let g = H::diag(&[0.3, -0.3, 0.0]);
        let gt = surrogate_loss(&g, &ctx, 4).unwrap();
        assert!((&gt - &g).frobenius_norm() < 1e-15);
    }

    #[test]
    fn stale_context_is_rejected() {
        let (_, ctx) = reduce_predict(H::diag(&[1.0, 0.0]), 2).unwrap();
        let err = surrogate_loss(&H::zeros(2), &ctx, 3).unwrap_err();
        assert_eq!(err, Error::StaleContext { context_round: 2, round: 3 });
    }

    #[test]
    fn lemma_clauses_on_random_inputs() {
        let mut rng = rng_from_seed(11);
        for trial in 0..200 {
            let d = 2 + trial % 5;
            let x_tilde: H = gaussian_hermitian(d, &mut rng);
            let g: H = hermitian_with_op_norm(d, 1.0, &mut rng);
            let (x, ctx) = reduce_predict(x_tilde.clone(), 1).unwrap();
            let s = surrogate(&g, &ctx, 1).unwrap();
            assert!(s.g_tilde.op_norm().unwrap() <= 2.0 * g.op_norm().unwrap() + 1e-9);

            // closed-form quantities agree with direct evaluation
            assert!((s.loss - g.inner(x.as_hermitian()).unwrap()).abs() < 1e-12);
            assert!((s.g_tilde_dot_x_tilde - s.g_tilde.inner(&x_tilde).unwrap()).abs() < 1e-10);
            let diff = &g - &s.g_tilde;
            let lmin = diff.eigenvalues().unwrap()[0];
            assert!((lmin - s.min_eig_g_minus_g_tilde).abs() < 1e-10);

            for _ in 0..100 {
                let v = haar_vector::<f64>(d, &mut rng);
                let comp = H::new(CMatrix::from_fn(d, |i, j| v[i] * v[j].conj())).unwrap();
                let lhs = g.inner(&(x.as_hermitian() - &comp)).unwrap();
                let rhs = s.g_tilde.inner(&(&x_tilde - &comp)).unwrap();
                assert!(lhs <= rhs + 1e-10, "trial {trial}: {lhs} > {rhs}");
            }
        }
    }
}
