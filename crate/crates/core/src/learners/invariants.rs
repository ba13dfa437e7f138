//! Per-round checks of the inequalities the regret analysis chains together.

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use crate::error::Result;
use crate::linalg::{CMatrix, Hermitian};
use crate::potentials::PotentialSpec;
use crate::rng::{haar_vector, rng_from_seed, Rng64};
use crate::scalar::Real;

use super::reduction::Surrogate;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantTolerances {
    /// Relative slack on the one-step Jensen bound.
    pub jensen: f64,
    /// Relative slack per round on the telescoped bound.
    pub telescoping: f64,
    /// Slack on both reduction clauses.
    pub reduction: f64,
    /// Random pure-state comparators drawn per round.
    pub sampled_comparators: usize,
}

impl Default for InvariantTolerances {
    fn default() -> Self {
        Self { jensen: 1e-8, telescoping: 1e-6, reduction: 1e-9, sampled_comparators: 32 }
    }
}

/// Worst margins seen so far. Every margin is `rhs − lhs` divided by a scale,
/// so a clause holds when its margin is at least minus its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub rounds: u64,
    pub worst_jensen: f64,
    pub worst_telescoping: f64,
    /// Largest `(‖G̃‖ − 2‖G‖) / max(1, ‖G‖)`.
    pub worst_norm_excess: f64,
    pub worst_comparator_exact: f64,
    pub worst_comparator_sampled: f64,
    /// `tr Φ₁(−G̃₁)`.
    pub boundary_term: Option<f64>,
    pub tolerances: InvariantTolerances,
    pub violations: Vec<String>,
}

const MAX_RECORDED_VIOLATIONS: usize = 16;

impl InvariantReport {
    fn new(tolerances: InvariantTolerances) -> Self {
        Self {
            rounds: 0,
            worst_jensen: f64::INFINITY,
            worst_telescoping: f64::INFINITY,
            worst_norm_excess: f64::NEG_INFINITY,
            worst_comparator_exact: f64::INFINITY,
            worst_comparator_sampled: f64::INFINITY,
            boundary_term: None,
            tolerances,
            violations: Vec::new(),
        }
    }

    pub fn jensen_holds(&self) -> bool {
        self.worst_jensen >= -self.tolerances.jensen
    }

    pub fn telescoping_holds(&self) -> bool {
        self.worst_telescoping >= -self.tolerances.telescoping
    }

    pub fn reduction_holds(&self) -> bool {
        let tol = self.tolerances.reduction;
        self.worst_norm_excess <= tol && self.worst_comparator_exact >= -tol && self.worst_comparator_sampled >= -tol
    }

    pub fn all_hold(&self) -> bool {
        self.jensen_holds() && self.telescoping_holds() && self.reduction_holds()
    }

    fn note(&mut self, msg: String) {
        if self.violations.len() < MAX_RECORDED_VIOLATIONS {
            self.violations.push(msg);
        }
    }
}

/// What the monitor needs from one round of the composite learner.
pub struct RoundRecord<'a, T: Real> {
    pub round: u64,
    pub potential: &'a PotentialSpec<T>,
    /// Eigenvalues of `S_t`, in the order of `X̃_t`'s eigenvectors.
    pub s_eigs: &'a [T],
    /// Eigenvalues of `S_{t+1}`.
    pub s_next_eigs: &'a [T],
    pub surrogate: &'a Surrogate<T>,
    pub g: &'a Hermitian<T>,
    pub g_norm: T,
    pub g_tilde_norm: T,
}

#[derive(Clone, Debug)]
pub struct InvariantMonitor {
    report: InvariantReport,
    rng: Rng64,
    first_term: f64,
    surrogate_sum: f64,
}

fn quad<T: Real>(m: &CMatrix<T>, v: &[Complex<T>]) -> T {
    let mv = m.matvec(v);
    v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
}

impl InvariantMonitor {
    pub fn new(tolerances: InvariantTolerances, seed: u64) -> Self {
        Self { report: InvariantReport::new(tolerances), rng: rng_from_seed(seed), first_term: 0.0, surrogate_sum: 0.0 }
    }

    pub fn report(&self) -> &InvariantReport {
        &self.report
    }

    pub fn into_report(self) -> InvariantReport {
        self.report
    }

    pub fn observe<T: Real>(&mut self, r: &RoundRecord<'_, T>) -> Result<()> {
        let t = r.round;
        let p = r.potential;
        let eps = p.eps;
        let two_eps = T::lit(2.0) * eps;
        let sur = r.surrogate;

        // one-step Jensen bound
        let mut rhs = T::zero();
        for (&l, &g) in r.s_eigs.iter().zip(&sur.g_tilde_diag) {
            rhs += (eps - g) / two_eps * p.eval(l + eps, t)? + (eps + g) / two_eps * p.eval(l - eps, t)?;
        }
        let mut lhs = T::zero();
        for &l in r.s_next_eigs {
            lhs += p.eval(l, t)?;
        }
        let (lhs, rhs) = (lhs.to_f64_lossy(), rhs.to_f64_lossy());
        let margin = (rhs - lhs) / 1f64.max(rhs.abs());
        self.report.worst_jensen = self.report.worst_jensen.min(margin);
        if margin < -self.report.tolerances.jensen {
            self.report.note(format!("round {t}: Jensen bound exceeded, lhs {lhs:e} > rhs {rhs:e}"));
        }

        // telescoped bound, whose right side at round t ends with −tr Φ_t(S_{t+1})
        let gx = sur.g_tilde_dot_x_tilde.to_f64_lossy();
        if self.report.rounds == 0 {
            self.report.boundary_term = Some(lhs);
            self.first_term = gx + lhs;
        }
        self.surrogate_sum += gx;
        let tele_rhs = self.first_term - lhs;
        let scale = 1f64.max(self.first_term.abs()).max(lhs.abs());
        let margin = (tele_rhs - self.surrogate_sum) / (t as f64 * scale);
        self.report.worst_telescoping = self.report.worst_telescoping.min(margin);
        if margin < -self.report.tolerances.telescoping {
            self.report.note(format!("round {t}: telescoped bound exceeded by {:e}", self.surrogate_sum - tele_rhs));
        }

        // reduction: norm clause
        let g_norm = r.g_norm.to_f64_lossy();
        let excess = (r.g_tilde_norm.to_f64_lossy() - 2.0 * g_norm) / 1f64.max(g_norm);
        self.report.worst_norm_excess = self.report.worst_norm_excess.max(excess);
        if excess > self.report.tolerances.reduction {
            self.report.note(format!("round {t}: surrogate norm exceeds twice the loss norm by {excess:e}"));
        }

        // reduction: comparator clause over the whole spectraplex
        let loss = sur.loss.to_f64_lossy();
        let exact = (sur.min_eig_g_minus_g_tilde.to_f64_lossy() - (loss - gx)) / 1f64.max(g_norm);
        self.report.worst_comparator_exact = self.report.worst_comparator_exact.min(exact);
        if exact < -self.report.tolerances.reduction {
            self.report.note(format!("round {t}: comparator clause fails at the worst comparator by {:e}", -exact));
        }

        let d = r.g.dim();
        let mut worst = f64::INFINITY;
        for _ in 0..self.report.tolerances.sampled_comparators {
            let v = haar_vector::<T>(d, &mut self.rng);
            let lhs = loss - quad(r.g.as_matrix(), &v).to_f64_lossy();
            let rhs = gx - quad(sur.g_tilde.as_matrix(), &v).to_f64_lossy();
            worst = worst.min((rhs - lhs) / 1f64.max(g_norm));
        }
        self.report.worst_comparator_sampled = self.report.worst_comparator_sampled.min(worst);
        if worst < -self.report.tolerances.reduction {
            self.report.note(format!("round {t}: comparator clause fails at a sampled pure state by {:e}", -worst));
        }

        self.report.rounds += 1;
        Ok(())
    }
}
