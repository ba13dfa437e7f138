use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian};

/// A fixed comparator with its relative entropy against `I/d`.
#[derive(Clone, Debug)]
pub struct Comparator {
    pub name: String,
    pub state: Density<f64>,
    pub s_rel: f64,
}

impl Comparator {
    pub fn new(name: impl Into<String>, state: Density<f64>) -> Result<Self> {
        let s_rel = state.relative_entropy_vs_mixed()?;
        Ok(Self { name: name.into(), state, s_rel })
    }
}

/// One row of a regret trace.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretRecord {
    pub t: u64,
    pub loss: f64,
    pub cum_regret: f64,
    pub bound: f64,
}

/// Per-round records against one comparator.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub records: Vec<RegretRecord>,
}

pub const CSV_HEADER: &str = "t,loss,cum_regret,bound";

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl RegretTrace {
    pub fn push(&mut self, r: RegretRecord) {
        self.records.push(r);
    }

    pub fn final_regret(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.cum_regret)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(80 * (self.records.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(out, "{},{},{},{}", r.t, format_f64(r.loss), format_f64(r.cum_regret), format_f64(r.bound));
        }
        out
    }
}

/// Running losses of a learner and of a set of fixed comparators.
#[derive(Clone, Debug)]
pub struct RegretTracker {
    comparators: Vec<Comparator>,
    comparator_loss: Vec<f64>,
    learner_loss: f64,
    cumulative: Hermitian<f64>,
    rounds: u64,
    worst_excess: Vec<f64>,
}

impl RegretTracker {
    pub fn new(dim: usize, comparators: Vec<Comparator>) -> Result<Self> {
        if let Some(c) = comparators.iter().find(|c| c.state.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: c.state.dim() });
        }
        let n = comparators.len();
        Ok(Self {
            comparators,
            comparator_loss: vec![0.0; n],
            learner_loss: 0.0,
            cumulative: Hermitian::zeros(dim),
            rounds: 0,
            worst_excess: vec![f64::NEG_INFINITY; n],
        })
    }

    /// Records round `t`, returning the learner's loss `⟨G_t, X_t⟩`.
    pub fn observe(&mut self, g: &Hermitian<f64>, x: &Density<f64>) -> Result<f64> {
        let loss = g.inner(x.as_hermitian())?;
        self.learner_loss += loss;
        for (acc, c) in self.comparator_loss.iter_mut().zip(&self.comparators) {
            *acc += g.inner(c.state.as_hermitian())?;
        }
        self.cumulative = &self.cumulative + g;
        self.rounds += 1;
        Ok(loss)
    }

    /// Like [`Self::observe`], and also tracks `max_t (Reg_t(X) − bound(t, S_rel(X)))` per comparator.
    pub fn observe_against(&mut self, g: &Hermitian<f64>, x: &Density<f64>, bound: impl Fn(u64, f64) -> f64) -> Result<f64> {
        let loss = self.observe(g, x)?;
        let t = self.rounds;
        for (k, c) in self.comparators.iter().enumerate() {
            let excess = self.learner_loss - self.comparator_loss[k] - bound(t, c.s_rel);
            self.worst_excess[k] = self.worst_excess[k].max(excess);
        }
        Ok(loss)
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    pub fn learner_loss(&self) -> f64 {
        self.learner_loss
    }

    pub fn comparators(&self) -> &[Comparator] {
        &self.comparators
    }

    /// `Σ G_t` so far.
    pub fn cumulative(&self) -> &Hermitian<f64> {
        &self.cumulative
    }

    pub fn regret(&self, k: usize) -> f64 {
        self.learner_loss - self.comparator_loss[k]
    }

    /// Regret against any fixed state, from the accumulated loss matrix.
    pub fn regret_against(&self, x: &Density<f64>) -> Result<f64> {
        Ok(self.learner_loss - self.cumulative.inner(x.as_hermitian())?)
    }

    /// Regret against the best state in hindsight, `Σ⟨G_t,X_t⟩ − λ_min(Σ G_t)`.
    pub fn max_regret(&self) -> Result<f64> {
        Ok(self.learner_loss - self.cumulative.extreme_eigenvalues()?.0)
    }

    /// Largest amount by which any prefix regret exceeded its bound, per comparator.
    pub fn worst_excess(&self) -> &[f64] {
        &self.worst_excess
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_seventeen_digits() {
        let mut tr = RegretTrace::default();
        tr.push(RegretRecord { t: 1, loss: 0.1, cum_regret: -1.0 / 3.0, bound: 2.0 });
        let csv = tr.to_csv();
        let line = csv.lines().nth(1).unwrap();
        assert_eq!(line, "1,1.0000000000000001e-1,-3.3333333333333331e-1,2.0000000000000000e0");
        for field in line.split(',').skip(1) {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format_f64(v), field);
        }
    }

    #[test]
    fn regret_is_a_running_sum() {
        let c = Comparator::new("e0", Density::diag(&[1.0, 0.0]).unwrap()).unwrap();
        assert!((c.s_rel - 2f64.ln()).abs() < 1e-12);
        let mut tr = RegretTracker::new(2, vec![c]).unwrap();
        let x = Density::maximally_mixed(2);
        tr.observe(&Hermitian::diag(&[1.0, -1.0]), &x).unwrap();
        tr.observe(&Hermitian::diag(&[0.5, 0.0]), &x).unwrap();
        assert!((tr.learner_loss() - 0.25).abs() < 1e-15);
        assert!((tr.regret(0) - (0.25 - 1.5)).abs() < 1e-15);
        assert!((tr.max_regret().unwrap() - (0.25 + 1.0)).abs() < 1e-12);
    }
}
