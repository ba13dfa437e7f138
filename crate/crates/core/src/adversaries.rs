//! Loss-sequence generators, lower-bound comparators and the
//! anti-concentration check for sums of uniform variables.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Density, Hermitian};
use crate::quantum::{qubit_count, PauliString};
use crate::rng::{hermitian_with_op_norm, rng_from_seed, Rng64};

/// Eigenvalues within this of zero get sign 0 in the greedy adversary.
pub const SIGN_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdversaryKind {
    /// Diagonal with iid `Uniform[−l, l]` entries.
    UniformDiag,
    /// `l · sgn(X_t − ρ)`.
    GreedySign,
    /// `l` times a uniformly random Pauli string.
    RandomPauli,
    /// Gaussian Hermitian rescaled to operator norm `l`.
    RandomHermitian,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversarySpec {
    pub kind: AdversaryKind,
    pub l: f64,
    pub seed: u64,
}

/// A seeded adversary. Every emitted loss has `‖G‖_op ≤ l`.
#[derive(Clone, Debug)]
pub struct Adversary {
    spec: AdversarySpec,
    dim: usize,
    rng: Rng64,
}

impl Adversary {
    pub fn new(spec: AdversarySpec, dim: usize) -> Result<Self> {
        if !(spec.l > 0.0 && spec.l.is_finite()) {
            return Err(Error::Domain(format!("loss scale must be positive, got {}", spec.l)));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if spec.kind == AdversaryKind::RandomPauli {
            qubit_count(dim)?;
        }
        Ok(Self { spec, dim, rng: rng_from_seed(spec.seed) })
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    /// The loss for round `t` given the learner's prediction.
    pub fn next_loss(&mut self, x_t: &Density<f64>, truth: Option<&Density<f64>>) -> Result<Hermitian<f64>> {
        if x_t.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x_t.dim() });
        }
        let l = self.spec.l;
        match self.spec.kind {
            AdversaryKind::UniformDiag => {
                let v: Vec<f64> = (0..self.dim).map(|_| self.rng.random_range(-l..=l)).collect();
                Ok(Hermitian::diag(&v))
            }
            AdversaryKind::GreedySign => {
                let truth = truth.ok_or_else(|| Error::Domain("greedy_sign needs a target state".into()))?;
                greedy_sign_loss(x_t, truth, l)
            }
            AdversaryKind::RandomPauli => {
                let n = qubit_count(self.dim)?;
                Ok(PauliString::random(n, &mut self.rng).scaled_hermitian(l))
            }
            AdversaryKind::RandomHermitian => Ok(hermitian_with_op_norm(self.dim, l, &mut self.rng)),
        }
    }
}

/// `l · sgn(X − ρ)` with `sgn(0) = 0`.
pub fn greedy_sign_loss(x: &Density<f64>, truth: &Density<f64>, l: f64) -> Result<Hermitian<f64>> {
    if x.dim() != truth.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), found: truth.dim() });
    }
    let diff = x.as_hermitian() - truth.as_hermitian();
    Ok(diff.sign(SIGN_TOL)?.scale(l))
}

/// `k = ⌈d e^{−r}⌉` coordinates receive the comparator's mass.
pub fn topk_size(d: usize, r: f64) -> Result<usize> {
    let log_d = (d as f64).ln();
    if d == 0 || !(r >= 0.0 && r <= log_d + 1e-12) {
        return Err(Error::Domain(format!("comparator budget r = {r} outside [0, log d = {log_d}]")));
    }
    // slack absorbs exp/log round-off at r = log d
    let k = ((d as f64) * (-r).exp() - 1e-9).ceil() as usize;
    Ok(k.clamp(1, d))
}

/// Uniform mass on the `⌈d e^{−r}⌉` largest entries of `y`, the negated
/// cumulative diagonal loss.
pub fn topk_comparator(y: &[f64], r: f64) -> Result<Density<f64>> {
    let d = y.len();
    let k = topk_size(d, r)?;
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| y[b].total_cmp(&y[a]).then(a.cmp(&b)));
    let mut w = vec![0.0; d];
    for &i in &idx[..k] {
        w[i] = 1.0;
    }
    Density::diag(&w)
}

/// Mean of the top `k` entries of `y`.
pub fn topk_mean(y: &[f64], k: usize) -> f64 {
    let mut v = y.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v[..k].iter().sum::<f64>() / k as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntiConcentration {
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    /// Mean over all coordinates and trials; zero in expectation.
    pub coordinate_mean: f64,
    pub pass: bool,
}

/// `E[Z²] = 1/3` for `Z ~ Uniform[−1, 1]`.
pub const UNIFORM_VARIANCE: f64 = 1.0 / 3.0;
/// `E|Z|³ = 1/4` for `Z ~ Uniform[−1, 1]`.
pub const UNIFORM_THIRD_ABS_MOMENT: f64 = 0.25;

/// Largest `k` allowed at dimension `d`: `(d + 1)/(√(2π) e²) − 1`.
pub fn anticoncentration_max_k(d: usize) -> f64 {
    (d as f64 + 1.0) / ((2.0 * std::f64::consts::PI).sqrt() * std::f64::consts::E.powi(2)) - 1.0
}

/// Smallest `n` with `n ≥ (ρ²/σ⁶)(d + 1)²`.
pub fn anticoncentration_min_n(d: usize) -> usize {
    let ratio = UNIFORM_THIRD_ABS_MOMENT.powi(2) / UNIFORM_VARIANCE.powi(3);
    (ratio * (d as f64 + 1.0).powi(2)).ceil() as usize
}

/// `σ√n (√(2 log(d / (√(2π)(k + 1)))) − 1)`.
pub fn anticoncentration_bound(d: usize, n: usize, k: usize) -> f64 {
    let inner = (d as f64 / ((2.0 * std::f64::consts::PI).sqrt() * (k as f64 + 1.0))).ln();
    UNIFORM_VARIANCE.sqrt() * (n as f64).sqrt() * ((2.0 * inner).sqrt() - 1.0)
}

/// Monte-Carlo mean of the top-`k` average of `d` independent sums of `n`
/// `Uniform[−1, 1]` draws, against the closed-form lower bound. Passes when
/// the estimate is at least the bound minus three standard errors.
pub fn anticoncentration_check(d: usize, n: usize, k: usize, trials: usize, seed: u64) -> Result<AntiConcentration> {
    if k == 0 || k as f64 > anticoncentration_max_k(d) {
        return Err(Error::Domain(format!("k = {k} outside 1..={:.3} for d = {d}", anticoncentration_max_k(d))));
    }
    let n_min = anticoncentration_min_n(d);
    if n < n_min {
        return Err(Error::Domain(format!("n = {n} below the required {n_min} for d = {d}")));
    }
    if trials < 2 {
        return Err(Error::Domain("need at least two trials".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut sums = vec![0.0; d];
    let (mut acc, mut acc2, mut all) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        for s in sums.iter_mut() {
            *s = (0..n).map(|_| rng.random_range(-1.0..=1.0)).sum();
        }
        all += sums.iter().sum::<f64>();
        let m = topk_mean(&sums, k);
        acc += m;
        acc2 += m * m;
    }
    let t = trials as f64;
    let empirical = acc / t;
    let var = (acc2 / t - empirical * empirical).max(0.0) * t / (t - 1.0);
    let std_error = (var / t).sqrt();
    let bound = anticoncentration_bound(d, n, k);
    Ok(AntiConcentration {
        d,
        n,
        k,
        trials,
        empirical,
        std_error,
        bound,
        coordinate_mean: all / (t * d as f64),
        pass: empirical >= bound - 3.0 * std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn greedy_sign_at_truth_is_zero() {
        let rho = Density::diag(&[0.5, 0.3, 0.2]).unwrap();
        assert_eq!(greedy_sign_loss(&rho, &rho, 1.0).unwrap().frobenius_norm(), 0.0);
    }

    #[test]
    fn greedy_sign_excess_is_trace_distance() {
        let mut rng = rng_from_seed(4);
        for _ in 0..20 {
            let a = crate::rng::gaussian_hermitian::<f64>(4, &mut rng);
            let sq = Hermitian::symmetrized(a.as_matrix().matmul(a.as_matrix()));
            let x = Density::new(sq.scale(1.0 / sq.trace())).unwrap();
            let truth = Density::diag(&[0.4, 0.3, 0.2, 0.1]).unwrap();
            let g = greedy_sign_loss(&x, &truth, 0.5).unwrap();
            let diff = x.as_hermitian() - truth.as_hermitian();
            let excess = g.inner(&diff).unwrap();
            assert!((excess - 0.5 * diff.norms().unwrap().trace).abs() < 1e-12);
        }
    }

    #[test]
    fn topk_endpoints() {
        let y = [0.3, -1.0, 2.0, 0.5];
        let top = topk_comparator(&y, 4f64.ln()).unwrap();
        assert_eq!(top, Density::diag(&[0.0, 0.0, 1.0, 0.0]).unwrap());
        let all = topk_comparator(&y, 0.0).unwrap();
        assert_eq!(all, Density::maximally_mixed(4));
        assert!(topk_comparator(&y, 2.0).is_err());
    }

    #[test]
    fn topk_relative_entropy() {
        let y: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        for r in [0.5, 1.0, 2.0, 4.0] {
            let k = topk_size(64, r).unwrap();
            let s = topk_comparator(&y, r).unwrap().relative_entropy_vs_mixed().unwrap();
            assert!((s - (64.0 / k as f64).ln()).abs() < 1e-12);
            assert!(s <= r + 1e-12);
        }
    }

    #[test]
    fn adversaries_respect_the_bound() {
        let x = Density::maximally_mixed(8);
        let truth = Density::diag(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for kind in [AdversaryKind::UniformDiag, AdversaryKind::GreedySign, AdversaryKind::RandomPauli, AdversaryKind::RandomHermitian] {
            let mut adv = Adversary::new(AdversarySpec { kind, l: 0.7, seed: 3 }, 8).unwrap();
            for _ in 0..20 {
                let g = adv.next_loss(&x, Some(&truth)).unwrap();
                assert!(g.op_norm().unwrap() <= 0.7 + 1e-12, "{kind:?}");
            }
        }
    }

    #[test]
    fn largest_k_gives_positive_bound() {
        for d in [46usize, 64, 128] {
            let k = anticoncentration_max_k(d).floor() as usize;
            assert!(k >= 1);
            let b = anticoncentration_bound(d, anticoncentration_min_n(d), k);
            assert!(b.is_finite() && b > 0.0, "d = {d}: {b}");
        }
        assert_eq!(anticoncentration_min_n(64), 7130);
    }
}
