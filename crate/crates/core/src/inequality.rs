//! Numerical checks of the one-sided Jensen trace inequality
//! `tr Φ(S+G) ≤ tr[((εI+G)/2ε) Φ(S+εI) + ((εI−G)/2ε) Φ(S−εI)]` for `‖G‖_op ≤ ε`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{jacobi, CMatrix, EigenDecomposition, Hermitian};
use crate::potentials::PotentialSpec;
use crate::rng::{gaussian_hermitian, hermitian_with_op_norm, sub_rng, sub_seed};

/// Gaps below `−VIOLATION_THRESHOLD · scale` count as violations.
pub const VIOLATION_THRESHOLD: f64 = 1e-7;

/// Eigensolver tolerance used to re-verify candidate violations.
pub const REVERIFY_TOL: f64 = 1e-15;

/// Operator-norm cap on `S` in the monomial search.
pub const MONOMIAL_S_NORM: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phi", rename_all = "snake_case")]
pub enum SpectralFunction {
    Abs,
    Affine { a: f64, b: f64 },
    Monomial { degree: u32 },
    Exp { c: f64 },
    ExpSquare { t: u64, eps: f64, d: usize },
    Erfi { t: u64, eps: f64, d: usize },
}

impl SpectralFunction {
    pub fn eval(&self, x: f64) -> Result<f64> {
        let y = match *self {
            SpectralFunction::Abs => x.abs(),
            SpectralFunction::Affine { a, b } => a * x + b,
            SpectralFunction::Monomial { degree } => x.powi(degree as i32),
            SpectralFunction::Exp { c } => (c * x).exp(),
            SpectralFunction::ExpSquare { t, eps, d } => PotentialSpec::exp_square(eps, d)?.eval(x, t)?,
            SpectralFunction::Erfi { t, eps, d } => PotentialSpec::erfi(eps, d)?.eval(x, t)?,
        };
        if !y.is_finite() {
            return Err(Error::SpectralOverflow { eigenvalue: x });
        }
        Ok(y)
    }

    /// `ε` the function is built around; 1 for the elementary functions.
    pub fn natural_eps(&self) -> f64 {
        match *self {
            SpectralFunction::ExpSquare { eps, .. } | SpectralFunction::Erfi { eps, .. } => eps,
            _ => 1.0,
        }
    }

    fn trace_of(&self, vals: &[f64]) -> Result<f64> {
        vals.iter().map(|&v| self.eval(v)).sum()
    }
}

/// Both sides of the inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenTerms {
    pub lhs: f64,
    pub rhs: f64,
}

impl JensenTerms {
    /// `rhs − lhs`; negative means the inequality fails.
    pub fn gap(&self) -> f64 {
        self.rhs - self.lhs
    }

    pub fn scale(&self) -> f64 {
        1f64.max(self.lhs.abs()).max(self.rhs.abs())
    }

    pub fn scaled_gap(&self) -> f64 {
        self.gap() / self.scale()
    }
}

fn check_pair(s: &Hermitian<f64>, g: &Hermitian<f64>, eps: f64) -> Result<()> {
    if s.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: g.dim() });
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let norm = g.op_norm()?;
    if norm > eps * (1.0 + 1e-12) {
        return Err(Error::LossBound { norm, bound: eps });
    }
    Ok(())
}

fn terms_from(phi: &SpectralFunction, s_eig: &EigenDecomposition<f64>, sg_vals: &[f64], g: &Hermitian<f64>, eps: f64) -> Result<JensenTerms> {
    let g_diag = s_eig.diagonal_in_basis(g.as_matrix());
    let mut rhs = 0.0;
    for (&l, &gk) in s_eig.eigenvalues().iter().zip(&g_diag) {
        rhs += (eps + gk) / (2.0 * eps) * phi.eval(l + eps)? + (eps - gk) / (2.0 * eps) * phi.eval(l - eps)?;
    }
    Ok(JensenTerms { lhs: phi.trace_of(sg_vals)?, rhs })
}

pub fn jensen_terms(phi: &SpectralFunction, s: &Hermitian<f64>, g: &Hermitian<f64>, eps: f64) -> Result<JensenTerms> {
    check_pair(s, g, eps)?;
    terms_from(phi, s.eig()?, (s + g).eigenvalues()?, g, eps)
}

/// The same terms with both eigendecompositions recomputed by Jacobi at [`REVERIFY_TOL`].
pub fn jensen_terms_tight(phi: &SpectralFunction, s: &Hermitian<f64>, g: &Hermitian<f64>, eps: f64) -> Result<JensenTerms> {
    check_pair(s, g, eps)?;
    let se = jacobi(s.as_matrix(), REVERIFY_TOL)?;
    let sg = jacobi((s + g).as_matrix(), REVERIFY_TOL)?;
    terms_from(phi, &se, sg.eigenvalues(), g, eps)
}

/// `rhs − lhs`.
pub fn jensen_gap(phi: &SpectralFunction, s: &Hermitian<f64>, g: &Hermitian<f64>, eps: f64) -> Result<f64> {
    Ok(jensen_terms(phi, s, g, eps)?.gap())
}

/// An `(S, G, ε)` triple in the JSON matrix format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenInstance {
    pub d: usize,
    pub eps: f64,
    pub s: Vec<(f64, f64)>,
    pub g: Vec<(f64, f64)>,
}

impl JensenInstance {
    pub fn new(s: &Hermitian<f64>, g: &Hermitian<f64>, eps: f64) -> Self {
        Self { d: s.dim(), eps, s: s.to_pairs(), g: g.to_pairs() }
    }

    pub fn matrices(&self) -> Result<(Hermitian<f64>, Hermitian<f64>)> {
        Ok((Hermitian::from_pairs(self.d, &self.s)?, Hermitian::from_pairs(self.d, &self.g)?))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JensenSuiteReport {
    pub phi: SpectralFunction,
    pub d: usize,
    pub trials: usize,
    /// Smallest `gap / scale`.
    pub min_scaled_gap: f64,
    pub min_gap: f64,
    pub argmin: Option<JensenInstance>,
    /// First trial (1-based) whose scaled gap fell below `−VIOLATION_THRESHOLD`.
    pub first_violation: Option<usize>,
}

/// `S` with standard complex Gaussian entries, `G` a Gaussian Hermitian
/// matrix rescaled to `‖G‖_op = uε` with `u ~ Uniform(0, 1]`.
pub fn sample_jensen_pair(d: usize, eps: f64, rng: &mut impl Rng) -> (Hermitian<f64>, Hermitian<f64>) {
    let s = gaussian_hermitian::<f64>(d, rng);
    let u: f64 = 1.0 - rng.random::<f64>();
    let g = hermitian_with_op_norm(d, u * eps, rng);
    (s, g)
}

/// Trial `i` draws from sub-stream `i` of `seed`, so any trial can be replayed alone.
pub fn random_jensen_suite(phi: &SpectralFunction, d: usize, trials: usize, seed: u64) -> Result<JensenSuiteReport> {
    if d == 0 || d > 16 || trials == 0 {
        return Err(Error::Domain(format!("suite needs 1 ≤ d ≤ 16 and trials ≥ 1, got d = {d}, trials = {trials}")));
    }
    let eps = phi.natural_eps();
    let mut report = JensenSuiteReport {
        phi: *phi,
        d,
        trials,
        min_scaled_gap: f64::INFINITY,
        min_gap: f64::INFINITY,
        argmin: None,
        first_violation: None,
    };
    for i in 0..trials {
        let mut rng = sub_rng(seed, i as u64);
        let (s, g) = sample_jensen_pair(d, eps, &mut rng);
        let terms = jensen_terms(phi, &s, &g, eps)?;
        let scaled = terms.scaled_gap();
        if scaled < report.min_scaled_gap {
            report.min_scaled_gap = scaled;
            report.min_gap = terms.gap();
            report.argmin = Some(JensenInstance::new(&s, &g, eps));
        }
        if scaled < -VIOLATION_THRESHOLD && report.first_violation.is_none() {
            report.first_violation = Some(i + 1);
        }
    }
    Ok(report)
}

/// `Φ = |x|`, `ε = 1`, `S = [[0,1],[1,0]]`, `G = diag(1, −1)`.
pub fn abs_counterexample() -> (SpectralFunction, Hermitian<f64>, Hermitian<f64>, f64) {
    let s = Hermitian::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("symmetric");
    (SpectralFunction::Abs, s, Hermitian::diag(&[1.0, -1.0]), 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Factor {
    S,
    G,
}

/// `tr[S^{2k−2l}] − |tr(X₀ ⋯ X_{2k−1})|` for a word of even length `2k` with `2l` copies of `G`.
pub fn interleaving_bound_gap(word: &[Factor], s: &Hermitian<f64>, g: &Hermitian<f64>) -> Result<f64> {
    if word.is_empty() || word.len() % 2 == 1 {
        return Err(Error::Domain(format!("word length {} must be even and positive", word.len())));
    }
    let g_count = word.iter().filter(|&&f| f == Factor::G).count();
    if g_count % 2 == 1 {
        return Err(Error::Domain(format!("word has {g_count} copies of G, which must be even")));
    }
    if s.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: g.dim() });
    }
    let norm = g.op_norm()?;
    if norm > 1.0 + 1e-12 {
        return Err(Error::LossBound { norm, bound: 1.0 });
    }
    let d = s.dim();
    let mut prod = CMatrix::identity(d);
    for f in word {
        let m = match f {
            Factor::S => s.as_matrix(),
            Factor::G => g.as_matrix(),
        };
        prod = prod.matmul(m);
    }
    let power = (word.len() - g_count) as i32;
    let bound: f64 = s.eigenvalues()?.iter().map(|v| v.powi(power)).sum();
    Ok(bound - prod.trace().norm())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterleavingReport {
    pub trials: usize,
    /// Smallest gap divided by `max(1, tr S^{2k−2l})`.
    pub min_scaled_gap: f64,
    pub worst_word: Vec<Factor>,
}

/// Random words with `k ≤ k_max` at `2 ≤ d ≤ d_max`; `G` has `‖G‖_op ≤ 1`.
pub fn random_interleaving_suite(k_max: usize, d_max: usize, trials: usize, seed: u64) -> Result<InterleavingReport> {
    if k_max == 0 || d_max < 2 {
        return Err(Error::Domain("need k_max ≥ 1 and d_max ≥ 2".into()));
    }
    let mut report = InterleavingReport { trials, min_scaled_gap: f64::INFINITY, worst_word: Vec::new() };
    for i in 0..trials {
        let mut rng = sub_rng(seed, i as u64);
        let k = rng.random_range(1..=k_max);
        let d = rng.random_range(2..=d_max);
        let l = rng.random_range(0..=k);
        let mut word: Vec<Factor> = (0..2 * k).map(|j| if j < 2 * l { Factor::G } else { Factor::S }).collect();
        for j in (1..word.len()).rev() {
            word.swap(j, rng.random_range(0..=j));
        }
        let s = gaussian_hermitian::<f64>(d, &mut rng);
        let u: f64 = 1.0 - rng.random::<f64>();
        let g = hermitian_with_op_norm(d, u, &mut rng);
        let gap = interleaving_bound_gap(&word, &s, &g)?;
        let power = (2 * k - 2 * l) as i32;
        let scale = 1f64.max(s.eigenvalues()?.iter().map(|v| v.powi(power)).sum());
        if gap / scale < report.min_scaled_gap {
            report.min_scaled_gap = gap / scale;
            report.worst_word = word;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonomialSearchRow {
    pub k: u32,
    pub trials: usize,
    pub min_scaled_gap: f64,
    /// Violations that survive re-verification at the tight tolerance.
    pub flagged: Vec<JensenInstance>,
    /// Violations at the default tolerance that the tight solve cleared.
    pub cleared: usize,
}

/// `Φ = x^{2k}` for each `k` in `ks`, `ε = 1`, `‖S‖_op ≤ 4`, dimensions cycling through `2..=d_max`.
pub fn monomial_conjecture_search(ks: &[u32], trials_per_k: usize, d_max: usize, seed: u64) -> Result<Vec<MonomialSearchRow>> {
    if d_max < 2 || d_max > 16 {
        return Err(Error::Domain(format!("d_max = {d_max} outside 2..=16")));
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        if k == 0 || k > 8 {
            return Err(Error::Domain(format!("monomial half-degree {k} outside 1..=8")));
        }
        let phi = SpectralFunction::Monomial { degree: 2 * k };
        let mut row = MonomialSearchRow { k, trials: trials_per_k, min_scaled_gap: f64::INFINITY, flagged: Vec::new(), cleared: 0 };
        for i in 0..trials_per_k {
            let mut rng = sub_rng(sub_seed(seed, u64::from(k)), i as u64);
            let d = 2 + i % (d_max - 1);
            let (s0, g) = sample_jensen_pair(d, 1.0, &mut rng);
            let c: f64 = MONOMIAL_S_NORM * (1.0 - rng.random::<f64>()) / s0.op_norm()?.max(f64::MIN_POSITIVE);
            let s = s0.scale(c);
            let terms = jensen_terms(&phi, &s, &g, 1.0)?;
            let scaled = terms.scaled_gap();
            row.min_scaled_gap = row.min_scaled_gap.min(scaled);
            if scaled < -VIOLATION_THRESHOLD {
                if jensen_terms_tight(&phi, &s, &g, 1.0)?.scaled_gap() < -VIOLATION_THRESHOLD {
                    row.flagged.push(JensenInstance::new(&s, &g, 1.0));
                } else {
                    row.cleared += 1;
                }
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{haar_unitary, rng_from_seed};

    #[test]
    fn abs_counterexample_values() {
        let (phi, s, g, eps) = abs_counterexample();
        let t = jensen_terms(&phi, &s, &g, eps).unwrap();
        assert!((t.lhs - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!((t.rhs - 2.0).abs() < 1e-12);
    }

    #[test]
    fn affine_is_tight() {
        let mut rng = rng_from_seed(1);
        let phi = SpectralFunction::Affine { a: -0.7, b: 2.5 };
        for d in 1..6 {
            let (s, g) = sample_jensen_pair(d, 0.8, &mut rng);
            assert!(jensen_gap(&phi, &s, &g, 0.8).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn commuting_pairs_satisfy_convex_cases() {
        let mut rng = rng_from_seed(2);
        for phi in [SpectralFunction::Abs, SpectralFunction::Monomial { degree: 6 }, SpectralFunction::Exp { c: -1.3 }] {
            for _ in 0..50 {
                let s = Hermitian::diag(&[rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() - 0.5, 0.3]);
                let g = Hermitian::diag(&[rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0, 1.0]);
                let u = haar_unitary::<f64>(3, &mut rng);
                let (s, g) = (s.conjugate_by(&u), g.conjugate_by(&u));
                assert!(jensen_gap(&phi, &s, &g, 1.0).unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn oversized_g_is_rejected() {
        let (phi, s, g, _) = abs_counterexample();
        assert!(matches!(jensen_gap(&phi, &s, &g, 0.5), Err(Error::LossBound { .. })));
    }

    #[test]
    fn abs_violations_show_up() {
        let r = random_jensen_suite(&SpectralFunction::Abs, 2, 1000, 7).unwrap();
        assert!(r.first_violation.is_some(), "min {}", r.min_scaled_gap);
    }

    #[test]
    fn interleaving_special_cases() {
        let mut rng = rng_from_seed(3);
        let s = gaussian_hermitian::<f64>(4, &mut rng);
        let g = hermitian_with_op_norm(4, 0.9, &mut rng);
        use Factor::{G, S};
        assert!(interleaving_bound_gap(&[G, S, G, S], &s, &g).unwrap() >= -1e-9);
        let all_g = interleaving_bound_gap(&[G, G, G, G], &s, &g).unwrap();
        assert!(all_g >= 4.0 - 4.0 * 0.9f64.powi(4) - 1e-12);
        assert!(interleaving_bound_gap(&[G, S, S], &s, &g).is_err());
        assert!(interleaving_bound_gap(&[G, S, S, S], &s, &g).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let (_, s, g, eps) = abs_counterexample();
        let inst = JensenInstance::new(&s, &g, eps);
        let back: JensenInstance = serde_json::from_str(&serde_json::to_string(&inst).unwrap()).unwrap();
        let (s2, g2) = back.matrices().unwrap();
        assert_eq!((s2, g2), (s, g));
    }
}
