use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gibbs, CMatrix, Density, Hermitian};
use crate::rng::{normal, rng_from_seed};
use crate::C64;

use super::pauli::PauliString;
use super::states::MAX_QUBITS;

/// Largest cumulant order supported.
pub const MAX_CUMULANT_ORDER: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "ensemble", rename_all = "snake_case")]
pub enum HamiltonianEnsemble {
    Gue { d: usize },
    /// `(1/√J) Σ_a r_a P_a` with random signs and non-identity Pauli strings.
    Rsps { n: usize, j: usize },
}

#[derive(Clone, Debug)]
pub struct HamiltonianSample {
    pub h: Hermitian<f64>,
    pub ensemble: HamiltonianEnsemble,
    pub seed: u64,
}

/// `H_jj = g_jj/√d`, `H_jk = (g_jk + i g'_jk)/√(2d)`.
pub fn sample_gue(d: usize, seed: u64) -> Result<Hermitian<f64>> {
    if d == 0 || d > 1 << MAX_QUBITS {
        return Err(Error::Domain(format!("GUE dimension {d} outside 1..={}", 1 << MAX_QUBITS)));
    }
    let mut rng = rng_from_seed(seed);
    let (diag, off) = ((d as f64).sqrt(), (2.0 * d as f64).sqrt());
    let mut m = CMatrix::zeros(d);
    for i in 0..d {
        m.set(i, i, C64::new(normal(&mut rng) / diag, 0.0));
        for k in i + 1..d {
            let z = C64::new(normal(&mut rng), normal(&mut rng)) / off;
            m.set(i, k, z);
            m.set(k, i, z.conj());
        }
    }
    Ok(Hermitian::symmetrized(m))
}

pub fn sample_rsps(n: usize, j: usize, seed: u64) -> Result<Hermitian<f64>> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Domain(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    if j == 0 {
        return Err(Error::Domain("RSPS needs at least one term".into()));
    }
    let mut rng = rng_from_seed(seed);
    let d = 1 << n;
    let mut acc = CMatrix::zeros(d);
    let w = 1.0 / (j as f64).sqrt();
    for _ in 0..j {
        let p = PauliString::random_nontrivial(n, &mut rng);
        let sign = if rand::Rng::random::<bool>(&mut rng) { w } else { -w };
        acc = &acc + &p.to_hermitian().into_matrix().scale(sign);
    }
    Ok(Hermitian::symmetrized(acc))
}

pub fn sample_hamiltonian(ensemble: HamiltonianEnsemble, seed: u64) -> Result<HamiltonianSample> {
    let h = match ensemble {
        HamiltonianEnsemble::Gue { d } => sample_gue(d, seed)?,
        HamiltonianEnsemble::Rsps { n, j } => sample_rsps(n, j, seed)?,
    };
    Ok(HamiltonianSample { h, ensemble, seed })
}

/// `e^{−βH} / tr e^{−βH}`.
pub fn gibbs_state(h: &Hermitian<f64>, beta: f64) -> Result<Density<f64>> {
    gibbs(h, beta)
}

/// Normalized moments `μ_k = tr(H^k)/d` for `k = 1..=k_max`.
pub fn normalized_moments(h: &Hermitian<f64>, k_max: usize) -> Result<Vec<f64>> {
    let vals = h.eigenvalues()?;
    let d = vals.len() as f64;
    Ok((1..=k_max).map(|k| vals.iter().map(|v| v.powi(k as i32)).sum::<f64>() / d).collect())
}

fn check_order(k_max: usize) -> Result<()> {
    if k_max == 0 || k_max > MAX_CUMULANT_ORDER {
        return Err(Error::Domain(format!("cumulant order {k_max} outside 1..={MAX_CUMULANT_ORDER}")));
    }
    Ok(())
}

/// Block sizes of every set partition of `{0, …, n−1}`.
fn set_partitions(n: usize) -> Vec<Vec<usize>> {
    // restricted growth strings: a[i] ≤ 1 + max(a[..i])
    let mut out = Vec::new();
    let mut a = vec![0usize; n];
    fn rec(i: usize, blocks: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == a.len() {
            let mut sizes = vec![0; blocks];
            for &b in a.iter() {
                sizes[b] += 1;
            }
            out.push(sizes);
            return;
        }
        for b in 0..=blocks {
            a[i] = b;
            rec(i + 1, blocks.max(b + 1), a, out);
        }
    }
    if n > 0 {
        rec(1, 1, &mut a, &mut out);
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// `κ_n = Σ_π (−1)^{|π|−1} (|π|−1)! Π_{B∈π} μ_{|B|}` from normalized moments.
pub fn cumulants_from_moments(mu: &[f64]) -> Vec<f64> {
    (1..=mu.len())
        .map(|n| {
            set_partitions(n)
                .iter()
                .map(|sizes| {
                    let b = sizes.len();
                    let sign = if b % 2 == 1 { 1.0 } else { -1.0 };
                    sign * factorial(b - 1) * sizes.iter().map(|&s| mu[s - 1]).product::<f64>()
                })
                .sum()
        })
        .collect()
}

/// `κ_n = μ_n − Σ_{m<n} C(n−1, m−1) κ_m μ_{n−m}`.
pub fn cumulants_by_recursion(mu: &[f64]) -> Vec<f64> {
    let mut kappa: Vec<f64> = Vec::with_capacity(mu.len());
    for n in 1..=mu.len() {
        let mut k = mu[n - 1];
        let mut binom = 1.0;
        for m in 1..n {
            k -= binom * kappa[m - 1] * mu[n - m - 1];
            binom = binom * (n - m) as f64 / m as f64;
        }
        kappa.push(k);
    }
    kappa
}

/// `κ_1, …, κ_{k_max}` of the spectrum of `H`.
pub fn hamiltonian_cumulants(h: &Hermitian<f64>, k_max: usize) -> Result<Vec<f64>> {
    check_order(k_max)?;
    Ok(cumulants_from_moments(&normalized_moments(h, k_max)?))
}

/// `Σ_{k=2}^{k_max} ((−β)^k / k!)(k − 1) κ_k`, the small-β expansion of `S(ρ_β ‖ I/d)`.
pub fn gibbs_relative_entropy_series(h: &Hermitian<f64>, beta: f64, k_max: usize) -> Result<f64> {
    let kappa = hamiltonian_cumulants(h, k_max)?;
    Ok((2..=k_max).map(|k| (-beta).powi(k as i32) / factorial(k) * (k - 1) as f64 * kappa[k - 1]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (1..=8).map(|n| set_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 15, 52, 203, 877, 4140]);
    }

    #[test]
    fn degenerate_spectrum_has_no_higher_cumulants() {
        let k = hamiltonian_cumulants(&Hermitian::scaled_identity(4, 0.7), 8).unwrap();
        assert!((k[0] - 0.7).abs() < 1e-15);
        assert!(k[1..].iter().all(|v| v.abs() < 1e-13), "{k:?}");
    }

    #[test]
    fn partition_formula_matches_recursion() {
        let h = sample_gue(16, 3).unwrap();
        let mu = normalized_moments(&h, 8).unwrap();
        let a = cumulants_from_moments(&mu);
        let b = cumulants_by_recursion(&mu);
        assert!((a[1] - (mu[1] - mu[0] * mu[0])).abs() < 1e-14);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12 * (1.0 + y.abs()), "{x} vs {y}");
        }
    }

    #[test]
    fn gibbs_two_level_populations() {
        let (beta, e) = (0.8, 1.5);
        let rho = gibbs_state(&Hermitian::diag(&[0.0, e]), beta).unwrap();
        let z = 1.0 + (-beta * e).exp();
        assert!((rho.as_hermitian().entry(0, 0).re - 1.0 / z).abs() < 1e-15);
        assert!((rho.as_hermitian().entry(1, 1).re - (-beta * e).exp() / z).abs() < 1e-15);
    }

    #[test]
    fn gibbs_series_at_high_temperature() {
        let h = sample_gue(32, 8).unwrap();
        for beta in [0.05, 0.1, 0.2] {
            let exact = gibbs_state(&h, beta).unwrap().relative_entropy_vs_mixed().unwrap();
            let series = gibbs_relative_entropy_series(&h, beta, 8).unwrap();
            assert!((exact - series).abs() < 1e-4, "beta {beta}: {exact} vs {series}");
        }
    }

    #[test]
    fn rsps_is_hermitian_and_traceless() {
        let h = sample_rsps(3, 27, 1).unwrap();
        assert!(h.trace().abs() < 1e-12);
    }
}
