//! Target-state generators.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, Density, Hermitian};
use crate::rng::{complex_normal, haar_unitary, normal, rng_from_seed, Rng64};
use crate::C64;

/// Largest qubit count the generators accept.
pub const MAX_QUBITS: usize = 10;

fn check_qubits(n: usize) -> Result<usize> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Domain(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(1 << n)
}

/// `n` with `d = 2ⁿ`, or an error when `d` is not a power of two.
pub fn qubit_count(d: usize) -> Result<usize> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::BadFactorization { dims: vec![2], dim: d });
    }
    Ok(d.trailing_zeros() as usize)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("depolarizing strength {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// `(1 − γ)ρ + γ I/d`.
pub fn depolarize_global(rho: &Density<f64>, gamma: f64) -> Result<Density<f64>> {
    rho.depolarize(gamma)
}

fn depolarize_local_matrix(m: &CMatrix<f64>, n: usize, qubit: usize, gamma: f64) -> CMatrix<f64> {
    let d = m.dim();
    let bit = 1usize << (n - 1 - qubit);
    CMatrix::from_fn(d, |i, j| {
        let keep = m.get(i, j) * (1.0 - gamma);
        if (i ^ j) & bit != 0 {
            return keep;
        }
        // I/2 ⊗ tr_q ρ: average the two diagonal blocks of the traced qubit
        let (i0, j0) = (i & !bit, j & !bit);
        let traced = (m.get(i0, j0) + m.get(i0 | bit, j0 | bit)) * 0.5;
        keep + traced * gamma
    })
}

/// Single-qubit depolarization `(1 − γ)ρ + γ (I₂/2 ⊗ tr_q ρ)` on `qubit`.
pub fn depolarize_local(rho: &Density<f64>, qubit: usize, gamma: f64) -> Result<Density<f64>> {
    check_gamma(gamma)?;
    let n = qubit_count(rho.dim())?;
    if qubit >= n {
        return Err(Error::Domain(format!("qubit {qubit} out of range for {n} qubits")));
    }
    let m = depolarize_local_matrix(rho.as_hermitian().as_matrix(), n, qubit, gamma);
    Density::new(Hermitian::symmetrized(m))
}

/// Left-multiplies `m` by `u` (4×4) acting on qubits `q` and `q + 1`.
fn apply_two_qubit_left(m: &mut CMatrix<f64>, u: &CMatrix<f64>, n: usize, q: usize) {
    let d = m.dim();
    let hi = 1usize << (n - 1 - q);
    let lo = 1usize << (n - 2 - q);
    let mut buf = [C64::new(0.0, 0.0); 4];
    for base in (0..d).filter(|i| i & (hi | lo) == 0) {
        let rows = [base, base | lo, base | hi, base | hi | lo];
        for col in 0..d {
            for (a, out) in buf.iter_mut().enumerate() {
                *out = (0..4).map(|b| u.get(a, b) * m.get(rows[b], col)).sum();
            }
            for (a, &r) in rows.iter().enumerate() {
                m.set(r, col, buf[a]);
            }
        }
    }
}

/// `U ρ U†` for a two-qubit `U` on qubits `q, q + 1`.
fn conjugate_two_qubit(rho: &CMatrix<f64>, u: &CMatrix<f64>, n: usize, q: usize) -> CMatrix<f64> {
    let mut a = rho.clone();
    apply_two_qubit_left(&mut a, u, n, q);
    let mut b = a.adjoint();
    apply_two_qubit_left(&mut b, u, n, q);
    b
}

/// Brickwork circuit on `|0…0⟩`: layer `k` applies Haar-random two-qubit gates
/// on pairs starting at qubit `k mod 2`, then depolarizes every qubit with `γ`.
pub fn noisy_circuit_state(n: usize, depth: usize, gamma: f64, seed: u64) -> Result<Density<f64>> {
    let d = check_qubits(n)?;
    check_gamma(gamma)?;
    if depth == 0 {
        return Err(Error::Domain("circuit depth must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut rho = CMatrix::zeros(d);
    rho.set(0, 0, C64::new(1.0, 0.0));
    for layer in 0..depth {
        let mut q = layer % 2;
        while q + 1 < n {
            let u = haar_unitary::<f64>(4, &mut rng);
            rho = conjugate_two_qubit(&rho, &u, n, q);
            q += 2;
        }
        if gamma > 0.0 {
            for qubit in 0..n {
                rho = depolarize_local_matrix(&rho, n, qubit, gamma);
            }
        }
    }
    Density::new(Hermitian::symmetrized(rho))
}

/// Reduced state on the first factor of dimension `d` of a Haar-random pure
/// state in dimension `d_prime`.
pub fn haar_subsystem_state(d: usize, d_prime: usize, seed: u64) -> Result<Density<f64>> {
    if d == 0 || d_prime == 0 || d_prime % d != 0 {
        return Err(Error::BadFactorization { dims: vec![d, d_prime.checked_div(d).unwrap_or(0)], dim: d_prime });
    }
    let env = d_prime / d;
    let mut rng = rng_from_seed(seed);
    let psi: Vec<C64> = (0..d_prime).map(|_| complex_normal(&mut rng)).collect();
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    // ψ reshaped to a d × env matrix M; the reduced state is M M† / ‖ψ‖²
    let m = CMatrix::from_fn(d, |i, j| (0..env).map(|k| psi[i * env + k] * psi[j * env + k].conj()).sum::<C64>() / norm2);
    Density::new(Hermitian::symmetrized(m))
}

/// Single-qubit Bloch-vector distribution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlochEnsemble {
    /// Every qubit is `I/2`.
    Mixed,
    /// Every qubit is `|0⟩`.
    Zero,
    /// Pure states uniform on the sphere.
    UniformPure,
    /// Uniform on the sphere of radius `radius ≤ 1`.
    Shell { radius: f64 },
    /// The same Bloch vector on every qubit.
    Fixed { r: [f64; 3] },
}

impl BlochEnsemble {
    pub fn sample(&self, rng: &mut impl Rng) -> Result<[f64; 3]> {
        let r = match *self {
            BlochEnsemble::Mixed => [0.0; 3],
            BlochEnsemble::Zero => [0.0, 0.0, 1.0],
            BlochEnsemble::UniformPure => unit_sphere(rng),
            BlochEnsemble::Shell { radius } => unit_sphere(rng).map(|x| x * radius),
            BlochEnsemble::Fixed { r } => r,
        };
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if !(len <= 1.0 + 1e-12) {
            return Err(Error::Domain(format!("Bloch vector length {len} exceeds 1")));
        }
        Ok(r)
    }
}

fn unit_sphere(rng: &mut impl Rng) -> [f64; 3] {
    loop {
        let v = [normal(rng), normal(rng), normal(rng)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 0.0 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// `(I + r·σ)/2`.
pub fn qubit_state(r: [f64; 3]) -> Result<Density<f64>> {
    let m = vec![
        C64::new((1.0 + r[2]) / 2.0, 0.0),
        C64::new(r[0] / 2.0, -r[1] / 2.0),
        C64::new(r[0] / 2.0, r[1] / 2.0),
        C64::new((1.0 - r[2]) / 2.0, 0.0),
    ];
    Density::new(Hermitian::from_vec(2, m)?)
}

/// Tensor product of `n` independent qubits, with their Bloch vectors.
pub fn random_product_state(n: usize, ensemble: &BlochEnsemble, seed: u64) -> Result<(Density<f64>, Vec<[f64; 3]>)> {
    check_qubits(n)?;
    let mut rng: Rng64 = rng_from_seed(seed);
    let blochs = (0..n).map(|_| ensemble.sample(&mut rng)).collect::<Result<Vec<_>>>()?;
    let mut h = Hermitian::identity(1);
    for &r in &blochs {
        h = h.kron(qubit_state(r)?.as_hermitian());
    }
    Ok((Density::new(h)?, blochs))
}

/// `S_ij = E[r_i r_j]` over the samples, where `r_i = tr(P_i σ)`.
pub fn pauli_second_moment(samples: &[[f64; 3]]) -> [[f64; 3]; 3] {
    let mut s = [[0.0; 3]; 3];
    if samples.is_empty() {
        return s;
    }
    for r in samples {
        for i in 0..3 {
            for j in 0..3 {
                s[i][j] += r[i] * r[j];
            }
        }
    }
    let k = samples.len() as f64;
    s.map(|row| row.map(|x| x / k))
}
