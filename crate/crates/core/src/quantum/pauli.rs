use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, EigenDecomposition, Hermitian};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> Hermitian<f64> {
        let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        let m = match self {
            Pauli::I => [l, o, o, l],
            Pauli::X => [o, l, l, o],
            Pauli::Y => [o, -i, i, o],
            Pauli::Z => [l, o, o, -l],
        };
        Hermitian::from_vec(2, m.to_vec()).expect("Pauli matrices are Hermitian")
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    fn phases(self) -> bool {
        matches!(self, Pauli::Y | Pauli::Z)
    }
}

/// Tensor product of single-qubit Paulis; qubit 0 is the leftmost factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Result<Self> {
        if qubit >= n {
            return Err(Error::Domain(format!("qubit {qubit} out of range for {n} qubits")));
        }
        let mut letters = vec![Pauli::I; n];
        letters[qubit] = letter;
        Ok(Self { letters })
    }

    /// Uniform over all `4ⁿ` strings.
    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        Self { letters: (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect() }
    }

    /// Uniform over the `4ⁿ − 1` non-identity strings.
    pub fn random_nontrivial(n: usize, rng: &mut impl Rng) -> Self {
        loop {
            let p = Self::random(n, rng);
            if !p.is_identity() || n == 0 {
                return p;
            }
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    fn masks(&self) -> (usize, usize, u32) {
        let n = self.letters.len();
        let (mut flip, mut phase, mut ys) = (0usize, 0usize, 0u32);
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = 1 << (n - 1 - q);
            if p.flips() {
                flip |= bit;
            }
            if p.phases() {
                phase |= bit;
            }
            if p == Pauli::Y {
                ys += 1;
            }
        }
        (flip, phase, ys)
    }

    /// `P|j⟩ = c_j |j ⊕ flip⟩`; returns `(flip, c_j)` for every basis index `j`.
    fn action(&self) -> (usize, Vec<C64>) {
        let (flip, phase, ys) = self.masks();
        let iy = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)][(ys % 4) as usize];
        let coeffs = (0..self.dim()).map(|j| if (j & phase).count_ones() % 2 == 1 { -iy } else { iy }).collect();
        (flip, coeffs)
    }

    pub fn to_hermitian(&self) -> Hermitian<f64> {
        let d = self.dim();
        let (flip, c) = self.action();
        let mut m = CMatrix::zeros(d);
        for (j, &cj) in c.iter().enumerate() {
            m.set(j ^ flip, j, cj);
        }
        Hermitian::new(m).expect("Pauli strings are Hermitian")
    }

    /// `P` scaled by `c`, with its eigendecomposition cached.
    pub fn scaled_hermitian(&self, c: f64) -> Hermitian<f64> {
        let d = self.dim();
        let (flip, coeffs) = self.action();
        if flip == 0 {
            let vals: Vec<f64> = coeffs.iter().map(|z| c * z.re).collect();
            return Hermitian::diag(&vals);
        }
        let h = self.to_hermitian().scale(c);
        // each pair {j, j ⊕ flip} spans a 2×2 block [[0, conj(c_j)], [c_j, 0]]
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut values = Vec::with_capacity(d);
        let mut vectors = vec![C64::new(0.0, 0.0); d * d];
        let mut k = 0;
        for j in 0..d {
            let jj = j ^ flip;
            if j > jj {
                continue;
            }
            // (|j⟩ ± c_j|jj⟩)/√2 has eigenvalue ±1
            let cj = coeffs[j];
            for sign in [1.0, -1.0] {
                values.push(sign * c);
                vectors[k * d + j] = C64::new(s, 0.0);
                vectors[k * d + jj] = cj * sign * s;
                k += 1;
            }
        }
        let e = EigenDecomposition::from_parts(values, vectors).expect("sizes agree");
        h.with_eig(e)
    }

    /// `tr(P ρ)` without forming `P`.
    pub fn expectation(&self, rho: &Hermitian<f64>) -> f64 {
        let (flip, c) = self.action();
        (0..self.dim()).map(|j| (c[j] * rho.entry(j, j ^ flip)).re).sum()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            let c = match p {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(Error::Domain(format!("invalid Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }
}
