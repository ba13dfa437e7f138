//! Seeded randomness and random matrix samplers.
//!
//! Every stream is a ChaCha8 generator. Independent sub-streams come from
//! splitmix64: stream `k` of seed `s` is seeded with the `k`-th splitmix64
//! output started at `s`, so reruns and fan-outs see identical draws.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{CMatrix, Hermitian};
use crate::scalar::Real;

pub type Rng64 = ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of sub-stream `stream` under `seed`.
pub fn sub_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed.wrapping_add(GOLDEN_GAMMA.wrapping_mul(stream.wrapping_add(1))))
}

pub fn rng_from_seed(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sub_rng(seed: u64, stream: u64) -> Rng64 {
    rng_from_seed(sub_seed(seed, stream))
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Standard complex Gaussian with `E|z|² = 1`.
pub fn complex_normal<T: Real>(rng: &mut impl Rng) -> Complex<T> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Complex::new(T::lit(normal(rng) * s), T::lit(normal(rng) * s))
}

/// Hermitian matrix with `N(0,1)` diagonal and standard complex Gaussian off-diagonal entries.
pub fn gaussian_hermitian<T: Real>(d: usize, rng: &mut impl Rng) -> Hermitian<T> {
    let mut m = CMatrix::zeros(d);
    for i in 0..d {
        m.set(i, i, Complex::new(T::lit(normal(rng)), T::zero()));
        for j in i + 1..d {
            let z = complex_normal(rng);
            m.set(i, j, z);
            m.set(j, i, z.conj());
        }
    }
    Hermitian::symmetrized(m)
}

/// Gaussian Hermitian matrix rescaled to operator norm `norm`.
pub fn hermitian_with_op_norm<T: Real>(d: usize, norm: T, rng: &mut impl Rng) -> Hermitian<T> {
    loop {
        let g = gaussian_hermitian::<T>(d, rng);
        let n = g.op_norm().expect("eigensolver converges on Gaussian samples");
        if n > T::zero() {
            return g.scale(norm / n);
        }
    }
}

/// Uniformly random unit vector in `C^d`.
pub fn haar_vector<T: Real>(d: usize, rng: &mut impl Rng) -> Vec<Complex<T>> {
    loop {
        let v: Vec<Complex<T>> = (0..d).map(|_| complex_normal(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n > T::zero() {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// Haar-random unitary: Gram-Schmidt on a complex Gaussian matrix, which is
/// QR with a positive diagonal in `R`.
pub fn haar_unitary<T: Real>(d: usize, rng: &mut impl Rng) -> CMatrix<T> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut cols: Vec<Vec<Complex<T>>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<Complex<T>> = (0..d).map(|_| complex_normal(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let dot = q.iter().zip(&v).fold(zero, |s, (a, b)| s + a.conj() * b);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= *y * dot;
                }
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if n > T::lit(1e-8) {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    CMatrix::from_fn(d, |i, j| cols[j][i])
}
