use num_complex::Complex;

use super::eigen::EigenDecomposition;
use super::hermitian::Hermitian;
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Eigenvalues below this count as exact zeros in entropy sums.
pub const ENTROPY_FLOOR: f64 = 1e-14;

/// Positive semidefinite Hermitian matrix with unit trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Density<T: Real> {
    h: Hermitian<T>,
}

impl<T: Real> Density<T> {
    /// Checks `λ_min ≥ −T::DENSITY_TOL` and `|tr − 1| ≤ T::DENSITY_TOL`.
    pub fn new(h: Hermitian<T>) -> Result<Self> {
        let tol = T::lit(T::DENSITY_TOL);
        let min = h.eig()?.min();
        let tr = h.trace();
        if min < -tol || (tr - T::one()).abs() > tol || !tr.is_finite() {
            return Err(Error::NotDensity { min_eigenvalue: min.to_f64_lossy(), trace: tr.to_f64_lossy() });
        }
        Ok(Self { h })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let w = T::one() / T::from_usize_lossy(dim);
        Self { h: Hermitian::scaled_identity(dim, w) }
    }

    /// `|ψ⟩⟨ψ|` after normalizing `ψ`.
    pub fn pure(psi: &[Complex<T>]) -> Result<Self> {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::Domain("pure state vector must be nonzero and finite".into()));
        }
        let v: Vec<Complex<T>> = psi.iter().map(|z| z / norm).collect();
        let d = v.len();
        Self::new(Hermitian::symmetrized(CMatrix::from_fn(d, |i, j| v[i] * v[j].conj())))
    }

    /// Mixture with weights `w` of the orthonormal basis `eig`; weights are
    /// normalized to sum to one.
    pub fn from_spectrum(eig_vectors: &EigenDecomposition<T>, weights: &[T]) -> Result<Self> {
        if weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::Domain("spectral weights must be nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::Domain("spectral weights must have positive sum".into()));
        }
        let w: Vec<T> = weights.iter().map(|&x| x / total).collect();
        Self::new(Hermitian::from_eigen_shared(eig_vectors, w))
    }

    /// Real diagonal density; weights are normalized.
    pub fn diag(weights: &[T]) -> Result<Self> {
        let total: T = weights.iter().copied().sum();
        if weights.iter().any(|w| *w < T::zero()) || !(total > T::zero()) {
            return Err(Error::Domain("diagonal weights must be nonnegative with positive sum".into()));
        }
        Self::new(Hermitian::diag(&weights.iter().map(|&x| x / total).collect::<Vec<_>>()))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    #[inline]
    pub fn as_hermitian(&self) -> &Hermitian<T> {
        &self.h
    }

    pub fn into_hermitian(self) -> Hermitian<T> {
        self.h
    }

    /// `−Σ λ log λ` over eigenvalues above [`ENTROPY_FLOOR`].
    pub fn von_neumann_entropy(&self) -> Result<T> {
        let floor = T::lit(ENTROPY_FLOOR);
        Ok(self
            .h
            .eigenvalues()?
            .iter()
            .filter(|&&l| l > floor)
            .map(|&l| -l * l.ln())
            .sum())
    }

    /// `S(X ‖ I/d) = log d − S(X)`, clamped to `[0, log d]`.
    pub fn relative_entropy_vs_mixed(&self) -> Result<T> {
        let log_d = T::from_usize_lossy(self.dim()).ln();
        let s = log_d - self.von_neumann_entropy()?;
        Ok(s.max(T::zero()).min(log_d))
    }

    /// `(1 − γ)ρ + γ I/d`.
    pub fn depolarize(&self, gamma: T) -> Result<Self> {
        if !(gamma >= T::zero() && gamma <= T::one()) {
            return Err(Error::Domain(format!("depolarizing strength {gamma} outside [0, 1]")));
        }
        let d = T::from_usize_lossy(self.dim());
        let h = self.h.scale(T::one() - gamma).shift(gamma / d);
        Ok(Self { h })
    }

    pub fn purity(&self) -> T {
        self.h.inner(&self.h).unwrap_or_else(|_| T::nan())
    }
}

/// `exp(A) / tr exp(A)` with the spectrum shifted by its maximum first.
pub fn matrix_exp_normalized<T: Real>(a: &Hermitian<T>) -> Result<Density<T>> {
    let e = a.eig()?;
    let top = e.max();
    let w: Vec<T> = e.eigenvalues().iter().map(|&l| (l - top).exp()).collect();
    let z: T = w.iter().copied().sum();
    let w: Vec<T> = w.into_iter().map(|x| x / z).collect();
    Ok(Density { h: Hermitian::from_eigen_shared(e, w) })
}

/// Negated-spectrum Gibbs state `exp(−βH)/Z`.
pub fn gibbs<T: Real>(h: &Hermitian<T>, beta: T) -> Result<Density<T>> {
    if !beta.is_finite() {
        return Err(Error::Domain("inverse temperature must be finite".into()));
    }
    matrix_exp_normalized(&h.scale(-beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Density<f64>;

    #[test]
    fn entropy_endpoints() {
        assert!(D::maximally_mixed(5).relative_entropy_vs_mixed().unwrap().abs() < 1e-15);
        let p = D::pure(&[Complex::new(0.0, 1.0), Complex::new(1.0, 0.0)]).unwrap();
        assert!((p.relative_entropy_vs_mixed().unwrap() - 2f64.ln()).abs() < 1e-12);
        let half = D::diag(&[0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!((half.relative_entropy_vs_mixed().unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_densities() {
        assert!(D::new(Hermitian::diag(&[1.2, -0.2])).is_err());
        assert!(D::new(Hermitian::diag(&[0.6, 0.6])).is_err());
        assert!(D::new(Hermitian::diag(&[1.0 + 1e-11, -1e-11])).is_ok());
    }

    #[test]
    fn softmax_oracle() {
        let x = matrix_exp_normalized(&Hermitian::diag(&[1.0, 2.0])).unwrap();
        let e = std::f64::consts::E;
        let z = e + e * e;
        assert!((x.as_hermitian().entry(0, 0).re - e / z).abs() < 1e-15);
        assert!((x.as_hermitian().entry(1, 1).re - e * e / z).abs() < 1e-15);
    }

    #[test]
    fn exp_of_zero_is_mixed() {
        let x = matrix_exp_normalized(&Hermitian::<f64>::zeros(4)).unwrap();
        assert_eq!(x, D::maximally_mixed(4));
    }

    #[test]
    fn dominant_eigenvalue_wins() {
        let x = matrix_exp_normalized(&Hermitian::<f64>::diag(&[0.0, -1e4])).unwrap();
        assert!((x.as_hermitian().entry(0, 0).re - 1.0).abs() < 1e-15);
        assert!((x.as_hermitian().trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gibbs_two_level() {
        let beta = 0.7;
        let g = gibbs(&Hermitian::diag(&[0.0, 1.3]), beta).unwrap();
        let z = 1.0 + (-beta * 1.3f64).exp();
        assert!((g.as_hermitian().entry(0, 0).re - 1.0 / z).abs() < 1e-15);
        assert_eq!(gibbs(&Hermitian::diag(&[0.3, 2.0]), 0.0).unwrap(), D::maximally_mixed(2));
    }

    #[test]
    fn depolarize_endpoints() {
        let p = D::diag(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(p.depolarize(0.0).unwrap(), p);
        let m = p.depolarize(1.0).unwrap();
        assert!((m.as_hermitian() - D::maximally_mixed(3).as_hermitian()).frobenius_norm() < 1e-16);
        assert!(p.depolarize(1.5).is_err());
    }
}
