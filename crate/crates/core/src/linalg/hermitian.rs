use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex;

use super::eigen::{eig_with, eigenvalues_only, EigenDecomposition, EigenMethod, AUTO_JACOBI_MAX_DIM};
use super::matrix::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense complex Hermitian matrix.
///
/// The eigendecomposition is computed on first use and cached, so repeated
/// spectral queries on the same matrix cost one solve.
pub struct Hermitian<T: Real> {
    mat: CMatrix<T>,
    eig: OnceLock<EigenDecomposition<T>>,
}

impl<T: Real> Clone for Hermitian<T> {
    fn clone(&self) -> Self {
        Self { mat: self.mat.clone(), eig: self.eig.clone() }
    }
}

impl<T: Real> PartialEq for Hermitian<T> {
    fn eq(&self, other: &Self) -> bool {
        self.mat == other.mat
    }
}

impl<T: Real> fmt::Debug for Hermitian<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hermitian").field("dim", &self.dim()).field("entries", &self.mat.as_slice()).finish()
    }
}

/// Operator, trace and Frobenius norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Norms<T> {
    pub op: T,
    pub trace: T,
    pub frobenius: T,
}

impl<T: Real> Hermitian<T> {
    /// Validates Hermiticity to `T::HERMITIAN_TOL` and symmetrizes as `(A + A†)/2`.
    pub fn new(mat: CMatrix<T>) -> Result<Self> {
        if mat.dim() == 0 {
            return Err(Error::Domain("Hermitian matrix must have dim >= 1".into()));
        }
        let (dev, row, col) = mat.hermitian_defect();
        if !(dev.to_f64_lossy() <= T::HERMITIAN_TOL) {
            return Err(Error::NotHermitian { row, col, deviation: dev.to_f64_lossy() });
        }
        Ok(Self::symmetrized(mat))
    }

    /// `(A + A†)/2` with no tolerance check.
    pub fn symmetrized(mut mat: CMatrix<T>) -> Self {
        let d = mat.dim();
        let half = T::lit(0.5);
        for i in 0..d {
            let z = mat.get(i, i);
            mat.set(i, i, Complex::new(z.re, T::zero()));
            for j in i + 1..d {
                let avg = (mat.get(i, j) + mat.get(j, i).conj()) * half;
                mat.set(i, j, avg);
                mat.set(j, i, avg.conj());
            }
        }
        Self { mat, eig: OnceLock::new() }
    }

    pub fn from_vec(dim: usize, entries: Vec<Complex<T>>) -> Result<Self> {
        Self::new(CMatrix::from_vec(dim, entries)?)
    }

    /// Row-major real/imaginary pairs, the on-disk matrix format.
    pub fn from_pairs(dim: usize, pairs: &[(T, T)]) -> Result<Self> {
        Self::from_vec(dim, pairs.iter().map(|&(re, im)| Complex::new(re, im)).collect())
    }

    pub fn to_pairs(&self) -> Vec<(T, T)> {
        self.mat.as_slice().iter().map(|z| (z.re, z.im)).collect()
    }

    /// Real symmetric matrix from rows.
    pub fn from_real_rows(rows: &[&[T]]) -> Result<Self> {
        let d = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, found: bad.len() });
        }
        Self::new(CMatrix::from_fn(d, |i, j| Complex::new(rows[i][j], T::zero())))
    }

    pub fn zeros(dim: usize) -> Self {
        let vals = vec![T::zero(); dim];
        Self::diag(&vals)
    }

    pub fn identity(dim: usize) -> Self {
        Self::scaled_identity(dim, T::one())
    }

    pub fn scaled_identity(dim: usize, c: T) -> Self {
        Self::diag(&vec![c; dim])
    }

    /// Real diagonal matrix; its eigendecomposition is filled in directly.
    pub fn diag(values: &[T]) -> Self {
        let d = values.len();
        let mut vecs = vec![Complex::new(T::zero(), T::zero()); d * d];
        for k in 0..d {
            vecs[k * d + k] = Complex::new(T::one(), T::zero());
        }
        let eig = EigenDecomposition::from_parts(values.to_vec(), vecs).expect("square by construction");
        Self::from_eigen(eig)
    }

    /// `Σ λ_k v_k v_k†` from a known decomposition, which is cached as-is.
    pub fn from_eigen(eig: EigenDecomposition<T>) -> Self {
        let mat = eig.synthesize(eig.eigenvalues());
        let out = Self::symmetrized(mat);
        let _ = out.eig.set(eig);
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        self.mat.get(i, j)
    }

    #[inline]
    pub fn as_matrix(&self) -> &CMatrix<T> {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.mat
    }

    pub fn is_eig_cached(&self) -> bool {
        self.eig.get().is_some()
    }

    /// Cached eigendecomposition (Jacobi for small `d`, tridiagonal QL above).
    pub fn eig(&self) -> Result<&EigenDecomposition<T>> {
        if let Some(e) = self.eig.get() {
            return Ok(e);
        }
        let e = eig_with(&self.mat, EigenMethod::Auto)?;
        let _ = self.eig.set(e);
        Ok(self.eig.get().expect("just set"))
    }

    /// Uncached solve with an explicit method.
    pub fn eig_using(&self, method: EigenMethod) -> Result<EigenDecomposition<T>> {
        eig_with(&self.mat, method)
    }

    pub fn eigenvalues(&self) -> Result<&[T]> {
        Ok(self.eig()?.eigenvalues())
    }

    pub fn trace(&self) -> T {
        self.mat.trace().re
    }

    /// `V diag(f(λ)) V†`. Errors if `f` is not finite on the spectrum.
    pub fn apply_spectral(&self, f: impl Fn(T) -> T) -> Result<Self> {
        let e = self.eig()?;
        let mut vals = Vec::with_capacity(self.dim());
        for &l in e.eigenvalues() {
            let y = f(l);
            if !y.is_finite() {
                return Err(Error::SpectralOverflow { eigenvalue: l.to_f64_lossy() });
            }
            vals.push(y);
        }
        Ok(Self::from_eigen_shared(e, vals))
    }

    /// Same as [`apply_spectral`](Self::apply_spectral) with a fallible function.
    pub fn try_apply_spectral(&self, f: impl Fn(T) -> Result<T>) -> Result<Self> {
        let e = self.eig()?;
        let mut vals = Vec::with_capacity(self.dim());
        for &l in e.eigenvalues() {
            let y = f(l)?;
            if !y.is_finite() {
                return Err(Error::SpectralOverflow { eigenvalue: l.to_f64_lossy() });
            }
            vals.push(y);
        }
        Ok(Self::from_eigen_shared(e, vals))
    }

    /// `tr f(A)`.
    pub fn trace_spectral(&self, f: impl Fn(T) -> T) -> Result<T> {
        let mut acc = T::zero();
        for &l in self.eigenvalues()? {
            let y = f(l);
            if !y.is_finite() {
                return Err(Error::SpectralOverflow { eigenvalue: l.to_f64_lossy() });
            }
            acc += y;
        }
        Ok(acc)
    }

    /// Attaches a decomposition already known to belong to this matrix.
    pub(crate) fn with_eig(self, e: EigenDecomposition<T>) -> Self {
        let _ = self.eig.set(e);
        self
    }

    /// New matrix sharing this one's eigenvectors with replacement eigenvalues.
    pub fn from_eigen_shared(e: &EigenDecomposition<T>, vals: Vec<T>) -> Self {
        let d = e.dim();
        let eig = EigenDecomposition::from_parts(vals, e.vectors_flat().to_vec()).expect("dims agree");
        debug_assert_eq!(eig.dim(), d);
        Self::from_eigen(eig)
    }

    /// `Re tr(AB)`, asserting the imaginary part is at most `1e-10·max(1, ‖A‖_F‖B‖_F)`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        let z = self.mat.trace_product(&other.mat);
        let scale = T::one().max(self.mat.frobenius_norm() * other.mat.frobenius_norm());
        assert!(
            z.im.abs() <= T::lit(1e-10) * scale,
            "tr(AB) of Hermitian matrices has imaginary part {}",
            z.im
        );
        Ok(z.re)
    }

    pub fn norms(&self) -> Result<Norms<T>> {
        let vals = self.eigenvalues()?;
        let op = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let trace = vals.iter().map(|v| v.abs()).sum();
        let frobenius = vals.iter().map(|v| *v * *v).sum::<T>().sqrt();
        Ok(Norms { op, trace, frobenius })
    }

    /// `(λ_min, λ_max)`. Uses the cached decomposition when present and a
    /// values-only solve otherwise, without caching it.
    pub fn extreme_eigenvalues(&self) -> Result<(T, T)> {
        if let Some(e) = self.eig.get() {
            return Ok((e.min(), e.max()));
        }
        if self.dim() <= AUTO_JACOBI_MAX_DIM {
            let e = self.eig()?;
            return Ok((e.min(), e.max()));
        }
        let vals = eigenvalues_only(&self.mat)?;
        Ok((vals[0], vals[vals.len() - 1]))
    }

    pub fn op_norm(&self) -> Result<T> {
        let (lo, hi) = self.extreme_eigenvalues()?;
        Ok(lo.abs().max(hi.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.mat.frobenius_norm()
    }

    pub fn scale(&self, c: T) -> Self {
        let out = Self { mat: self.mat.scale(c), eig: OnceLock::new() };
        if let Some(e) = self.eig.get() {
            // c < 0 reverses the order, from_parts re-sorts
            let vals = e.eigenvalues().iter().map(|&v| v * c).collect();
            let _ = out.eig.set(EigenDecomposition::from_parts(vals, e.vectors_flat().to_vec()).expect("dims agree"));
        }
        out
    }

    /// `A + cI`, keeping any cached eigenvectors.
    pub fn shift(&self, c: T) -> Self {
        let mut m = self.mat.clone();
        for i in 0..self.dim() {
            let z = m.get(i, i);
            m.set(i, i, Complex::new(z.re + c, z.im));
        }
        let out = Self { mat: m, eig: OnceLock::new() };
        if let Some(e) = self.eig.get() {
            let vals = e.eigenvalues().iter().map(|&v| v + c).collect();
            let _ = out.eig.set(EigenDecomposition::from_parts(vals, e.vectors_flat().to_vec()).expect("dims agree"));
        }
        out
    }

    /// `A + cB`.
    pub fn add_scaled(&self, c: T, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "add_scaled dimension mismatch");
        let data = self.mat.as_slice().iter().zip(other.mat.as_slice()).map(|(a, b)| a + b * c).collect();
        Self { mat: CMatrix::from_vec(self.dim(), data).expect("same size"), eig: OnceLock::new() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self::symmetrized(self.mat.kron(&other.mat))
    }

    /// `A B + B A`, which is Hermitian.
    pub fn anticommutator(&self, other: &Self) -> Self {
        let ab = self.mat.matmul(&other.mat);
        Self::symmetrized(&ab + &ab.adjoint())
    }

    /// `A B A`, which is Hermitian.
    pub fn sandwich(&self, b: &Self) -> Self {
        Self::symmetrized(self.mat.matmul(&b.mat).matmul(&self.mat))
    }

    /// `U A U†` for a square (typically unitary) `U`.
    pub fn conjugate_by(&self, u: &CMatrix<T>) -> Self {
        Self::symmetrized(u.matmul(&self.mat).matmul(&u.adjoint()))
    }

    /// Spectral sign with `|λ| ≤ tol` mapped to zero.
    pub fn sign(&self, tol: T) -> Result<Self> {
        self.apply_spectral(|x| if x > tol { T::one() } else if x < -tol { -T::one() } else { T::zero() })
    }

    /// Partial trace over the subsystems not listed in `keep`.
    ///
    /// `dims` lists subsystem sizes, most significant first; `keep` is any
    /// subset of their indices (order ignored).
    pub fn partial_trace(&self, dims: &[usize], keep: &[usize]) -> Result<Self> {
        let total: usize = dims.iter().product();
        if total != self.dim() || dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadFactorization { dims: dims.to_vec(), dim: self.dim() });
        }
        if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
            return Err(Error::Domain(format!("subsystem index {k} out of range for {} factors", dims.len())));
        }
        let n = dims.len();
        let kept: Vec<bool> = (0..n).map(|i| keep.contains(&i)).collect();
        let out_dim: usize = (0..n).filter(|&i| kept[i]).map(|i| dims[i]).product();

        // split each full index into (kept index, traced index)
        let split = |mut idx: usize| -> (usize, usize) {
            let (mut k, mut kmul, mut r, mut rmul) = (0, 1, 0, 1);
            for s in (0..n).rev() {
                let digit = idx % dims[s];
                idx /= dims[s];
                if kept[s] {
                    k += digit * kmul;
                    kmul *= dims[s];
                } else {
                    r += digit * rmul;
                    rmul *= dims[s];
                }
            }
            (k, r)
        };
        let parts: Vec<(usize, usize)> = (0..total).map(split).collect();
        let mut out = CMatrix::zeros(out_dim);
        for i in 0..total {
            let (ki, ri) = parts[i];
            let row = self.mat.row(i);
            for (j, &z) in row.iter().enumerate() {
                let (kj, rj) = parts[j];
                if ri == rj {
                    let cur = out.get(ki, kj);
                    out.set(ki, kj, cur + z);
                }
            }
        }
        Ok(Self::symmetrized(out))
    }
}

impl<T: Real> Add for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn add(self, rhs: Self) -> Hermitian<T> {
        Hermitian { mat: &self.mat + &rhs.mat, eig: OnceLock::new() }
    }
}

impl<T: Real> Sub for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn sub(self, rhs: Self) -> Hermitian<T> {
        Hermitian { mat: &self.mat - &rhs.mat, eig: OnceLock::new() }
    }
}

impl<T: Real> Neg for &Hermitian<T> {
    type Output = Hermitian<T>;
    fn neg(self) -> Hermitian<T> {
        self.scale(-T::one())
    }
}
