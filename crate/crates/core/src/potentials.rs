//! Time-indexed one-dimensional potentials and their closed-form regret bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::special::{simpson, two_x_dawson_minus_one};

/// Largest exponent accepted before `exp` leaves double range.
pub const MAX_EXPONENT: f64 = 700.0;

/// Simpson intervals used by both quadrature identities.
pub const QUADRATURE_PANELS: usize = 4000;

/// Half-width, in standard deviations, of the Laplace quadrature window.
pub const LAPLACE_HALF_WIDTH: f64 = 12.0;

/// Upper end of the Gaussian-ensemble integral over `z`.
pub const ENSEMBLE_Z_MAX: f64 = 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum PotentialFamily<T> {
    /// `exp(η s)`, the time-independent potential behind MMWU.
    Exponential { rate: T },
    /// `(ε/(d√t)) exp(s²/(2ε²t))`.
    ExpSquare,
    /// Double integral of `e^{u²}`, whose second derivative is the exp-square potential over `ε²`.
    Erfi,
    /// `(ε/(d√t)) cosh(z s/(ε√t))`.
    Cosh { z: T },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec<T> {
    pub family: PotentialFamily<T>,
    pub eps: T,
    pub dim: usize,
}

impl<T: Real> PotentialSpec<T> {
    pub fn new(family: PotentialFamily<T>, eps: T, dim: usize) -> Result<Self> {
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(Error::Domain(format!("potential eps must be positive, got {eps}")));
        }
        if dim == 0 {
            return Err(Error::Domain("potential dim must be at least 1".into()));
        }
        match family {
            PotentialFamily::Exponential { rate } if !(rate > T::zero()) => {
                return Err(Error::Domain(format!("exponential rate must be positive, got {rate}")))
            }
            PotentialFamily::Cosh { z } if !(z >= T::zero()) => {
                return Err(Error::Domain(format!("cosh parameter must be nonnegative, got {z}")))
            }
            _ => {}
        }
        Ok(Self { family, eps, dim })
    }

    pub fn exp_square(eps: T, dim: usize) -> Result<Self> {
        Self::new(PotentialFamily::ExpSquare, eps, dim)
    }

    pub fn erfi(eps: T, dim: usize) -> Result<Self> {
        Self::new(PotentialFamily::Erfi, eps, dim)
    }

    pub fn cosh(z: T, eps: T, dim: usize) -> Result<Self> {
        Self::new(PotentialFamily::Cosh { z }, eps, dim)
    }

    pub fn exponential(rate: T, eps: T, dim: usize) -> Result<Self> {
        Self::new(PotentialFamily::Exponential { rate }, eps, dim)
    }

    /// Same `ε` and `d`, different family.
    pub fn with_family(&self, family: PotentialFamily<T>) -> Result<Self> {
        Self::new(family, self.eps, self.dim)
    }

    /// `Φ_t(s)`.
    pub fn eval(&self, s: T, t: u64) -> Result<T> {
        let tf = time(t)?;
        let eps = self.eps;
        let d = T::from_usize_lossy(self.dim);
        let range = || Error::PotentialRange { s: s.to_f64_lossy(), t };
        match self.family {
            PotentialFamily::ExpSquare => {
                let u = s * s / (T::lit(2.0) * eps * eps * tf);
                if !(u <= T::lit(MAX_EXPONENT)) {
                    return Err(range());
                }
                Ok(eps / (d * tf.sqrt()) * u.exp())
            }
            PotentialFamily::Erfi => {
                let u = s * s / (T::lit(2.0) * eps * eps * tf);
                if !(u <= T::lit(MAX_EXPONENT)) {
                    return Err(range());
                }
                // (ε√t/d) e^{a²} (2aD(a) − 1), a = |s|/(ε√(2t))
                let a = u.sqrt();
                Ok(eps * tf.sqrt() / d * u.exp() * two_x_dawson_minus_one(a))
            }
            PotentialFamily::Cosh { z } => {
                let arg = z * s / (eps * tf.sqrt());
                if !(arg.abs() <= T::lit(MAX_EXPONENT)) {
                    return Err(range());
                }
                Ok(eps / (d * tf.sqrt()) * arg.cosh())
            }
            PotentialFamily::Exponential { rate } => {
                let arg = rate * s;
                if !(arg <= T::lit(MAX_EXPONENT)) || arg.is_nan() {
                    return Err(range());
                }
                Ok(arg.exp())
            }
        }
    }

    /// `Φ_t` evaluated with the potential's own overflow check, as a closure.
    pub fn at(&self, t: u64) -> impl Fn(T) -> Result<T> + '_ {
        move |s| self.eval(s, t)
    }
}

fn time<T: Real>(t: u64) -> Result<T> {
    if t == 0 {
        return Err(Error::Domain("time index starts at 1".into()));
    }
    T::from_u64(t).ok_or_else(|| Error::Domain(format!("time index {t} not representable")))
}

/// `min_s Φ_t(s) − ½[Φ_{t+1}(s+ε) + Φ_{t+1}(s−ε)]` over `grid`.
pub fn check_recursion<T: Real>(p: &PotentialSpec<T>, t: u64, grid: &[T]) -> Result<T> {
    if grid.is_empty() {
        return Err(Error::Domain("recursion grid is empty".into()));
    }
    let half = T::lit(0.5);
    let mut worst = T::infinity();
    for &s in grid {
        let margin = p.eval(s, t)? - half * (p.eval(s + p.eps, t + 1)? + p.eval(s - p.eps, t + 1)?);
        worst = worst.min(margin);
    }
    Ok(worst)
}

/// `n` evenly spaced points on `[a, b]`, endpoints included.
pub fn linspace<T: Real>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let step = (b - a) / T::from_usize_lossy(n - 1);
            (0..n).map(|i| if i == n - 1 { b } else { a + step * T::from_usize_lossy(i) }).collect()
        }
    }
}

fn require_exp_square<T: Real>(p: &PotentialSpec<T>, s: T, t: u64) -> Result<T> {
    if p.family != PotentialFamily::ExpSquare {
        return Err(Error::Domain("quadrature identities are stated for the exp-square potential".into()));
    }
    let tf = time::<T>(t)?;
    if !(s * s / (T::lit(2.0) * p.eps * p.eps * tf) <= T::lit(MAX_EXPONENT)) {
        return Err(Error::PotentialRange { s: s.to_f64_lossy(), t });
    }
    Ok(tf)
}

/// `∫ μ(z) e^{−zs} dz` with `μ(z) = ε²/(√(2π) d) · exp(−½ε²t z²)`, by Simpson's
/// rule on `|z| ≤ 12/(ε√t)`.
pub fn laplace_quadrature_expsq<T: Real>(p: &PotentialSpec<T>, s: T, t: u64) -> Result<T> {
    laplace_quadrature_expsq_window(p, s, t, T::lit(LAPLACE_HALF_WIDTH))
}

/// [`laplace_quadrature_expsq`] with the window half-width given in units of `1/(ε√t)`.
pub fn laplace_quadrature_expsq_window<T: Real>(p: &PotentialSpec<T>, s: T, t: u64, half_width: T) -> Result<T> {
    let tf = require_exp_square(p, s, t)?;
    let eps = p.eps;
    let d = T::from_usize_lossy(p.dim);
    let pref = eps * eps / ((T::lit(2.0) * T::PI()).sqrt() * d);
    let a = T::lit(0.5) * eps * eps * tf;
    let zmax = half_width / (eps * tf.sqrt());
    Ok(pref * simpson(|z| (-(a * z * z) - z * s).exp(), -zmax, zmax, QUADRATURE_PANELS))
}

/// `∫₀^{12} φ(z) Φ^cosh_t(s; z) dz` with `φ(z) = √(2/π) e^{−z²/2}`.
pub fn gaussian_ensemble_decomposition<T: Real>(p: &PotentialSpec<T>, s: T, t: u64) -> Result<T> {
    gaussian_ensemble_decomposition_window(p, s, t, T::lit(ENSEMBLE_Z_MAX))
}

/// [`gaussian_ensemble_decomposition`] with a chosen upper limit on `z`.
pub fn gaussian_ensemble_decomposition_window<T: Real>(p: &PotentialSpec<T>, s: T, t: u64, z_max: T) -> Result<T> {
    let tf = require_exp_square(p, s, t)?;
    let eps = p.eps;
    let d = T::from_usize_lossy(p.dim);
    let y = s / (eps * tf.sqrt());
    let pref = eps / (d * tf.sqrt()) * (T::lit(2.0) / T::PI()).sqrt();
    // e^{−z²/2} cosh(zy) written as a sum of two Gaussians to avoid overflow
    let half = T::lit(0.5);
    let integrand = |z: T| half * ((-(half * z * z) + z * y).exp() + (-(half * z * z) - z * y).exp());
    Ok(pref * simpson(integrand, T::zero(), z_max, QUADRATURE_PANELS))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `l√T (√(8 S) + 6 + 2√2)`.
    ErfiMain,
    /// `2√2 l √(T S) + 4√2 l √(T log T) + 2√e l`.
    Expsq,
    /// `l (S/η_T + ½ Σ η_t)` with `η_t = √(S/t)`.
    MmwuOracle,
    /// `l (√(T log d) + ½ Σ η_t)` with `η_t = √(log d / t)`.
    MmwuMinimax,
}

/// `Σ_{t=1}^T t^{−1/2}`.
pub fn inverse_sqrt_sum(t_max: u64) -> f64 {
    (1..=t_max).map(|t| 1.0 / (t as f64).sqrt()).sum()
}

/// Closed-form regret bound of the named learner against a comparator with
/// relative entropy `s_rel` to the maximally mixed state.
pub fn regret_bound(kind: BoundKind, t_max: u64, l: f64, d: usize, s_rel: f64) -> Result<f64> {
    regret_bound_with_sum(kind, t_max, l, d, s_rel, inverse_sqrt_sum(t_max))
}

/// [`regret_bound`] with `Σ_{t≤T} t^{−1/2}` supplied, for callers that
/// evaluate the bound at every prefix.
pub fn regret_bound_with_sum(kind: BoundKind, t_max: u64, l: f64, d: usize, s_rel: f64, inv_sqrt_sum: f64) -> Result<f64> {
    if t_max == 0 || !(l > 0.0) || d == 0 {
        return Err(Error::Domain(format!("regret_bound needs T >= 1, l > 0, d >= 1 (got T={t_max}, l={l}, d={d})")));
    }
    let log_d = (d as f64).ln();
    if !(s_rel >= 0.0 && s_rel <= log_d + 1e-12) {
        return Err(Error::Domain(format!("relative entropy {s_rel} outside [0, log {d}]")));
    }
    let tf = t_max as f64;
    let rt = tf.sqrt();
    Ok(match kind {
        BoundKind::ErfiMain => l * rt * ((8.0 * s_rel).sqrt() + 6.0 + 2.0 * 2f64.sqrt()),
        BoundKind::Expsq => {
            2.0 * 2f64.sqrt() * l * (tf * s_rel).sqrt()
                + 4.0 * 2f64.sqrt() * l * (tf * tf.ln()).sqrt()
                + 2.0 * std::f64::consts::E.sqrt() * l
        }
        BoundKind::MmwuOracle => l * ((tf * s_rel).sqrt() + 0.5 * s_rel.sqrt() * inv_sqrt_sum),
        BoundKind::MmwuMinimax => l * ((tf * log_d).sqrt() + 0.5 * log_d.sqrt() * inv_sqrt_sum),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn values_at_zero() {
        let (eps, d) = (2.0, 7);
        for t in [1u64, 3, 10] {
            let sq = PotentialSpec::exp_square(eps, d).unwrap().eval(0.0, t).unwrap();
            assert!(rel(sq, eps / (d as f64 * (t as f64).sqrt())) < 1e-15);
            let ef = PotentialSpec::erfi(eps, d).unwrap().eval(0.0, t).unwrap();
            assert!(rel(ef, -eps * (t as f64).sqrt() / d as f64) < 1e-15);
        }
    }

    #[test]
    fn erfi_matches_double_integral_definition() {
        // (ε√t/d)[2∫₀^a ∫₀^u e^{x²} dx du − 1] by nested Simpson
        let (eps, d, t) = (1.5, 3usize, 2u64);
        let p = PotentialSpec::erfi(eps, d).unwrap();
        for s in [-4.0, -1.0, 0.3, 2.0, 5.0] {
            let a = s / (2.0 * eps * eps * t as f64).sqrt();
            let inner = |u: f64| simpson(|x: f64| (x * x).exp(), 0.0, u, 1000);
            let outer = simpson(inner, 0.0, a, 1000);
            let want = eps * (t as f64).sqrt() / d as f64 * (2.0 * outer - 1.0);
            let got = p.eval(s, t).unwrap();
            assert!(rel(got, want) < 1e-10, "s={s}: {got} vs {want}");
        }
    }

    #[test]
    fn erfi_is_even() {
        let p = PotentialSpec::erfi(1.0, 4).unwrap();
        for s in [0.1, 1.0, 3.7, 12.0] {
            assert_eq!(p.eval(s, 5).unwrap(), p.eval(-s, 5).unwrap());
        }
    }

    #[test]
    fn erfi_second_derivative_is_exp_square_over_eps_squared() {
        let (eps, d) = (0.8, 5);
        let pe = PotentialSpec::erfi(eps, d).unwrap();
        let pq = PotentialSpec::exp_square(eps, d).unwrap();
        let h = 1e-4;
        for (s, t) in [(0.0, 1u64), (0.5, 2), (-1.7, 3), (2.9, 8)] {
            let fd = (pe.eval(s + h, t).unwrap() - 2.0 * pe.eval(s, t).unwrap() + pe.eval(s - h, t).unwrap()) / (h * h);
            let want = pq.eval(s, t).unwrap() / (eps * eps);
            assert!(rel(fd, want) < 1e-5, "s={s} t={t}: {fd} vs {want}");
        }
    }

    #[test]
    fn overflow_is_an_error() {
        let p = PotentialSpec::exp_square(1.0, 2).unwrap();
        assert!(p.eval(38.0, 1).is_err());
        assert!(p.eval(38.0, 2).is_ok());
        assert_eq!(PotentialSpec::erfi(1.0, 2).unwrap().eval(40.0, 1), Err(Error::PotentialRange { s: 40.0, t: 1 }));
        assert!(p.eval(1.0, 0).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(PotentialSpec::exp_square(0.0, 2).is_err());
        assert!(PotentialSpec::exp_square(1.0, 0).is_err());
        assert!(PotentialSpec::cosh(-1.0, 1.0, 2).is_err());
        assert!(PotentialSpec::exponential(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn exponential_recursion_fails_at_zero() {
        let (eta, eps) = (0.3, 2.0);
        let p = PotentialSpec::exponential(eta, eps, 4).unwrap();
        let m = check_recursion(&p, 7, &[0.0]).unwrap();
        assert!((m - (1.0 - (eta * eps as f64).cosh())).abs() < 1e-15);
        assert!(m < 0.0);
    }

    #[test]
    fn recursion_holds_for_parameter_free_potentials() {
        let eps = 2.0;
        let grid = linspace(-10.0 * eps, 10.0 * eps, 1001);
        for p in [PotentialSpec::exp_square(eps, 16).unwrap(), PotentialSpec::erfi(eps, 16).unwrap()] {
            for t in [1u64, 2, 5, 33, 64] {
                assert!(check_recursion(&p, t, &grid).unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn quadratures_at_zero() {
        let p = PotentialSpec::exp_square(1.3, 6).unwrap();
        let want = 1.3 / (6.0 * 2f64.sqrt());
        assert!(rel(laplace_quadrature_expsq(&p, 0.0, 2).unwrap(), want) < 1e-12);
        assert!(rel(gaussian_ensemble_decomposition(&p, 0.0, 2).unwrap(), want) < 1e-12);
    }

    #[test]
    fn laplace_at_eps_t4_and_symmetry() {
        let p = PotentialSpec::exp_square(0.7, 3).unwrap();
        let q = laplace_quadrature_expsq(&p, 0.7, 4).unwrap();
        assert!(rel(q, p.eval(0.7, 4).unwrap()) < 1e-8);
        assert!(rel(q, laplace_quadrature_expsq(&p, -0.7, 4).unwrap()) < 1e-12);
    }

    #[test]
    fn ensemble_truncation_is_negligible() {
        let p = PotentialSpec::exp_square(1.0, 2).unwrap();
        let a: f64 = gaussian_ensemble_decomposition(&p, 2.5, 3).unwrap();
        let b = gaussian_ensemble_decomposition_window(&p, 2.5, 3, 24.0).unwrap();
        // doubled window with the same panel count
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn bound_formulas() {
        let l = 0.5;
        let b = regret_bound(BoundKind::ErfiMain, 100, l, 8, 0.0).unwrap();
        assert!((b - l * 10.0 * (6.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
        let b = regret_bound(BoundKind::Expsq, 1, l, 8, 0.0).unwrap();
        assert!((b - 2.0 * std::f64::consts::E.sqrt() * l).abs() < 1e-15);
        assert_eq!(regret_bound(BoundKind::MmwuOracle, 50, l, 8, 0.0).unwrap(), 0.0);
        let s_full = (8f64).ln();
        let o = regret_bound(BoundKind::MmwuOracle, 50, l, 8, s_full).unwrap();
        let m = regret_bound(BoundKind::MmwuMinimax, 50, l, 8, 0.0).unwrap();
        assert!((o - m).abs() < 1e-12);
        assert!(regret_bound(BoundKind::ErfiMain, 0, l, 8, 0.0).is_err());
        assert!(regret_bound(BoundKind::ErfiMain, 10, l, 8, 3.0).is_err());
    }
}
