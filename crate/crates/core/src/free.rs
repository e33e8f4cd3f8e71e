//! Asymptotic (free) rectangular transforms of the symmetrized root measure.
//!
//! For a polynomial `p` the measure is `μ_{𝕊p}`, uniform on `±√r_i`. Pointwise
//! transforms work in `f64` on the real axis to the right of the spectrum;
//! the series forms are generic over [`Scalar`].

use crate::error::{Error, Result};
use crate::poly::{NonnegPoly, RectParams};
use crate::scalar::Scalar;
use crate::series::TruncSeries;

/// Even moments `m_{2k}`, `k = 0..K`, of a symmetric measure.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMoments<T = f64> {
    even: Vec<T>,
}

impl<T: Scalar> SymmetricMoments<T> {
    pub fn new(even: Vec<T>) -> Result<Self> {
        if even.first() != Some(&T::one()) {
            return Err(Error::Domain("moment sequence must start with m_0 = 1".into()));
        }
        Ok(SymmetricMoments { even })
    }

    /// `m_{2k} = (1/d) Σ r_i^k` for `k = 0..=k_max`, from the coefficients.
    pub fn from_poly(p: &NonnegPoly<T>, k_max: usize) -> Self {
        let d = T::from_usize(p.degree());
        let mut even = vec![T::one()];
        even.extend(p.power_sums(k_max).into_iter().map(|s| s / d.clone()));
        SymmetricMoments { even }
    }

    pub fn even_moments(&self) -> &[T] {
        &self.even
    }

    fn coeff(&self, k: usize) -> T {
        self.even.get(k).cloned().unwrap_or_else(T::zero)
    }
}

impl SymmetricMoments<f64> {
    /// Moments of the uniform measure on `±√r_i`.
    pub fn from_roots(roots: &[f64], k_max: usize) -> Result<Self> {
        if roots.is_empty() {
            return Err(Error::Domain("empty root list".into()));
        }
        if let Some(r) = roots.iter().find(|&&r| !(r >= 0.0)) {
            return Err(Error::Domain(format!("negative root {r}")));
        }
        let n = roots.len() as f64;
        let mut pow = vec![1.0; roots.len()];
        let mut even = vec![1.0];
        for _ in 0..k_max {
            for (p, r) in pow.iter_mut().zip(roots) {
                *p *= r;
            }
            even.push(pow.iter().sum::<f64>() / n);
        }
        Ok(SymmetricMoments { even })
    }
}

fn lambda_of<T: Scalar>(lambda: &T) -> Result<()> {
    if *lambda <= T::zero() || *lambda > T::one() {
        return Err(Error::Domain(format!("λ = {} is outside (0, 1]", lambda.to_f64())));
    }
    Ok(())
}

/// `H(x) = x [λ S(x)² + (1-λ) S(x)]` with `S = Σ m_{2k} x^k`, at `order`.
pub fn rect_h_series<T: Scalar>(mom: &SymmetricMoments<T>, lambda: &T, order: usize) -> Result<TruncSeries<T>> {
    lambda_of(lambda)?;
    if order == 0 {
        return Ok(TruncSeries::zero(0));
    }
    let s = TruncSeries::new((0..order - 1).map(|k| mom.coeff(k)).collect())?;
    let inner = s
        .checked_mul(&s)?
        .scale(lambda)
        .checked_add(&s.scale(&(T::one() - lambda.clone())))?;
    Ok(inner.mul_s())
}

/// The rectangular R-transform `U^λ(x / H^{-1}(x) - 1)` at `order`, where
/// `U^λ(y) = (-λ-1 + √((λ+1)² + 4λy)) / (2λ)`.
pub fn free_rect_r_series<T: Scalar>(
    mom: &SymmetricMoments<T>,
    lambda: &T,
    order: usize,
) -> Result<TruncSeries<T>> {
    if order == 0 {
        return Ok(TruncSeries::zero(0));
    }
    let h = rect_h_series(mom, lambda, order + 1)?;
    let hinv = h.comp_inverse()?;
    let y = hinv
        .div_s()?
        .recip()?
        .checked_sub(&TruncSeries::one(order))?;
    let one = T::one();
    let lp1 = lambda.clone() + one;
    let four_l = T::from_usize(4) * lambda.clone();
    let radicand = TruncSeries::constant(lp1.clone() * lp1.clone(), order).checked_add(&y.scale(&four_l))?;
    let two_l = lambda.clone() + lambda.clone();
    let r = radicand
        .sqrt()?
        .checked_sub(&TruncSeries::constant(lp1, order))?
        .scale(&(T::one() / two_l));
    let mut c = r.into_coeffs();
    c[0] = T::zero();
    TruncSeries::new(c)
}

/// Pointwise evaluator of `G`, `H` and the inverse `J` for one polynomial.
#[derive(Debug, Clone)]
pub struct RectCauchy {
    coeffs: Vec<f64>,
    roots: Vec<f64>,
    sqrt_roots: Vec<f64>,
    lambda: f64,
    edge: f64,
}

impl RectCauchy {
    pub fn new<T: Scalar>(p: &NonnegPoly<T>, params: &RectParams) -> Result<Self> {
        if p.degree() != params.d() {
            return Err(Error::Usage(format!("polynomial has degree {} but d = {}", p.degree(), params.d())));
        }
        Ok(Self::with_roots(p.to_f64().coeffs().to_vec(), p.roots()?.roots(), params))
    }

    fn with_roots(coeffs: Vec<f64>, roots: &[f64], params: &RectParams) -> Self {
        let sqrt_roots: Vec<f64> = roots.iter().map(|&r| f64::sqrt(r)).collect();
        let edge = sqrt_roots.iter().cloned().fold(0.0, f64::max);
        RectCauchy { coeffs, roots: roots.to_vec(), sqrt_roots, lambda: params.lambda(), edge }
    }

    /// `√max_root(p)`, the right edge of the symmetrized spectrum.
    pub fn edge(&self) -> f64 {
        self.edge
    }

    fn check(&self, x: f64) -> Result<()> {
        if !(x > self.edge) || !x.is_finite() {
            return Err(Error::Domain(format!("x = {x} is not to the right of the spectrum edge {}", self.edge)));
        }
        Ok(())
    }

    // p'(y)/p(y) from the coefficients where Horner is well conditioned,
    // otherwise summed over the roots (clustered roots are individually
    // inaccurate but the coefficient form breaks down next to the edge)
    fn g_unchecked(&self, x: f64) -> f64 {
        let y = x * x;
        let (mut v, mut dv, mut bound) = (0.0f64, 0.0f64, 0.0f64);
        for &c in &self.coeffs {
            dv = dv * y + v;
            v = v * y + c;
            bound = bound * y + c.abs();
        }
        let d = self.roots.len() as f64;
        if bound <= 1e3 * v.abs() {
            x * dv / (d * v)
        } else {
            x * self.roots.iter().map(|r| 1.0 / (y - r)).sum::<f64>() / d
        }
    }

    fn g_prime(&self, x: f64) -> f64 {
        let n = self.sqrt_roots.len() as f64;
        -self
            .sqrt_roots
            .iter()
            .map(|r| 1.0 / ((x - r) * (x - r)) + 1.0 / ((x + r) * (x + r)))
            .sum::<f64>()
            / (2.0 * n)
    }

    fn h_unchecked(&self, x: f64) -> f64 {
        let g = self.g_unchecked(x);
        g * (self.lambda * g + (1.0 - self.lambda) / x)
    }

    fn h_prime(&self, x: f64) -> f64 {
        let (g, dg) = (self.g_unchecked(x), self.g_prime(x));
        let l = self.lambda;
        2.0 * l * g * dg + (1.0 - l) * (dg / x - g / (x * x))
    }

    /// Cauchy transform of `μ_{𝕊p}`, `G(x) = x p'(x²) / (d p(x²))`.
    pub fn g(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.g_unchecked(x))
    }

    /// `H(x) = G(x) (λ G(x) + (1-λ)/x)`.
    pub fn h(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(self.h_unchecked(x))
    }

    /// The `x > edge` with `H(x) = u`.
    pub fn j(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::Domain(format!("J is defined for u > 0, got {u}")));
        }
        let tol = 1e-13 * (1.0 + u);
        let mut lo = self.edge + 1e-12 * (1.0 + self.edge);
        if self.h_unchecked(lo) < u {
            return Err(Error::Domain(format!("u = {u} is beyond the numerically reachable range of H")));
        }
        let mut hi = 2.0 * lo.max(1.0);
        while self.h_unchecked(hi) > u {
            lo = hi;
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.h_unchecked(x) - u;
            if f.abs() <= tol {
                return Ok(x);
            }
            // H is decreasing: f > 0 means x is left of the root
            if f > 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let df = self.h_prime(x);
            let newton = x - f / df;
            x = if df < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        Ok(x)
    }

    /// `R(s²) = -(λ+1)/(2λ) + √((λ-1)²/(4λ²) + s² J(s²)² / λ)`.
    pub fn free_r(&self, s: f64) -> Result<f64> {
        if s == 0.0 || !s.is_finite() {
            return Err(Error::Domain(format!("free R is evaluated at s ≠ 0, got {s}")));
        }
        let u = s * s;
        let x = self.j(u)?;
        let l = self.lambda;
        let rad = (l - 1.0) * (l - 1.0) / (4.0 * l * l) + u * x * x / l;
        Ok(-(l + 1.0) / (2.0 * l) + f64::sqrt(rad))
    }
}

pub fn cauchy_g_eval(p: &NonnegPoly<f64>, x: f64) -> Result<f64> {
    let params = RectParams::new(p.degree().max(1), p.degree().max(1))?;
    if p.degree() == 0 {
        return Err(Error::Domain("degree-zero polynomial has no root measure".into()));
    }
    RectCauchy::new(p, &params)?.g(x)
}

pub fn rect_h_eval(p: &NonnegPoly<f64>, params: &RectParams, x: f64) -> Result<f64> {
    RectCauchy::new(p, params)?.h(x)
}

pub fn j_eval(p: &NonnegPoly<f64>, params: &RectParams, u: f64) -> Result<f64> {
    RectCauchy::new(p, params)?.j(u)
}

pub fn free_rect_r_eval(p: &NonnegPoly<f64>, params: &RectParams, s: f64) -> Result<f64> {
    RectCauchy::new(p, params)?.free_r(s)
}
