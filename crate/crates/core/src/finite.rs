//! T-transform moments and the finite rectangular R-transform.
//!
//! For `p` of degree `d` with parameters `(d, m)`, the T-transform is a
//! `d`-point random variable whose moments are
//! `E[T^i] = i! (m-i)! (d-i)! / (m! d!) · p_i`. The finite R-transform
//!
//! ```text
//! R(s) ≡ -(s/d) d/ds log E[exp(-T s m d)]   mod s^{d+1}
//! ```
//!
//! is additive under `⊞_{d,λ}` and determines `p` back.
//!
//! The map from coefficients to `R` amplifies relative perturbations of `p_k`
//! by roughly `(e m d σ² / k)^k`; use the [`Exact`](crate::scalar::Exact)
//! instance whenever `d` is beyond a handful.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{complex_roots, NonnegPoly, RectParams};
use crate::scalar::Scalar;
use crate::series::TruncSeries;

#[derive(Debug, Clone, PartialEq)]
pub struct TMoments<T = f64> {
    params: RectParams,
    moments: Vec<T>,
}

impl<T: Scalar> TMoments<T> {
    pub fn params(&self) -> &RectParams {
        &self.params
    }

    /// `E[T^i]` for `i = 0..=d`; the first entry is one.
    pub fn moments(&self) -> &[T] {
        &self.moments
    }

    /// Moments of `T_p + T_q` for independent T-transforms: the binomial
    /// convolution `Σ_i C(k,i) E[T_p^i] E[T_q^{k-i}]`.
    pub fn independent_sum(&self, other: &Self) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::Usage("T-moments with different parameters".into()));
        }
        let n = self.moments.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc = T::zero();
            let mut binom = T::one();
            for i in 0..=k {
                if i > 0 {
                    binom = binom * T::from_usize(k - i + 1) / T::from_usize(i);
                }
                acc = acc + binom.clone() * self.moments[i].clone() * other.moments[k - i].clone();
            }
            out.push(acc);
        }
        Ok(TMoments { params: self.params, moments: out })
    }
}

fn check_degree<T: Scalar>(p: &NonnegPoly<T>, params: &RectParams) -> Result<()> {
    if p.degree() != params.d() {
        return Err(Error::Usage(format!("polynomial has degree {} but d = {}", p.degree(), params.d())));
    }
    Ok(())
}

pub fn t_moments<T: Scalar>(p: &NonnegPoly<T>, params: &RectParams) -> Result<TMoments<T>> {
    check_degree(p, params)?;
    let (d, m) = (params.d(), params.m());
    let alt = p.alternating();
    let mut ratio = T::one();
    let mut moments = Vec::with_capacity(d + 1);
    moments.push(T::one());
    for (i, pi) in alt.iter().enumerate().skip(1) {
        ratio = ratio * T::from_usize(i) / (T::from_usize(m - i + 1) * T::from_usize(d - i + 1));
        moments.push(ratio.clone() * pi.clone());
    }
    Ok(TMoments { params: *params, moments })
}

/// The `d` atoms of the T-transform.
#[derive(Debug, Clone, Serialize)]
pub struct TValues {
    pub values: Vec<Complex<f64>>,
    /// Largest relative mismatch between `Σ_j t_j^i` and `d E[T^i]`.
    pub power_sum_residual: f64,
    /// Set when the residual exceeds `1e-7`.
    pub warning: Option<String>,
}

/// Recovers the atoms from the moments: Newton's identities give the
/// elementary symmetric functions, whose polynomial is solved by companion
/// eigenvalues. The atoms are complex in general.
pub fn t_values<T: Scalar>(tm: &TMoments<T>) -> Result<TValues> {
    let d = tm.params.d();
    let power: Vec<T> = tm.moments.iter().map(|mu| T::from_usize(d) * mu.clone()).collect();
    // k e_k = Σ_{i=1}^k (-1)^{i-1} e_{k-i} P_i
    let mut e: Vec<T> = vec![T::one()];
    for k in 1..=d {
        let mut acc = T::zero();
        for i in 1..=k {
            let term = e[k - i].clone() * power[i].clone();
            acc = if i % 2 == 1 { acc + term } else { acc - term };
        }
        e.push(acc / T::from_usize(k));
    }
    let coeffs: Vec<f64> = e
        .iter()
        .enumerate()
        .map(|(k, x)| if k % 2 == 1 { -x.to_f64() } else { x.to_f64() })
        .collect();
    let values = complex_roots(&coeffs)?;
    let mut residual = 0.0f64;
    for (i, mu) in tm.moments.iter().enumerate().skip(1) {
        let got: Complex<f64> = values.iter().map(|z| z.powu(i as u32)).sum();
        let want = d as f64 * mu.to_f64();
        let scale = values.iter().map(|z| z.norm().powi(i as i32)).sum::<f64>().max(f64::MIN_POSITIVE);
        residual = residual.max((got - want).norm() / scale);
    }
    let warning = (residual > 1e-7).then(|| format!("T-values are ill-conditioned: power-sum residual {residual:e}"));
    Ok(TValues { values, power_sum_residual: residual, warning })
}

/// `R(s) = Σ_{k=1}^d a_k s^k`, stored as a series of order `d + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteR<T = f64> {
    params: RectParams,
    series: TruncSeries<T>,
}

impl<T: Scalar> FiniteR<T> {
    /// Wraps raw coefficients (index = power of `s`). Needs exactly `d + 1`
    /// entries and a zero constant term.
    pub fn new(params: RectParams, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != params.d() + 1 {
            return Err(Error::Usage(format!("expected {} R coefficients, got {}", params.d() + 1, coeffs.len())));
        }
        if !coeffs[0].is_zero() {
            return Err(Error::InvalidTransform("constant term must be zero".into()));
        }
        Ok(FiniteR { params, series: TruncSeries::new(coeffs)? })
    }

    pub fn params(&self) -> &RectParams {
        &self.params
    }

    pub fn series(&self) -> &TruncSeries<T> {
        &self.series
    }

    pub fn coeffs(&self) -> &[T] {
        self.series.coeffs()
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        if self.params != other.params {
            return Err(Error::Usage("finite R-transforms with different parameters".into()));
        }
        Ok(FiniteR { params: self.params, series: self.series.checked_add(&other.series)? })
    }

    pub fn to_f64(&self) -> FiniteR<f64> {
        FiniteR { params: self.params, series: self.series.to_f64() }
    }
}

/// The finite rectangular R-transform of `p`.
pub fn finite_r<T: Scalar>(p: &NonnegPoly<T>, params: &RectParams) -> Result<FiniteR<T>> {
    let tm = t_moments(p, params)?;
    let (d, m) = (params.d(), params.m());
    // E(s) = Σ E[T^i] (-m d s)^i / i!
    let md = T::from_usize(m * d);
    let mut factor = T::one();
    let mut e = Vec::with_capacity(d + 1);
    for (i, mu) in tm.moments.iter().enumerate() {
        if i > 0 {
            factor = -(factor * md.clone()) / T::from_usize(i);
        }
        e.push(mu.clone() * factor.clone());
    }
    let log_e = TruncSeries::new(e)?.ln()?;
    let series = log_e.derive().mul_s().scale(&(-T::one() / T::from_usize(d)));
    Ok(FiniteR { params: *params, series })
}

/// Recovers the monic polynomial from its finite R-transform.
///
/// `log E(s) = -d ∫_0^s R(u)/u du`, then `p_i = (-1)^i E_i Π_{t<i} (m-t)(d-t)/(md)`.
/// Coefficients that fail the real-rootedness check mean the input was not
/// the transform of any nonnegative-rooted polynomial.
pub fn finite_r_invert<T: Scalar>(r: &FiniteR<T>) -> Result<NonnegPoly<T>> {
    let (d, m) = (r.params.d(), r.params.m());
    let over_s = r.series.div_s().map_err(|_| Error::InvalidTransform("constant term must be zero".into()))?;
    let log_e = over_s.resize(d + 1).integrate_zero().scale(&(-T::from_usize(d)));
    let e = log_e.exp()?;
    let md = T::from_usize(m * d);
    let mut alt = Vec::with_capacity(d + 1);
    let mut factor = T::one();
    for (i, ei) in e.coeffs().iter().enumerate() {
        if i > 0 {
            factor = -(factor * T::from_usize((m - i + 1) * (d - i + 1))) / md.clone();
        }
        alt.push(factor.clone() * ei.clone());
    }
    NonnegPoly::from_alternating(alt).map_err(|e| match e {
        Error::RealRootedness { .. } | Error::ComplexRoots { .. } | Error::NegativeRoot { .. } => Error::InvalidTransform(e.to_string()),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conv::{laguerre_poly, rect_convolve};
    use crate::scalar::Exact;
    use num_traits::{One, Zero};
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Exact {
        Exact::new(n.into(), d.into())
    }

    fn exact_roots(r: &[f64]) -> NonnegPoly<Exact> {
        NonnegPoly::from_roots(&crate::scalar::exact_vec(r).unwrap()).unwrap()
    }

    #[test]
    fn moments_examples() {
        let params = RectParams::new(4, 6).unwrap();
        let tm = t_moments(&NonnegPoly::<f64>::monomial(4), &params).unwrap();
        assert_eq!(tm.moments(), &[1.0, 0.0, 0.0, 0.0, 0.0]);

        let params = RectParams::new(1, 2).unwrap();
        let tm = t_moments(&NonnegPoly::from_roots(&[1.0]).unwrap(), &params).unwrap();
        assert_eq!(tm.moments(), &[1.0, 0.5]);
    }

    #[test]
    fn laguerre_has_constant_t() {
        let params = RectParams::new(7, 11).unwrap();
        let s2 = q(3, 5);
        let tm = t_moments(&laguerre_poly(&params, &s2).unwrap(), &params).unwrap();
        for (i, mu) in tm.moments().iter().enumerate() {
            assert_eq!(*mu, Scalar::powi(&s2, i));
        }
    }

    #[test]
    fn t_values_examples() {
        let params = RectParams::new(3, 5).unwrap();
        let tv = t_values(&t_moments(&NonnegPoly::<f64>::monomial(3), &params).unwrap()).unwrap();
        assert!(tv.values.iter().all(|z| z.norm() == 0.0));

        // a triple atom is only recovered to ~eps^(1/3)
        let tv = t_values(&t_moments(&laguerre_poly(&params, &q(1, 2)).unwrap(), &params).unwrap()).unwrap();
        for z in &tv.values {
            assert!((z - Complex::new(0.5, 0.0)).norm() < 1e-4, "{z}");
        }
    }

    #[test]
    fn t_values_reproduce_power_sums() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = rng.random_range(1..=10);
            let m = d + rng.random_range(0..=d);
            let params = RectParams::new(d, m).unwrap();
            let r: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
            let tm = t_moments(&exact_roots(&r), &params).unwrap();
            let tv = t_values(&tm).unwrap();
            assert!(tv.power_sum_residual < 1e-7, "d={d}: {}", tv.power_sum_residual);
            assert!(tv.warning.is_none());
        }
    }

    #[test]
    fn finite_r_examples() {
        let params = RectParams::new(3, 4).unwrap();
        let z = finite_r(&NonnegPoly::<f64>::monomial(3), &params).unwrap();
        assert_eq!(z.coeffs(), &[0.0; 4]);

        let params = RectParams::new(1, 2).unwrap();
        let r = finite_r(&NonnegPoly::from_roots(&[1.0]).unwrap(), &params).unwrap();
        assert_eq!(r.coeffs(), &[0.0, 1.0]);

        let params = RectParams::new(9, 13).unwrap();
        let s2 = q(2, 3);
        let r = finite_r(&laguerre_poly(&params, &s2).unwrap(), &params).unwrap();
        let mut want = vec![Exact::zero(); 10];
        want[1] = Exact::from_usize(13) * s2;
        assert_eq!(r.coeffs(), want.as_slice());
    }

    #[test]
    fn finite_r_f64_is_accurate_for_small_degree() {
        let params = RectParams::new(4, 6).unwrap();
        let r = [0.3, 0.9, 1.4, 2.0];
        let exact = finite_r(&exact_roots(&r), &params).unwrap().to_f64();
        let float = finite_r(&NonnegPoly::from_roots(&r).unwrap(), &params).unwrap();
        for (a, b) in float.coeffs().iter().zip(exact.coeffs()) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn invert_examples() {
        let params = RectParams::new(5, 7).unwrap();
        let zero = FiniteR::new(params, vec![Exact::zero(); 6]).unwrap();
        assert_eq!(finite_r_invert(&zero).unwrap(), NonnegPoly::monomial(5));

        let s2 = q(1, 4);
        let mut c = vec![Exact::zero(); 6];
        c[1] = Exact::from_usize(7) * s2.clone();
        let lag = finite_r_invert(&FiniteR::new(params, c).unwrap()).unwrap();
        assert_eq!(lag, laguerre_poly(&params, &s2).unwrap());
    }

    #[test]
    fn invert_rejects_non_transforms() {
        let params = RectParams::new(2, 3).unwrap();
        assert!(matches!(FiniteR::new(params, vec![1.0, 0.0, 0.0]), Err(Error::InvalidTransform(_))));
        assert!(matches!(FiniteR::new(params, vec![0.0, 1.0]), Err(Error::Usage(_))));
        // negative first cumulant: roots with negative mean
        let bad = FiniteR::new(params, vec![0.0, -1.0, 0.0]).unwrap();
        assert!(matches!(finite_r_invert(&bad), Err(Error::InvalidTransform(_))));
        // a huge second cumulant pushes roots off the real line
        let bad = FiniteR::new(params, vec![0.0, 1.0, 50.0]).unwrap();
        assert!(matches!(finite_r_invert(&bad), Err(Error::InvalidTransform(_))));
    }

    #[test]
    fn moments_of_convolution_are_binomial() {
        let params = RectParams::new(5, 8).unwrap();
        let p = exact_roots(&[0.1, 0.5, 1.25, 2.0, 3.5]);
        let r = exact_roots(&[0.0, 0.75, 1.0, 1.5, 4.0]);
        let c = rect_convolve(&p, &r, &params).unwrap();
        let lhs = t_moments(&c, &params).unwrap();
        let rhs = t_moments(&p, &params).unwrap().independent_sum(&t_moments(&r, &params).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    fn roots_and_params() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, usize)> {
        (1usize..=12).prop_flat_map(|d| {
            (prop::collection::vec(0.0f64..3.0, d), prop::collection::vec(0.0f64..3.0, d), 0usize..=2 * d)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn additivity((r1, r2, extra) in roots_and_params()) {
            let d = r1.len();
            let params = RectParams::new(d, d + extra).unwrap();
            let (p, r) = (exact_roots(&r1), exact_roots(&r2));
            let lhs = finite_r(&rect_convolve(&p, &r, &params).unwrap(), &params).unwrap();
            let rhs = finite_r(&p, &params).unwrap().checked_add(&finite_r(&r, &params).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn roundtrip((r1, _r2, extra) in roots_and_params()) {
            let d = r1.len();
            let params = RectParams::new(d, d + extra).unwrap();
            let p = exact_roots(&r1);
            prop_assert_eq!(finite_r_invert(&finite_r(&p, &params).unwrap()).unwrap(), p);
        }

        #[test]
        fn first_coefficient_is_root_mean((r1, _r2, extra) in roots_and_params()) {
            let d = r1.len();
            let params = RectParams::new(d, d + extra).unwrap();
            let p = exact_roots(&r1);
            prop_assert_eq!(finite_r(&p, &params).unwrap().coeffs()[1].clone(), p.root_mean());
            let pf = NonnegPoly::from_roots(&r1).unwrap();
            let a1 = finite_r(&pf, &params).unwrap().coeffs()[1];
            prop_assert!((a1 - pf.root_mean()).abs() <= 1e-12 * pf.root_mean().max(1e-300));
        }

        #[test]
        fn scaling_covariance((r1, _r2, extra) in roots_and_params(), num in 1i64..20, den in 1i64..20) {
            let d = r1.len();
            let params = RectParams::new(d, d + extra).unwrap();
            let p = exact_roots(&r1);
            let alpha = q(num, den);
            let scaled = finite_r(&p.scale_roots(&alpha).unwrap(), &params).unwrap();
            let base = finite_r(&p, &params).unwrap();
            for (k, (a, b)) in scaled.coeffs().iter().zip(base.coeffs()).enumerate() {
                prop_assert_eq!(a.clone(), b.clone() * Scalar::powi(&alpha, k));
            }
            let _ = Exact::one();
        }
    }
}
