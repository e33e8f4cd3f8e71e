//! The rectangular additive convolution `p ⊞_{d,λ} q`.
//!
//! `p ⊞_{d,λ} q` is the expected characteristic polynomial of
//! `(A + Q B Rᵀ)ᵀ (A + Q B Rᵀ)` over Haar orthogonal `Q ∈ O(m)`, `R ∈ O(d)`,
//! where `p = χ_{AᵀA}` and `q = χ_{BᵀB}`. Two algebraic routes are provided:
//! the closed binomial formula and the differential-operator form on the
//! bivariate extension `y^{m-d} p(xy)`.

use crate::error::{Error, Result};
use crate::poly::{NonnegPoly, RectParams};
use crate::scalar::Scalar;

fn check_degree<T: Scalar>(p: &NonnegPoly<T>, params: &RectParams, name: &str) -> Result<()> {
    if p.degree() != params.d() {
        return Err(Error::Usage(format!(
            "{name} has degree {} but d = {}",
            p.degree(),
            params.d()
        )));
    }
    Ok(())
}

/// `(d-j-t)(m-j-t) / ((d-t)(m-t))`: one step of the weight products.
fn step<T: Scalar>(d: usize, m: usize, j: usize, t: usize) -> T {
    (T::from_usize(d - j - t) / T::from_usize(d - t)) * (T::from_usize(m - j - t) / T::from_usize(m - t))
}

/// Binomial-formula convolution.
///
/// With `p = Σ (-1)^i p_i x^{d-i}` and similarly for `q`, the output has
/// alternating coefficients
/// `Σ_{i+j=k} [(d-i)!(d-j)! / (d!(d-k)!)] [(m-i)!(m-j)! / (m!(m-k)!)] p_i q_j`.
/// The weight for `i ≤ j` is the product over `t < i` of
/// `(d-j-t)(m-j-t) / ((d-t)(m-t))`, so no factorial is ever formed. Terms are
/// paired symmetrically, which makes the result bitwise commutative.
pub fn rect_convolve<T: Scalar>(p: &NonnegPoly<T>, q: &NonnegPoly<T>, params: &RectParams) -> Result<NonnegPoly<T>> {
    check_degree(p, params, "p")?;
    check_degree(q, params, "q")?;
    let (d, m) = (params.d(), params.m());
    let a = p.alternating();
    let b = q.alternating();
    let mut out = vec![T::zero(); d + 1];
    for j in 0..=d {
        let mut w = T::one();
        for i in 0..=j.min(d - j) {
            if i > 0 {
                w = w * step::<T>(d, m, j, i - 1);
            }
            let term = if i == j {
                a[i].clone() * b[j].clone()
            } else {
                a[i].clone() * b[j].clone() + a[j].clone() * b[i].clone()
            };
            out[i + j] = out[i + j].clone() + w.clone() * term;
        }
    }
    Ok(NonnegPoly::from_alternating_unchecked(out))
}

/// `y^{m-d} p(xy)`, stored as the coefficients `c_a` of `x^a y^{a+m-d}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateRepr<T = f64> {
    params: RectParams,
    // c[a] multiplies x^a y^(a + m - d)
    c: Vec<T>,
}

impl<T: Scalar> BivariateRepr<T> {
    pub fn new(p: &NonnegPoly<T>, params: &RectParams) -> Result<Self> {
        check_degree(p, params, "p")?;
        let c = p.coeffs().iter().rev().cloned().collect();
        Ok(BivariateRepr { params: *params, c })
    }

    pub fn params(&self) -> &RectParams {
        &self.params
    }

    /// Applies `∂x ∂y`: `x^a y^b ↦ a b x^{a-1} y^{b-1}`.
    pub fn dxdy(&self) -> Self {
        let shift = self.params.m() - self.params.d();
        let c = (0..self.c.len())
            .map(|a| match self.c.get(a + 1) {
                Some(next) => T::from_usize((a + 1) * (a + 1 + shift)) * next.clone(),
                None => T::zero(),
            })
            .collect();
        BivariateRepr { params: self.params, c }
    }

    pub fn eval(&self, x: &T, y: &T) -> T {
        let shift = self.params.m() - self.params.d();
        let mut acc = T::zero();
        for (a, c) in self.c.iter().enumerate() {
            acc = acc + c.clone() * x.powi(a) * y.powi(a + shift);
        }
        acc
    }

    /// Value at `(0, 1)`: the constant-in-`x` coefficient.
    pub fn at_origin(&self) -> T {
        self.c[0].clone()
    }

    /// Coefficients of the univariate polynomial `(x, 1) ↦ …`, decreasing degree.
    pub fn at_y1(&self) -> Vec<T> {
        self.c.iter().rev().cloned().collect()
    }

    fn scale(&self, s: &T) -> Self {
        BivariateRepr { params: self.params, c: self.c.iter().map(|c| c.clone() * s.clone()).collect() }
    }
}

/// Convolution through the operator identity
/// `[p ⊞ q](x) = (m-d)!/(d! m!) Σ_k (∂x∂y)^{d-k} p(x,1) · (∂x∂y)^k q(0,1)`.
///
/// The prefactor is distributed over the operator applications: the `t`-th
/// application of `∂x∂y` to `p` is divided by `(d-t)(m-t)`, which exactly
/// cancels what `(∂x∂y)^k q(0,1)` contributes beyond `q`'s coefficient.
pub fn rect_convolve_diffop<T: Scalar>(p: &NonnegPoly<T>, q: &NonnegPoly<T>, params: &RectParams) -> Result<NonnegPoly<T>> {
    let bp = BivariateRepr::new(p, params)?;
    let bq = BivariateRepr::new(q, params)?;
    let (d, m) = (params.d(), params.m());
    let mut acc = vec![T::zero(); d + 1];
    let mut cur = bp;
    for t in 0..=d {
        // (∂x∂y)^{d-t} q (0,1) / [(d-t)! (m-t)! / (m-d)!] is q's coefficient of x^{d-t}
        let qa = bq.c[d - t].clone();
        for (slot, c) in acc.iter_mut().zip(cur.at_y1().iter().rev()) {
            *slot = slot.clone() + qa.clone() * c.clone();
        }
        if t < d {
            cur = cur.dxdy().scale(&(T::one() / T::from_usize((d - t) * (m - t))));
        }
    }
    acc.reverse();
    Ok(NonnegPoly::from_coeffs_unchecked(acc))
}

/// Monic multiple of the generalized Laguerre polynomial `L_d^{(m-d)}(x/σ²)`.
///
/// Alternating coefficients `p_i = σ^{2i} m! d! / (i! (m-i)! (d-i)!)`, the
/// expansion of `e^{-σ² ∂x∂y} {y^m x^d}`. Its roots have mean `m σ²`.
pub fn laguerre_poly<T: Scalar>(params: &RectParams, sigma2: &T) -> Result<NonnegPoly<T>> {
    if *sigma2 <= T::zero() {
        return Err(Error::Domain(format!("sigma^2 must be positive, got {}", sigma2.to_f64())));
    }
    let (d, m) = (params.d(), params.m());
    let mut alt = Vec::with_capacity(d + 1);
    alt.push(T::one());
    for i in 1..=d {
        let prev = alt[i - 1].clone();
        alt.push(prev * sigma2.clone() * T::from_usize((m - i + 1) * (d - i + 1)) / T::from_usize(i));
    }
    Ok(NonnegPoly::from_alternating_unchecked(alt))
}
