//! Power series truncated at a fixed order.
//!
//! A [`TruncSeries`] of order `N` stores the coefficients of `s^0 .. s^{N-1}`;
//! everything from `s^N` up is unknown. Operations follow the usual rules of
//! the truncated ring: sums and products keep the order, a derivative loses
//! one, multiplying by `s` gains one.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries<T = f64> {
    coeffs: Vec<T>,
}

impl<T: Scalar> TruncSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient at s^{i}")));
        }
        Ok(TruncSeries { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        TruncSeries { coeffs: vec![T::zero(); order] }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 0 {
            s.coeffs[0] = T::one();
        }
        s
    }

    /// The series `s` itself.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Coefficient of `s^i`, zero past the stored order.
    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(i).cloned().unwrap_or_else(T::zero)
    }

    /// Truncates or zero-pads to `order`.
    pub fn resize(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order, T::zero());
        TruncSeries { coeffs }
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order() != other.order() {
            return Err(Error::OrderMismatch { left: self.order(), right: other.order() });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        Ok(TruncSeries { coeffs })
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() - b.clone())
            .collect();
        Ok(TruncSeries { coeffs })
    }

    /// Cauchy product, truncated.
    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let n = self.order();
        let mut coeffs = vec![T::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs[..n - i].iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        TruncSeries { coeffs }
    }

    pub fn scale(&self, c: &T) -> Self {
        TruncSeries { coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect() }
    }

    /// `f(c s)`: multiplies the coefficient of `s^k` by `c^k`.
    pub fn dilate(&self, c: &T) -> Self {
        let mut pow = T::one();
        let mut coeffs = Vec::with_capacity(self.order());
        for a in &self.coeffs {
            coeffs.push(a.clone() * pow.clone());
            pow = pow * c.clone();
        }
        TruncSeries { coeffs }
    }

    /// Multiplicative inverse; needs a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        let a0 = self.coeffs[0].clone();
        if a0.is_zero() {
            return Err(Error::Singular("reciprocal of a series with zero constant term".into()));
        }
        let mut out = vec![T::zero(); n];
        out[0] = T::one() / a0.clone();
        for k in 1..n {
            let mut acc = T::zero();
            for j in 1..=k {
                acc = acc + self.coeffs[j].clone() * out[k - j].clone();
            }
            out[k] = -acc / a0.clone();
        }
        Ok(TruncSeries { coeffs: out })
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        Ok(self.mul_unchecked(&other.recip()?))
    }

    /// Logarithm; the constant term must be positive.
    pub fn ln(&self) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        let a0 = self.coeffs[0].clone();
        if a0 <= T::zero() {
            return Err(Error::Domain("log of a series with nonpositive constant term".into()));
        }
        // L' a = a'  =>  k L_k a_0 = k a_k - sum_{j<k} j L_j a_{k-j}
        let mut out = vec![T::zero(); n];
        out[0] = a0.ln()?;
        for k in 1..n {
            let mut acc = T::from_usize(k) * self.coeffs[k].clone();
            for j in 1..k {
                acc = acc - T::from_usize(j) * out[j].clone() * self.coeffs[k - j].clone();
            }
            out[k] = acc / (T::from_usize(k) * a0.clone());
        }
        Ok(TruncSeries { coeffs: out })
    }

    pub fn exp(&self) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        // E' = a' E  =>  k E_k = sum_{j=1..k} j a_j E_{k-j}
        let mut out = vec![T::zero(); n];
        out[0] = self.coeffs[0].exp()?;
        for k in 1..n {
            let mut acc = T::zero();
            for j in (1..=k).filter(|&j| !self.coeffs[j].is_zero()) {
                acc = acc + T::from_usize(j) * self.coeffs[j].clone() * out[k - j].clone();
            }
            out[k] = acc / T::from_usize(k);
        }
        Ok(TruncSeries { coeffs: out })
    }

    /// Formal derivative. The result has order `N - 1`.
    pub fn derive(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, a)| T::from_usize(i) * a.clone())
            .collect();
        TruncSeries { coeffs }
    }

    /// Antiderivative vanishing at zero, at the same order: the coefficient
    /// that would land on `s^N` is dropped.
    pub fn integrate_zero(&self) -> Self {
        let n = self.order();
        let mut coeffs = vec![T::zero(); n];
        for i in 1..n {
            coeffs[i] = self.coeffs[i - 1].clone() / T::from_usize(i);
        }
        TruncSeries { coeffs }
    }

    /// `s f(s)`, order `N + 1`.
    pub fn mul_s(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.order() + 1);
        coeffs.push(T::zero());
        coeffs.extend(self.coeffs.iter().cloned());
        TruncSeries { coeffs }
    }

    /// `f(s) / s`, order `N - 1`; the constant term must vanish.
    pub fn div_s(&self) -> Result<Self> {
        match self.coeffs.first() {
            None => Ok(self.clone()),
            Some(c) if c.is_zero() => Ok(TruncSeries { coeffs: self.coeffs[1..].to_vec() }),
            Some(_) => Err(Error::Domain("division by s of a series with nonzero constant term".into())),
        }
    }

    /// `f(g(s))` by Horner's rule in the truncated ring; needs `g(0) = 0`.
    pub fn compose(&self, g: &Self) -> Result<Self> {
        self.check_order(g)?;
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        if !g.coeffs[0].is_zero() {
            return Err(Error::Domain("inner series of a composition must vanish at zero".into()));
        }
        let mut acc = Self::constant(self.coeffs[n - 1].clone(), n);
        for c in self.coeffs[..n - 1].iter().rev() {
            acc = acc.mul_unchecked(g);
            acc.coeffs[0] = acc.coeffs[0].clone() + c.clone();
        }
        Ok(acc)
    }

    /// Compositional inverse `g` with `f(g(s)) = g(f(s)) = s`.
    ///
    /// Newton iteration `g <- g - (f(g) - s) / f'(g)`, which doubles the
    /// number of correct coefficients per step.
    pub fn comp_inverse(&self) -> Result<Self> {
        let n = self.order();
        if n > 0 && !self.coeffs[0].is_zero() {
            return Err(Error::Domain("compositional inverse needs f(0) = 0".into()));
        }
        if n < 2 {
            return Ok(Self::zero(n));
        }
        let f1 = self.coeffs[1].clone();
        if f1.is_zero() {
            return Err(Error::Singular("compositional inverse needs f'(0) != 0".into()));
        }
        let id = Self::identity(n);
        // f' has order n - 1; pad so every composition below stays at order n.
        let fprime = self.derive().resize(n);
        let mut g = id.scale(&(T::one() / f1));
        let mut correct = 2;
        while correct < n {
            let residual = self.compose(&g)?.checked_sub(&id)?;
            let slope = fprime.compose(&g)?;
            g = g.checked_sub(&residual.checked_div(&slope)?)?;
            correct *= 2;
        }
        Ok(g)
    }

    /// Square root with positive constant term.
    pub fn sqrt(&self) -> Result<Self> {
        let n = self.order();
        if n == 0 {
            return Ok(self.clone());
        }
        let a0 = self.coeffs[0].clone();
        if a0 <= T::zero() {
            return Err(Error::Domain("sqrt of a series with nonpositive constant term".into()));
        }
        let r0 = a0.sqrt()?;
        let two_r0 = r0.clone() + r0.clone();
        let mut out = vec![T::zero(); n];
        out[0] = r0;
        for k in 1..n {
            let mut acc = self.coeffs[k].clone();
            for j in 1..k {
                acc = acc - out[j].clone() * out[k - j].clone();
            }
            out[k] = acc / two_r0.clone();
        }
        Ok(TruncSeries { coeffs: out })
    }

    /// Evaluates the truncated polynomial at `x`.
    pub fn eval(&self, x: &T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    pub fn to_f64(&self) -> TruncSeries<f64> {
        TruncSeries { coeffs: self.coeffs.iter().map(Scalar::to_f64).collect() }
    }
}

impl TruncSeries<f64> {
    pub fn from_slice(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.to_vec())
    }
}
