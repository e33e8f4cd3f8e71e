//! Coefficient fields.
//!
//! Every algebraic routine in the crate is generic over [`Scalar`]. Two
//! instances are provided: `f64` for numerics, and [`Exact`] (arbitrary
//! precision rationals) for the finite transforms, whose coefficient maps are
//! far too ill-conditioned for double precision once `d` exceeds ~10.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::RootList;

/// Exact rational coefficients.
pub type Exact = BigRational;

pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    /// Exact conversion for `Exact`; identity for `f64`. Non-finite input is an error.
    fn from_f64(x: f64) -> Result<Self>;
    fn from_i64(n: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_finite(&self) -> bool;
    fn abs(&self) -> Self;

    /// `exp`, defined for every `f64` but only at zero for `Exact`.
    fn exp(&self) -> Result<Self>;
    /// Natural log, defined on positives for `f64` but only at one for `Exact`.
    fn ln(&self) -> Result<Self>;
    /// Positive square root; `Exact` needs a perfect square.
    fn sqrt(&self) -> Result<Self>;

    /// Real roots of the monic polynomial with these standard-order
    /// coefficients. `Exact` separates repeated roots exactly first.
    fn real_roots(coeffs: &[Self]) -> Result<RootList>;

    fn from_usize(n: usize) -> Self {
        Self::from_i64(n as i64)
    }

    fn powi(&self, k: usize) -> Self {
        let mut acc = Self::one();
        for _ in 0..k {
            acc = acc * self.clone();
        }
        acc
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Result<Self> {
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::Domain(format!("non-finite coefficient {x}")))
        }
    }

    fn from_i64(n: i64) -> Self {
        n as f64
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn exp(&self) -> Result<Self> {
        Ok(f64::exp(*self))
    }

    fn ln(&self) -> Result<Self> {
        if *self > 0.0 {
            Ok(f64::ln(*self))
        } else {
            Err(Error::Domain(format!("log of nonpositive {self}")))
        }
    }

    fn sqrt(&self) -> Result<Self> {
        if *self >= 0.0 {
            Ok(f64::sqrt(*self))
        } else {
            Err(Error::Domain(format!("sqrt of negative {self}")))
        }
    }

    fn powi(&self, k: usize) -> Self {
        f64::powi(*self, k as i32)
    }

    fn real_roots(coeffs: &[Self]) -> Result<RootList> {
        crate::poly::real_roots(coeffs)
    }
}

impl Scalar for Exact {
    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("non-finite coefficient {x}")))
    }

    fn from_i64(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn exp(&self) -> Result<Self> {
        if self.is_zero() {
            Ok(Self::one())
        } else {
            Err(Error::Domain("exp of a nonzero rational is not rational".into()))
        }
    }

    fn ln(&self) -> Result<Self> {
        if self.is_one() {
            Ok(Self::zero())
        } else {
            Err(Error::Domain("log of a rational other than 1 is not rational".into()))
        }
    }

    fn sqrt(&self) -> Result<Self> {
        if self.is_negative() {
            return Err(Error::Domain("sqrt of negative rational".into()));
        }
        let n = self.numer().sqrt();
        let d = self.denom().sqrt();
        if &(&n * &n) == self.numer() && &(&d * &d) == self.denom() {
            Ok(BigRational::new(n, d))
        } else {
            Err(Error::Domain("sqrt of a non-square rational".into()))
        }
    }

    fn real_roots(coeffs: &[Self]) -> Result<RootList> {
        crate::poly::squarefree_real_roots(coeffs)
    }
}

/// Converts a slice of `f64` exactly.
pub fn exact_vec(xs: &[f64]) -> Result<Vec<Exact>> {
    xs.iter().map(|&x| Exact::from_f64(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_roundtrips_f64() {
        for x in [0.0, 1.0, -2.5, 0.1, 1e-300, 123456.789] {
            let e = Exact::from_f64(x).unwrap();
            assert_eq!(Scalar::to_f64(&e), x);
        }
        assert!(Exact::from_f64(f64::NAN).is_err());
    }

    #[test]
    fn exact_transcendentals_only_at_trivial_points() {
        assert_eq!(Scalar::exp(&Exact::zero()).unwrap(), Exact::one());
        assert!(Scalar::exp(&Exact::one()).is_err());
        assert_eq!(Scalar::ln(&Exact::one()).unwrap(), Exact::zero());
        let nine_quarters = Exact::new(BigInt::from(9), BigInt::from(4));
        assert_eq!(
            Scalar::sqrt(&nine_quarters).unwrap(),
            Exact::new(BigInt::from(3), BigInt::from(2))
        );
        assert!(Scalar::sqrt(&Exact::from_i64(2)).is_err());
    }
}
