//! Finite rectangular free probability.
//!
//! Polynomials with nonnegative roots stand for the squared singular values of
//! `m × d` matrices. This crate computes their rectangular additive
//! convolution `⊞_{d,λ}`, the finite rectangular R-transform that linearizes
//! it, the asymptotic (free) rectangular transforms of the root measures, a
//! Haar Monte-Carlo realization of the convolution, and drivers for the
//! limit theorems.

pub mod error;
pub mod scalar;
pub mod series;
pub mod poly;
pub mod conv;
pub mod finite;
pub mod free;
pub mod mc;
pub mod limits;
pub mod io;

pub use error::{Error, Result};
pub use poly::{NonnegPoly, RectParams, RootList, SymmetricPoly};
pub use scalar::{Exact, Scalar};
pub use series::TruncSeries;
