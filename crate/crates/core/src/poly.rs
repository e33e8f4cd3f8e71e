//! Monic polynomials with real nonnegative roots.
//!
//! `p(x) = det(x I - AᵀA)` for an `m × d` matrix `A` is the basic object: its
//! roots are the squared singular values of `A`. Coefficients are stored in the
//! standard decreasing-degree monic form; [`NonnegPoly::alternating`] gives the
//! nonnegative `p_i` with `p(x) = Σ (-1)^i p_i x^{d-i}`.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar};

mod exact_roots;
pub(crate) use exact_roots::squarefree_real_roots;

/// Accept a computed root as real when `|Im| / (1 + |Re|)` is below this.
pub const IMAG_TOL: f64 = 1e-8;
/// Roots in `[-ZERO_CLAMP, 0)` are reported as exactly zero.
pub const ZERO_CLAMP: f64 = 1e-10;
/// Relative tolerance on negative roots before a polynomial is rejected.
pub const NEG_TOL: f64 = 1e-8;

/// Dimensions `d ≤ m` of the rectangular matrices; `λ = d/m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RectParams {
    d: usize,
    m: usize,
}

impl RectParams {
    pub fn new(d: usize, m: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Usage("d must be at least 1".into()));
        }
        if m < d {
            return Err(Error::Usage(format!("need m >= d, got d={d}, m={m}")));
        }
        Ok(RectParams { d, m })
    }

    /// Parses `λ` as an exact ratio `"a/b"` (or an integer) and solves for `m = d/λ`.
    pub fn from_lambda(d: usize, lambda: &str) -> Result<Self> {
        let (num, den) = match lambda.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (lambda.trim(), "1"),
        };
        let parse = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Usage(format!("lambda must be a ratio of positive integers, got {lambda:?}")))
        };
        let (num, den) = (parse(num)?, parse(den)?);
        if num == 0 || den == 0 || num > den {
            return Err(Error::Usage(format!("lambda must lie in (0, 1], got {lambda}")));
        }
        if (d * den) % num != 0 {
            return Err(Error::Usage(format!("d / lambda = {d}*{den}/{num} is not an integer")));
        }
        Self::new(d, d * den / num)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lambda(&self) -> f64 {
        self.d as f64 / self.m as f64
    }

    /// `(n d, n m)`, same `λ`.
    pub fn scaled(&self, n: usize) -> Result<Self> {
        Self::new(self.d * n, self.m * n)
    }
}

/// Sorted real roots together with the largest imaginary residue the
/// eigenvalue solver reported.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootList {
    roots: Vec<f64>,
    max_imag_residue: f64,
}

impl RootList {
    pub fn roots(&self) -> &[f64] {
        &self.roots
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.roots
    }

    pub fn max_imag_residue(&self) -> f64 {
        self.max_imag_residue
    }

    pub fn min(&self) -> Option<f64> {
        self.roots.first().copied()
    }

    pub fn max(&self) -> Option<f64> {
        self.roots.last().copied()
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Largest distance between matched sorted roots.
    pub fn distance(&self, other: &RootList) -> f64 {
        if self.len() != other.len() {
            return f64::INFINITY;
        }
        self.roots
            .iter()
            .zip(&other.roots)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonnegPoly<T = f64> {
    coeffs: Vec<T>,
}

impl<T: Scalar> NonnegPoly<T> {
    /// Expands `Π (x - r_i)`.
    pub fn from_roots(roots: &[T]) -> Result<Self> {
        if let Some(r) = roots.iter().find(|r| **r < T::zero() || !r.is_finite()) {
            return Err(Error::Domain(format!("root {} is not a nonnegative real", r.to_f64())));
        }
        let mut coeffs = Vec::with_capacity(roots.len() + 1);
        coeffs.push(T::one());
        for r in roots {
            coeffs.push(T::zero());
            for i in (1..coeffs.len()).rev() {
                let prev = coeffs[i - 1].clone();
                coeffs[i] = coeffs[i].clone() - r.clone() * prev;
            }
        }
        Ok(NonnegPoly { coeffs })
    }

    /// Validates monicity and nonnegative real-rootedness.
    pub fn from_coeffs(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Usage("empty coefficient list".into()));
        }
        if !coeffs[0].is_one() {
            return Err(Error::Usage(format!("polynomial must be monic, leading coefficient {}", coeffs[0].to_f64())));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coefficient at index {i}")));
        }
        let p = NonnegPoly { coeffs };
        p.roots()?;
        Ok(p)
    }

    /// Builds from the alternating form `p_0 = 1, p_1, ..., p_d`, validating.
    pub fn from_alternating(alt: Vec<T>) -> Result<Self> {
        Self::from_coeffs(alternate(alt))
    }

    /// No validation. For outputs of operations that preserve nonnegative
    /// real-rootedness exactly (convolution, root scaling, products).
    pub fn from_coeffs_unchecked(coeffs: Vec<T>) -> Self {
        debug_assert!(!coeffs.is_empty() && coeffs[0].is_one());
        NonnegPoly { coeffs }
    }

    pub fn from_alternating_unchecked(alt: Vec<T>) -> Self {
        Self::from_coeffs_unchecked(alternate(alt))
    }

    /// `x^d`, the identity of the convolution.
    pub fn monomial(d: usize) -> Self {
        let mut coeffs = vec![T::zero(); d + 1];
        coeffs[0] = T::one();
        NonnegPoly { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Standard coefficients, decreasing degree, `coeffs()[0] == 1`.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// `p_i` with `p(x) = Σ (-1)^i p_i x^{d-i}`.
    pub fn alternating(&self) -> Vec<T> {
        alternate(self.coeffs.clone())
    }

    pub fn eval(&self, x: &T) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }

    /// `R_α`: multiplies every root by `alpha`, i.e. `α^d p(x/α)`.
    pub fn scale_roots(&self, alpha: &T) -> Result<Self> {
        if *alpha <= T::zero() {
            return Err(Error::Domain(format!("root scaling factor must be positive, got {}", alpha.to_f64())));
        }
        let mut pow = T::one();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c.clone() * pow.clone();
                pow = pow.clone() * alpha.clone();
                out
            })
            .collect();
        Ok(NonnegPoly { coeffs })
    }

    pub fn symmetrize(&self) -> SymmetricPoly<T> {
        SymmetricPoly { base: self.clone() }
    }

    /// Mean of the roots of `𝕊p`; zero by symmetry.
    pub fn expectation_sym(&self) -> T {
        T::zero()
    }

    /// Variance of the roots of `𝕊p`, which is the mean root of `p`.
    pub fn variance_sym(&self) -> T {
        self.root_mean()
    }

    pub fn root_mean(&self) -> T {
        let d = self.degree();
        if d == 0 {
            return T::zero();
        }
        -self.coeffs[1].clone() / T::from_usize(d)
    }

    /// `Σ_i r_i^k` for `k = 1..=k_max`, by Newton's identities.
    pub fn power_sums(&self, k_max: usize) -> Vec<T> {
        let e = self.alternating();
        let d = self.degree();
        let mut sums: Vec<T> = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            // P_k = Σ_{i=1}^{k-1} (-1)^{i-1} e_i P_{k-i} + (-1)^{k-1} k e_k
            let mut acc = if k <= d { T::from_usize(k) * e[k].clone() } else { T::zero() };
            if k % 2 == 0 {
                acc = -acc;
            }
            for i in 1..k.min(d + 1) {
                let term = e[i].clone() * sums[k - i - 1].clone();
                acc = if i % 2 == 1 { acc + term } else { acc - term };
            }
            sums.push(acc);
        }
        sums
    }

    /// `p^n`, the characteristic polynomial of `n` stacked copies.
    pub fn pow(&self, n: usize) -> Self {
        let mut out = NonnegPoly::monomial(0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![T::zero(); self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        NonnegPoly { coeffs }
    }

    pub fn to_f64(&self) -> NonnegPoly<f64> {
        NonnegPoly { coeffs: self.coeffs.iter().map(Scalar::to_f64).collect() }
    }

    pub fn roots(&self) -> Result<RootList> {
        T::real_roots(&self.coeffs)
    }

    pub fn max_root(&self) -> Result<f64> {
        Ok(self.roots()?.max().unwrap_or(0.0))
    }
}


impl NonnegPoly<f64> {
    pub fn to_exact(&self) -> Result<NonnegPoly<Exact>> {
        Ok(NonnegPoly { coeffs: crate::scalar::exact_vec(&self.coeffs)? })
    }

    /// Evaluates `p` and `p'` together.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        horner2(&self.coeffs, x)
    }
}

fn alternate<T: Scalar>(mut c: Vec<T>) -> Vec<T> {
    for (i, x) in c.iter_mut().enumerate() {
        if i % 2 == 1 {
            *x = -x.clone();
        }
    }
    c
}

/// `𝕊p(x) = p(x²)`: degree `2d`, roots `±√r_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPoly<T = f64> {
    base: NonnegPoly<T>,
}

impl<T: Scalar> SymmetricPoly<T> {
    pub fn base(&self) -> &NonnegPoly<T> {
        &self.base
    }

    pub fn degree(&self) -> usize {
        2 * self.base.degree()
    }

    pub fn coeffs(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.degree() + 1);
        for (i, c) in self.base.coeffs.iter().enumerate() {
            if i > 0 {
                out.push(T::zero());
            }
            out.push(c.clone());
        }
        out
    }

    pub fn eval(&self, x: &T) -> T {
        self.base.eval(&(x.clone() * x.clone()))
    }

    /// Scales every root by `alpha`; equal to symmetrizing `R_{α²} p`.
    pub fn scale_roots(&self, alpha: &T) -> Result<Self> {
        Ok(SymmetricPoly { base: self.base.scale_roots(&(alpha.clone() * alpha.clone()))? })
    }

    pub fn roots(&self) -> Result<Vec<f64>> {
        let base = self.base.roots()?;
        let mut out: Vec<f64> = base.roots().iter().flat_map(|&r| [-f64::sqrt(r), f64::sqrt(r)]).collect();
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

fn horner2(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &a in c {
        dp = dp * x + p;
        p = p * x + a;
    }
    (p, dp)
}

/// Real roots of a monic real polynomial (standard coefficient order) via the
/// eigenvalues of its balanced companion matrix, polished by Newton steps.
pub fn real_roots(coeffs: &[f64]) -> Result<RootList> {
    if coeffs.is_empty() || coeffs[0] != 1.0 {
        return Err(Error::Usage("real_roots expects a monic polynomial".into()));
    }
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::Numeric(format!("non-finite coefficient at index {i}")));
    }
    let mut work = coeffs.to_vec();
    let mut roots = Vec::with_capacity(coeffs.len() - 1);
    while work.len() > 1 && *work.last().unwrap() == 0.0 {
        work.pop();
        roots.push(0.0);
    }
    let n = work.len() - 1;
    let mut max_imag_residue = 0.0f64;
    match n {
        0 => {}
        1 => roots.push(-work[1]),
        _ => {
            let eig = companion_eigenvalues(&work)?;
            let mut found: Vec<f64> = Vec::with_capacity(n);
            for z in eig.iter() {
                let residue = z.im.abs() / (1.0 + z.re.abs());
                if residue > IMAG_TOL {
                    return Err(Error::RealRootedness { residue, at: format!("{}{:+}i", z.re, z.im) });
                }
                max_imag_residue = max_imag_residue.max(residue);
                found.push(z.re);
            }
            found.sort_by(f64::total_cmp);
            let estimates = found.clone();
            for (k, r) in found.iter_mut().enumerate() {
                let gap = neighbour_gap(&estimates, k);
                *r = polish(&work, *r, gap);
            }
            roots.extend(found);
        }
    }
    let scale = 1.0 + roots.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    for r in roots.iter_mut() {
        if *r < 0.0 && *r >= -ZERO_CLAMP {
            *r = 0.0;
        }
        if *r < -NEG_TOL * scale {
            return Err(Error::NegativeRoot { root: *r });
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(RootList { roots, max_imag_residue })
}

fn neighbour_gap(sorted: &[f64], k: usize) -> f64 {
    let left = if k > 0 { sorted[k] - sorted[k - 1] } else { f64::INFINITY };
    let right = if k + 1 < sorted.len() { sorted[k + 1] - sorted[k] } else { f64::INFINITY };
    left.min(right)
}

fn polish(coeffs: &[f64], mut x: f64, gap: f64) -> f64 {
    let start = x;
    let (mut px, _) = horner2(coeffs, x);
    for _ in 0..4 {
        let (p, dp) = horner2(coeffs, x);
        if p == 0.0 || dp == 0.0 {
            break;
        }
        let next = x - p / dp;
        let (pn, _) = horner2(coeffs, next);
        // stay inside the basin: never move more than a third of the gap
        if !next.is_finite() || pn.abs() >= px.abs() || (next - start).abs() > gap / 3.0 {
            break;
        }
        x = next;
        px = pn;
    }
    x
}

/// Eigenvalues of the balanced companion matrix of a monic polynomial of
/// degree at least two with nonzero constant term.
fn companion_eigenvalues(coeffs: &[f64]) -> Result<Vec<Complex<f64>>> {
    let n = coeffs.len() - 1;
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -coeffs[j + 1];
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    balance(&mut comp);
    let schur = Schur::try_new(comp, f64::EPSILON, 100 * n)
        .ok_or_else(|| Error::Numeric("companion eigenvalue iteration did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().cloned().collect())
}

/// All complex roots of a monic polynomial, Newton-polished.
pub fn complex_roots(coeffs: &[f64]) -> Result<Vec<Complex<f64>>> {
    if coeffs.is_empty() || coeffs[0] != 1.0 {
        return Err(Error::Usage("complex_roots expects a monic polynomial".into()));
    }
    if let Some(i) = coeffs.iter().position(|c| !c.is_finite()) {
        return Err(Error::Numeric(format!("non-finite coefficient at index {i}")));
    }
    let mut work = coeffs.to_vec();
    let mut roots = Vec::with_capacity(coeffs.len() - 1);
    while work.len() > 1 && *work.last().unwrap() == 0.0 {
        work.pop();
        roots.push(Complex::new(0.0, 0.0));
    }
    match work.len() - 1 {
        0 => {}
        1 => roots.push(Complex::new(-work[1], 0.0)),
        _ => {
            let eig = companion_eigenvalues(&work)?;
            for (k, &z) in eig.iter().enumerate() {
                let gap = eig
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != k)
                    .map(|(_, w)| (w - z).norm())
                    .fold(f64::INFINITY, f64::min);
                roots.push(polish_complex(&work, z, gap / 3.0));
            }
        }
    }
    Ok(roots)
}

fn polish_complex(coeffs: &[f64], start: Complex<f64>, radius: f64) -> Complex<f64> {
    let mut z = start;
    let eval = |z: Complex<f64>| {
        let mut p = Complex::new(coeffs[0], 0.0);
        let mut dp = Complex::new(0.0, 0.0);
        for &c in &coeffs[1..] {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let (mut p, _) = eval(z);
    for _ in 0..8 {
        let (_, dp) = eval(z);
        if dp.norm() == 0.0 {
            break;
        }
        let cand = z - p / dp;
        let (pc, _) = eval(cand);
        if pc.norm() >= p.norm() || (cand - start).norm() > radius {
            break;
        }
        z = cand;
        p = pc;
    }
    z
}

/// Radix-2 diagonal similarity balancing (Parlett–Reinsch).
fn balance(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / 2.0;
            while c < g {
                f *= 2.0;
                c *= 4.0;
            }
            g = r * 2.0;
            while c > g {
                f /= 2.0;
                c /= 4.0;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    a[(i, j)] /= f;
                    a[(j, i)] *= f;
                }
            }
        }
    }
}
