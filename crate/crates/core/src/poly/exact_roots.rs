//! Certified real roots of rational polynomials.
//!
//! Candidates come from `f64` eigenvalue solvers; every claim about them is
//! checked by exact sign evaluation. Values at floating-point points are
//! computed on an integer multiple of the polynomial, since every finite
//! `f64` is a dyadic rational `n / 2^s`.

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_traits::float::FloatCore;
use num_traits::{One, Signed, ToPrimitive as _, Zero};

use super::{complex_roots, real_roots, RootList, ZERO_CLAMP};
use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar};

/// Roots of a monic rational polynomial. Real-rootedness and nonnegativity
/// are decided exactly. Each factor of the squarefree decomposition is
/// solved in `f64` and the result certified by exact sign changes between
/// the computed roots; when that fails, a Sturm sequence decides and exact
/// bisection locates the roots. Repeated roots come out with their exact
/// multiplicity. Certified roots are polished by Newton steps on the exact
/// polynomial, so their accuracy does not depend on how well the rounded
/// coefficients determine them.
pub(crate) fn squarefree_real_roots(coeffs: &[Exact]) -> Result<RootList> {
    let inc: Vec<Exact> = coeffs.iter().rev().cloned().collect();
    let int = IntPoly::new(&inc);
    let std: Vec<f64> = coeffs.iter().map(Scalar::to_f64).collect();
    if let Ok(found) = real_roots(&std) {
        if let Some(roots) = int.certify(found.roots()) {
            return Ok(RootList { roots, max_imag_residue: found.max_imag_residue });
        }
    }
    let factors = if int.is_squarefree() { vec![(1, inc)] } else { squarefree_factors(inc) };
    let mut roots = Vec::with_capacity(coeffs.len().saturating_sub(1));
    let mut max_imag_residue = 0.0f64;
    for (mult, factor) in factors {
        let std: Vec<f64> = factor.iter().rev().map(Scalar::to_f64).collect();
        let found = match certified_roots(&IntPoly::new(&factor), &std) {
            Some(found) => found,
            None => RootList { roots: SturmIsolation::new(&factor)?.roots(), max_imag_residue: 0.0 },
        };
        max_imag_residue = max_imag_residue.max(found.max_imag_residue);
        for r in found.roots {
            roots.extend(std::iter::repeat_n(r, mult));
        }
    }
    roots.sort_by(f64::total_cmp);
    Ok(RootList { roots, max_imag_residue })
}

/// Certified roots of the squarefree `f`, from its rounded coefficients
/// (standard order). The real parts of complex eigenvalues are tried too:
/// a spurious imaginary part is common for clustered roots.
fn certified_roots(f: &IntPoly, std: &[f64]) -> Option<RootList> {
    if let Ok(found) = real_roots(std) {
        if let Some(roots) = f.certify(found.roots()) {
            return Some(RootList { roots, max_imag_residue: found.max_imag_residue });
        }
    }
    let start = complex_roots(std).ok()?;
    let mut re: Vec<f64> =
        f.aberth(start).iter().map(|z| if z.re.abs() <= ZERO_CLAMP { 0.0 } else { z.re }).collect();
    re.sort_by(f64::total_cmp);
    f.certify(&re).map(|roots| RootList { roots, max_imag_residue: 0.0 })
}

/// `x = n / 2^s` with the smallest `s ≥ 0`.
fn shift_of(x: f64) -> u32 {
    let (mant, exp, _) = x.integer_decode();
    if mant == 0 {
        return 0;
    }
    (-(i32::from(exp) + mant.trailing_zeros() as i32)).max(0) as u32
}

/// `x · 2^s` as an integer; `s` must be at least `shift_of(x)`.
fn scaled(x: f64, s: u32) -> BigInt {
    let (mant, exp, sign) = x.integer_decode();
    if mant == 0 {
        return BigInt::zero();
    }
    let tz = mant.trailing_zeros();
    let n = BigInt::from(mant >> tz) << (i32::from(exp) + tz as i32 + s as i32) as usize;
    if sign < 0 { -n } else { n }
}

/// Ratio-preserving conversion of big integers to `f64`: all are shifted by
/// the same amount so the largest is near `2^500`, leaving room to square.
fn to_f64_common<const N: usize>(xs: [&BigInt; N]) -> [f64; N] {
    let bits = xs.iter().map(|x| x.bits()).max().unwrap_or(0);
    let drop = bits.saturating_sub(500) as usize;
    xs.map(|x| (x >> drop).to_f64().unwrap_or(f64::NAN))
}

/// An integer multiple of a rational polynomial, increasing order.
struct IntPoly {
    c: Vec<BigInt>,
}

impl IntPoly {
    fn new(f: &[Exact]) -> Self {
        let l = f.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        IntPoly { c: f.iter().map(|c| c.numer() * (&l / c.denom())).collect() }
    }

    fn degree(&self) -> usize {
        self.c.len() - 1
    }

    /// Sign of `f(x)`.
    fn sign_at(&self, x: f64) -> i8 {
        let s = shift_of(x);
        let xs = scaled(x, s);
        let n = self.degree();
        let mut acc = BigInt::zero();
        for (i, c) in self.c.iter().enumerate().rev() {
            acc = acc * &xs + (c << (s as usize * (n - i)));
        }
        match acc.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => 0,
            num_bigint::Sign::Plus => 1,
        }
    }

    /// The Newton correction `f(z) / f'(z)`, from exact values.
    fn newton(&self, z: Complex<f64>) -> Option<Complex<f64>> {
        // Horner on the homogenization P(X, D) = D^n f(X/D), D = 2^s
        let s = shift_of(z.re).max(shift_of(z.im));
        let (a, b) = (scaled(z.re, s), scaled(z.im, s));
        let n = self.degree();
        let (mut pr, mut pi) = (BigInt::zero(), BigInt::zero());
        let (mut dr, mut di) = (BigInt::zero(), BigInt::zero());
        for (i, c) in self.c.iter().enumerate().rev() {
            let ndr = &dr * &a - &di * &b + &pr;
            let ndi = &dr * &b + &di * &a + &pi;
            let npr = &pr * &a - &pi * &b + (c << (s as usize * (n - i)));
            let npi = &pr * &b + &pi * &a;
            (dr, di, pr, pi) = (ndr, ndi, npr, npi);
        }
        // f/f' = P / (D ∂P/∂X)
        let (dr, di) = (dr << s as usize, di << s as usize);
        let [pr, pi, dr, di] = to_f64_common([&pr, &pi, &dr, &di]);
        let dp = Complex::new(dr, di);
        if dp.norm() == 0.0 {
            return None;
        }
        Some(Complex::new(pr, pi) / dp)
    }

    /// Aberth–Ehrlich iteration on all roots at once. Pulls apart roots that
    /// the companion matrix merged into a complex pair. Converged roots are
    /// frozen.
    fn aberth(&self, mut z: Vec<Complex<f64>>) -> Vec<Complex<f64>> {
        let n = z.len();
        let mut done = vec![false; n];
        for _ in 0..200 {
            let mut worst = 0.0f64;
            for i in 0..n {
                if done[i] {
                    continue;
                }
                let Some(newton) = self.newton(z[i]) else { return z };
                let repulse: Complex<f64> = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
                let w = newton / (Complex::new(1.0, 0.0) - newton * repulse);
                if !w.re.is_finite() || !w.im.is_finite() {
                    return z;
                }
                z[i] -= w;
                let step = w.norm() / (1.0 + z[i].norm());
                done[i] = step <= 4.0 * f64::EPSILON;
                worst = worst.max(step);
            }
            if worst <= 4.0 * f64::EPSILON {
                break;
            }
        }
        z
    }

    /// When the squarefree `f` provably has one root in each gap around the
    /// sorted approximations `roots`, all of them `≥ 0`, returns the roots
    /// polished within those gaps.
    fn certify(&self, roots: &[f64]) -> Option<Vec<f64>> {
        if roots.len() != self.degree() {
            return None;
        }
        if self.c[0].is_zero() {
            if roots.first() != Some(&0.0) {
                return None;
            }
            let rest = IntPoly { c: self.c[1..].to_vec() }.certify(&roots[1..])?;
            return Some(std::iter::once(0.0).chain(rest).collect());
        }
        if roots.is_empty() {
            return Some(vec![]);
        }
        if roots[0] <= 0.0 {
            return None;
        }
        let mut points = vec![0.0];
        points.extend(roots.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        points.push(2.0 * roots[roots.len() - 1] + 1.0);
        let mut last = 0i8;
        for &x in &points {
            let s = self.sign_at(x);
            if s == 0 || s == last {
                return None;
            }
            last = s;
        }
        Some(roots.iter().zip(points.windows(2)).map(|(&r, w)| self.polish(r, w[0], w[1])).collect())
    }

    /// Sign of `f(x)` and the Newton correction `f(x) / f'(x)`.
    fn newton_real(&self, x: f64) -> (i8, f64) {
        let s = shift_of(x);
        let xs = scaled(x, s);
        let n = self.degree();
        let (mut p, mut dp) = (BigInt::zero(), BigInt::zero());
        for (i, c) in self.c.iter().enumerate().rev() {
            dp = dp * &xs + &p;
            p = p * &xs + (c << (s as usize * (n - i)));
        }
        let sign = match p.sign() {
            num_bigint::Sign::Minus => -1,
            num_bigint::Sign::NoSign => return (0, 0.0),
            num_bigint::Sign::Plus => 1,
        };
        let [p, dp] = to_f64_common([&p, &(dp << s as usize)]);
        (sign, p / dp)
    }

    /// Safeguarded Newton from `x` on the bracket `(lo, hi)`, across which
    /// `f` changes sign.
    fn polish(&self, mut x: f64, mut lo: f64, mut hi: f64) -> f64 {
        let s_lo = self.sign_at(lo);
        for _ in 0..200 {
            let (sx, step) = self.newton_real(x);
            if sx == 0 {
                return x;
            }
            if sx == s_lo {
                lo = x;
            } else {
                hi = x;
            }
            let mut newton = x - step;
            if newton == lo || newton == hi {
                // a sub-ulp step rounded onto the bracket; try the neighbour
                newton = if step > 0.0 { x.next_down() } else { x.next_up() };
            }
            let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if next == x || (next - x).abs() < 0.5 * f64::EPSILON * x.abs() || hi - lo <= f64::EPSILON * hi {
                return next;
            }
            x = next;
        }
        x
    }

    /// `gcd(f, f') = 1` modulo a large prime that keeps the degree implies
    /// `f` is squarefree over `Q`. `false` means undecided.
    fn is_squarefree(&self) -> bool {
        let p = BigInt::from(PRIME);
        let f: Vec<u64> = self.c.iter().map(|c| c.mod_floor(&p).to_u64().unwrap_or(0)).collect();
        if f.last() == Some(&0) {
            return false;
        }
        let df: Vec<u64> = f.iter().enumerate().skip(1).map(|(i, &c)| mul_mod(c, i as u64 % PRIME)).collect();
        gcd_degree_mod(f, df) == 0
    }
}

const PRIME: u64 = 0xFFFF_FFFF_FFFF_FFC5;

fn mul_mod(a: u64, b: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(PRIME)) as u64
}

fn inv_mod(a: u64) -> u64 {
    let (mut base, mut e, mut acc) = (a, PRIME - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base);
        }
        base = mul_mod(base, base);
        e >>= 1;
    }
    acc
}

fn trim_mod(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

/// Degree of the gcd over `Z/PRIME`, increasing order.
fn gcd_degree_mod(a: Vec<u64>, b: Vec<u64>) -> usize {
    let (mut a, mut b) = (trim_mod(a), trim_mod(b));
    while !b.is_empty() {
        let inv = inv_mod(*b.last().unwrap_or(&1));
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let c = mul_mod(*a.last().unwrap_or(&0), inv);
            for (j, &bj) in b.iter().enumerate() {
                let t = mul_mod(c, bj);
                a[shift + j] = if a[shift + j] >= t { a[shift + j] - t } else { a[shift + j] + (PRIME - t) };
            }
            a = trim_mod(a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

fn eval_exact(f: &[Exact], x: &Exact) -> Exact {
    f.iter().rev().fold(Exact::zero(), |acc, c| acc * x + c)
}

fn sturm_sequence(f: &[Exact]) -> Vec<Vec<Exact>> {
    let mut seq = vec![f.to_vec(), deriv(f)];
    loop {
        let n = seq.len();
        let (_, r) = divrem(&seq[n - 2], &seq[n - 1]);
        if is_zero_poly(&r) {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    seq
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn sign(x: &Exact) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_negative() {
        -1
    } else {
        1
    }
}

fn changes_at(seq: &[Vec<Exact>], x: &Exact) -> usize {
    sign_changes(seq.iter().map(|g| sign(&eval_exact(g, x))))
}

/// Sturm sequence of a squarefree rational polynomial (increasing order)
/// whose roots are known to be real and nonnegative once constructed.
struct SturmIsolation<'a> {
    f: &'a [Exact],
    seq: Vec<Vec<Exact>>,
    bound: Exact,
}

impl<'a> SturmIsolation<'a> {
    fn new(f: &'a [Exact]) -> Result<Self> {
        let degree = f.len() - 1;
        let seq = sturm_sequence(f);
        let lead = f[degree].clone();
        let bound = Exact::one() + f[..degree].iter().map(|c| Scalar::abs(&(c / &lead))).fold(Exact::zero(), |a, b| a.max(b));
        let v_lo = changes_at(&seq, &-bound.clone());
        let real = v_lo - changes_at(&seq, &bound);
        if real < degree {
            return Err(Error::ComplexRoots { real, degree });
        }
        // roots in (-bound, 0]; a root at zero is allowed
        let nonpositive = v_lo - changes_at(&seq, &Exact::zero());
        let at_zero = usize::from(f[0].is_zero());
        let iso = SturmIsolation { f, seq, bound };
        if nonpositive > at_zero {
            let root = iso.isolate(-iso.bound.clone(), Exact::zero())[0];
            return Err(Error::NegativeRoot { root });
        }
        Ok(iso)
    }

    fn roots(&self) -> Vec<f64> {
        let mut r = self.isolate(Exact::zero() - Exact::new(1.into(), 2.into()), self.bound.clone());
        r.sort_by(f64::total_cmp);
        r
    }

    fn isolate(&self, lo: Exact, hi: Exact) -> Vec<f64> {
        let two = Exact::from_i64(2);
        let mut roots = Vec::new();
        let (v_lo, v_hi) = (changes_at(&self.seq, &lo), changes_at(&self.seq, &hi));
        // (a, b] with the sign-change counts at both ends
        let mut stack = vec![(lo, v_lo, hi, v_hi)];
        while let Some((a, va, b, vb)) = stack.pop() {
            match va - vb {
                0 => {}
                1 => roots.push(bisect_single(self.f, a, b)),
                _ => {
                    let mid = (&a + &b) / &two;
                    let vm = changes_at(&self.seq, &mid);
                    stack.push((a, va, mid.clone(), vm));
                    stack.push((mid, vm, b, vb));
                }
            }
        }
        roots
    }
}

/// The single simple root of `f` in `(a, b]`, to `f64` resolution.
fn bisect_single(f: &[Exact], mut a: Exact, mut b: Exact) -> f64 {
    let two = Exact::from_i64(2);
    let sb = sign(&eval_exact(f, &b));
    if sb == 0 {
        return Scalar::to_f64(&b);
    }
    for _ in 0..256 {
        let mid = (&a + &b) / &two;
        let sm = sign(&eval_exact(f, &mid));
        if sm == 0 {
            return Scalar::to_f64(&mid);
        }
        if sm == sb {
            b = mid;
        } else {
            a = mid;
        }
        let (fa, fb) = (Scalar::to_f64(&a), Scalar::to_f64(&b));
        if fb - fa <= f64::EPSILON * fa.abs().max(fb.abs()) || fb - fa < 1e-300 {
            break;
        }
    }
    Scalar::to_f64(&((&a + &b) / &two))
}

// Dense rational polynomials in increasing-degree order, for the squarefree
// decomposition only.

fn trim(mut a: Vec<Exact>) -> Vec<Exact> {
    while a.len() > 1 && a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

fn make_monic(a: Vec<Exact>) -> Vec<Exact> {
    let lead = a.last().cloned().unwrap_or_else(Exact::one);
    a.into_iter().map(|c| c / lead.clone()).collect()
}

fn deriv(a: &[Exact]) -> Vec<Exact> {
    if a.len() <= 1 {
        return vec![Exact::zero()];
    }
    a.iter().enumerate().skip(1).map(|(i, c)| c.clone() * Exact::from_usize(i)).collect()
}

fn divrem(a: &[Exact], b: &[Exact]) -> (Vec<Exact>, Vec<Exact>) {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![Exact::zero()], trim(r));
    }
    let lead = b[db].clone();
    let mut q = vec![Exact::zero(); r.len() - db];
    for k in (0..q.len()).rev() {
        let c = r[k + db].clone() / lead.clone();
        if !c.is_zero() {
            for (j, bj) in b.iter().enumerate() {
                r[k + j] = r[k + j].clone() - c.clone() * bj.clone();
            }
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    (q, trim(r))
}

fn is_zero_poly(a: &[Exact]) -> bool {
    a.iter().all(|c| c.is_zero())
}

fn gcd(a: Vec<Exact>, b: Vec<Exact>) -> Vec<Exact> {
    let (mut a, mut b) = (trim(a), trim(b));
    while !is_zero_poly(&b) {
        let (_, r) = divrem(&a, &b);
        a = b;
        b = if is_zero_poly(&r) { r } else { make_monic(r) };
    }
    make_monic(a)
}

fn sub(a: &[Exact], b: &[Exact]) -> Vec<Exact> {
    let n = a.len().max(b.len());
    let at = |v: &[Exact], i: usize| v.get(i).cloned().unwrap_or_else(Exact::zero);
    trim((0..n).map(|i| at(a, i) - at(b, i)).collect())
}

/// Yun's algorithm: `f = Π a_i^i` with squarefree, pairwise coprime `a_i`.
fn squarefree_factors(f: Vec<Exact>) -> Vec<(usize, Vec<Exact>)> {
    let f = make_monic(trim(f));
    if f.len() == 1 {
        return vec![];
    }
    let df = deriv(&f);
    let a0 = gcd(f.clone(), df.clone());
    let mut b = divrem(&f, &a0).0;
    let c = divrem(&df, &a0).0;
    let mut d = sub(&c, &deriv(&b));
    let mut out = Vec::new();
    let mut i = 1;
    while b.len() > 1 {
        let a = gcd(b.clone(), d.clone());
        let nb = divrem(&b, &a).0;
        let nc = divrem(&d, &a).0;
        d = sub(&nc, &deriv(&nb));
        if a.len() > 1 {
            out.push((i, make_monic(a)));
        }
        b = nb;
        i += 1;
    }
    out
}
