//! Experiment drivers: convergence of the finite R-transform to the free one,
//! the tightness of subadditivity, and the law of large numbers and central
//! limit theorem for `⊞_{d,λ}`.
//!
//! Polynomial algebra runs in [`Exact`] arithmetic; only root extraction and
//! pointwise free transforms are in `f64`.

use std::io::Write;

use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::conv::{laguerre_poly, rect_convolve};
use crate::error::{Error, Result};
use crate::finite::finite_r;
use crate::free::{free_rect_r_series, RectCauchy, SymmetricMoments};
use crate::poly::{NonnegPoly, RectParams};
use crate::scalar::{Exact, Scalar};

pub const SCHEMA_VERSION: u32 = 1;
/// Default bound on `d·n` in the sweeps.
pub const DEGREE_CAP: usize = 64;

/// `p^n`: the characteristic polynomial of `n` stacked copies, with the same
/// root measure as `p`.
pub fn stack_power<T: Scalar>(p: &NonnegPoly<T>, n: usize) -> Result<NonnegPoly<T>> {
    if n == 0 {
        return Err(Error::Usage("stacking count must be at least 1".into()));
    }
    Ok(p.pow(n))
}

fn check_cap(params: &RectParams, n: usize, cap: usize) -> Result<RectParams> {
    let scaled = params.scaled(n)?;
    if scaled.d() > cap {
        return Err(Error::Usage(format!(
            "degree d·n = {} exceeds the cap {cap}; raise the cap explicitly to run it",
            scaled.d()
        )));
    }
    Ok(scaled)
}

fn check_degree<T: Scalar>(p: &NonnegPoly<T>, params: &RectParams) -> Result<()> {
    if p.degree() != params.d() {
        return Err(Error::Usage(format!("polynomial has degree {} but d = {}", p.degree(), params.d())));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k: usize,
    pub finite: f64,
    pub free: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub schema_version: u32,
    pub base_coeffs: Vec<f64>,
    pub d: usize,
    pub m: usize,
    pub k_max: usize,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn gap(&self, n: usize, k: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && r.k == k).map(|r| r.gap)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Compares the coefficient of `s^k` in the finite R-transform of `p^n` at
/// `(dn, mn)` with the coefficient of `x^k` in the free rectangular
/// R-transform of `μ_{𝕊p}`, for `k = 1..=k_max`. Finite coefficients beyond
/// the degree `dn` are zero.
pub fn convergence_sweep(
    p: &NonnegPoly<Exact>,
    params: &RectParams,
    n_list: &[usize],
    k_max: usize,
    degree_cap: usize,
) -> Result<ConvergenceReport> {
    check_degree(p, params)?;
    let lambda = Exact::from_usize(params.d()) / Exact::from_usize(params.m());
    let mom = SymmetricMoments::from_poly(p, k_max);
    let free = free_rect_r_series(&mom, &lambda, k_max + 1)?;
    let scaled: Vec<(usize, RectParams)> =
        n_list.iter().map(|&n| Ok((n, check_cap(params, n, degree_cap)?))).collect::<Result<_>>()?;
    let per_n: Vec<Vec<ConvergenceRow>> = scaled
        .par_iter()
        .map(|&(n, pn)| {
            let r = finite_r(&stack_power(p, n)?, &pn)?;
            Ok((1..=k_max)
                .map(|k| {
                    let a = r.series().coeff(k);
                    let b = free.coeff(k);
                    let gap = Scalar::abs(&(a.clone() - b.clone()));
                    Ok(ConvergenceRow { n, k, finite: a.to_f64(), free: b.to_f64(), gap: gap.to_f64() })
                })
                .collect::<Result<Vec<_>>>()?)
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<ConvergenceRow> = per_n.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.k, r.n));
    Ok(ConvergenceReport {
        schema_version: SCHEMA_VERSION,
        base_coeffs: p.to_f64().coeffs().to_vec(),
        d: params.d(),
        m: params.m(),
        k_max,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessRow {
    pub n: usize,
    pub s: f64,
    pub r_p: f64,
    pub r_q: f64,
    pub r_conv: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TightnessReport {
    pub schema_version: u32,
    pub d: usize,
    pub m: usize,
    pub rows: Vec<TightnessRow>,
}

impl TightnessReport {
    pub fn min_gap(&self) -> f64 {
        self.rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min)
    }

    pub fn gap(&self, n: usize, s: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && r.s == s).map(|r| r.gap)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `gap(s) = R_p(s) + R_q(s) - R_{p^n ⊞ q^n}(s)` with free rectangular
/// R-transforms evaluated pointwise at `(dn, mn)`.
pub fn tightness_check(
    p: &NonnegPoly<Exact>,
    q: &NonnegPoly<Exact>,
    params: &RectParams,
    n_list: &[usize],
    s_grid: &[f64],
    degree_cap: usize,
) -> Result<TightnessReport> {
    check_degree(p, params)?;
    check_degree(q, params)?;
    let rp = RectCauchy::new(p, params)?;
    let rq = RectCauchy::new(q, params)?;
    let base: Vec<(f64, f64)> = s_grid.iter().map(|&s| Ok((rp.free_r(s)?, rq.free_r(s)?))).collect::<Result<_>>()?;
    let scaled: Vec<(usize, RectParams)> =
        n_list.iter().map(|&n| Ok((n, check_cap(params, n, degree_cap)?))).collect::<Result<_>>()?;
    let per_n: Vec<Vec<TightnessRow>> = scaled
        .par_iter()
        .map(|&(n, pn)| {
            let conv = rect_convolve(&stack_power(p, n)?, &stack_power(q, n)?, &pn)?;
            let rc = RectCauchy::new(&conv, &pn)?;
            s_grid
                .iter()
                .zip(&base)
                .map(|(&s, &(r_p, r_q))| {
                    let r_conv = rc.free_r(s)?;
                    Ok(TightnessRow { n, s, r_p, r_q, r_conv, gap: r_p + r_q - r_conv })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(TightnessReport { schema_version: SCHEMA_VERSION, d: params.d(), m: params.m(), rows: per_n.concat() })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitRow {
    pub n: usize,
    pub roots: Vec<f64>,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitReport {
    pub schema_version: u32,
    pub experiment: String,
    pub target: String,
    pub d: usize,
    pub m: usize,
    /// For the LLN: `d · max root-mean`, so that every scaled root at `N`
    /// is at most `bound / N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub rows: Vec<LimitRow>,
}

impl LimitReport {
    pub fn distance(&self, n: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n).map(|r| r.distance)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "distance", "roots"])?;
        for row in &self.rows {
            let roots: Vec<String> = row.roots.iter().map(|r| r.to_string()).collect();
            w.write_record([row.n.to_string(), row.distance.to_string(), roots.join(";")])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sorted_n_list(n_list: &[usize]) -> Result<Vec<usize>> {
    let mut ns = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.first() == Some(&0) || ns.is_empty() {
        return Err(Error::Usage("N values must be positive".into()));
    }
    Ok(ns)
}

/// Iterates `q_N = p_1 ⊞ ... ⊞ p_N` (cycling through `p_list`) and reports
/// the roots of `q_N` scaled by `1/N²`, whose distance to `x^d` is the
/// largest scaled root.
pub fn lln_experiment(p_list: &[NonnegPoly<Exact>], params: &RectParams, n_list: &[usize]) -> Result<LimitReport> {
    if p_list.is_empty() {
        return Err(Error::Usage("LLN needs at least one polynomial".into()));
    }
    for p in p_list {
        check_degree(p, params)?;
    }
    let ns = sorted_n_list(n_list)?;
    let max_mean = p_list.iter().map(|p| p.root_mean().to_f64()).fold(0.0, f64::max);
    let mut rows = Vec::with_capacity(ns.len());
    let mut acc = p_list[0].clone();
    let mut at = 1;
    for &n in &ns {
        while at < n {
            acc = rect_convolve(&acc, &p_list[at % p_list.len()], params)?;
            at += 1;
        }
        let nn = Exact::from_usize(n);
        let scaled = acc.scale_roots(&(Exact::one() / (nn.clone() * nn)))?;
        let roots = scaled.roots()?.into_vec();
        let distance = roots.iter().cloned().fold(0.0, f64::max);
        rows.push(LimitRow { n, roots, distance });
    }
    Ok(LimitReport {
        schema_version: SCHEMA_VERSION,
        experiment: "lln".into(),
        target: format!("x^{}", params.d()),
        d: params.d(),
        m: params.m(),
        bound: Some(params.d() as f64 * max_mean),
        rows,
    })
}

/// Iterates `p^{⊞N}`, scales its roots by `1/N` and compares the sorted roots
/// with those of the Laguerre polynomial of the same root-mean `σ²`.
pub fn clt_experiment(p: &NonnegPoly<Exact>, params: &RectParams, n_list: &[usize]) -> Result<LimitReport> {
    check_degree(p, params)?;
    let ns = sorted_n_list(n_list)?;
    let sigma2 = p.root_mean();
    let target = laguerre_poly(params, &(sigma2.clone() / Exact::from_usize(params.m())))?;
    let target_roots = target.roots()?;
    let mut rows = Vec::with_capacity(ns.len());
    let mut acc = p.clone();
    let mut at = 1;
    for &n in &ns {
        while at < n {
            acc = rect_convolve(&acc, p, params)?;
            at += 1;
        }
        let scaled = acc.scale_roots(&(Exact::one() / Exact::from_usize(n)))?;
        let roots = if scaled == target { target_roots.clone() } else { scaled.roots()? };
        rows.push(LimitRow { n, distance: roots.distance(&target_roots), roots: roots.into_vec() });
    }
    Ok(LimitReport {
        schema_version: SCHEMA_VERSION,
        experiment: "clt".into(),
        target: format!("laguerre(d={}, m={}, root mean {})", params.d(), params.m(), sigma2.to_f64()),
        d: params.d(),
        m: params.m(),
        bound: None,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::finite_r;
    use crate::scalar::exact_vec;

    fn ex(r: &[f64]) -> NonnegPoly<Exact> {
        NonnegPoly::from_roots(&exact_vec(r).unwrap()).unwrap()
    }

    #[test]
    fn stacking() {
        let p = ex(&[0.5, 2.0]);
        assert_eq!(stack_power(&p, 1).unwrap(), p);
        assert_eq!(stack_power(&ex(&[1.0]), 2).unwrap().roots().unwrap().roots(), &[1.0, 1.0]);
        let sums = p.power_sums(4);
        let stacked = stack_power(&p, 3).unwrap().power_sums(4);
        for (a, b) in sums.iter().zip(&stacked) {
            assert_eq!(b.clone(), a.clone() * Exact::from_usize(3));
        }
        assert!(stack_power(&p, 0).is_err());
    }

    #[test]
    fn stacked_additivity() {
        let params = RectParams::new(2, 5).unwrap();
        let (p, q) = (ex(&[0.25, 1.5]), ex(&[1.0, 3.0]));
        for n in [1, 2, 4, 8] {
            let pn = params.scaled(n).unwrap();
            let (a, b) = (stack_power(&p, n).unwrap(), stack_power(&q, n).unwrap());
            let lhs = finite_r(&rect_convolve(&a, &b, &pn).unwrap(), &pn).unwrap();
            let rhs = finite_r(&a, &pn).unwrap().checked_add(&finite_r(&b, &pn).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn convergence_of_delta_is_trivial() {
        let params = RectParams::new(2, 3).unwrap();
        let rep = convergence_sweep(&NonnegPoly::monomial(2), &params, &[1, 2, 4], 3, DEGREE_CAP).unwrap();
        assert!(rep.rows.iter().all(|r| r.gap == 0.0));
    }

    #[test]
    fn convergence_for_single_root() {
        let params = RectParams::new(1, 2).unwrap();
        let ns = [1, 2, 4, 8, 16];
        let rep = convergence_sweep(&ex(&[1.0]), &params, &ns, 3, DEGREE_CAP).unwrap();
        for &n in &ns {
            assert_eq!(rep.gap(n, 1), Some(0.0));
        }
        // once the finite transform reaches degree k the gap shrinks with n
        for k in [2, 3] {
            let gaps: Vec<f64> = ns.iter().filter(|&&n| n >= k).map(|&n| rep.gap(n, k).unwrap()).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "k={k}: {gaps:?}");
            assert!(rep.gap(16, k).unwrap() < rep.gap(1, k).unwrap());
        }
        assert!((rep.gap(1, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(convergence_sweep(&ex(&[1.0]), &params, &[65], 2, DEGREE_CAP), Err(Error::Usage(_))));
    }

    #[test]
    fn tightness_identity_and_sign() {
        let params = RectParams::new(1, 2).unwrap();
        let p = ex(&[1.0]);
        let grid = [0.05, 0.1, 0.3];
        let rep = tightness_check(&p, &NonnegPoly::monomial(1), &params, &[1, 2, 4], &grid, DEGREE_CAP).unwrap();
        assert!(rep.rows.iter().all(|r| r.gap.abs() < 1e-10), "{:?}", rep.rows);
        let rep = tightness_check(&p, &p, &params, &[1, 2, 4, 8], &grid, DEGREE_CAP).unwrap();
        assert!(rep.min_gap() >= -1e-9);
        let g: Vec<f64> = [1, 2, 4, 8].iter().map(|&n| rep.gap(n, 0.1).unwrap()).collect();
        assert!(g.windows(2).all(|w| w[1] < w[0]), "{g:?}");
    }

    #[test]
    fn lln_examples() {
        let params = RectParams::new(2, 3).unwrap();
        let rep = lln_experiment(&[NonnegPoly::monomial(2)], &params, &[1, 4, 16]).unwrap();
        assert!(rep.rows.iter().all(|r| r.distance == 0.0));

        let params = RectParams::new(1, 2).unwrap();
        let rep = lln_experiment(&[ex(&[1.0])], &params, &[1, 2, 8, 32]).unwrap();
        for row in &rep.rows {
            assert!((row.distance - 1.0 / row.n as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn lln_bound_holds_with_cycling() {
        let params = RectParams::new(3, 5).unwrap();
        let ps = [ex(&[0.0, 1.0, 2.0]), ex(&[0.5, 0.5, 4.0])];
        let rep = lln_experiment(&ps, &params, &[1, 3, 10, 40]).unwrap();
        let bound = rep.bound.unwrap();
        for row in &rep.rows {
            assert!(row.distance <= bound / row.n as f64 * (1.0 + 1e-6));
        }
    }

    #[test]
    fn clt_examples() {
        let params = RectParams::new(3, 7).unwrap();
        let lag = laguerre_poly(&params, &Exact::new(2.into(), 7.into())).unwrap();
        let rep = clt_experiment(&lag, &params, &[1, 2, 5, 16]).unwrap();
        assert!(rep.rows.iter().all(|r| r.distance < 1e-8));

        let params = RectParams::new(1, 3).unwrap();
        let rep = clt_experiment(&ex(&[2.0]), &params, &[1, 4, 9]).unwrap();
        assert!(rep.rows.iter().all(|r| r.distance < 1e-14));

        let params = RectParams::new(2, 4).unwrap();
        let rep = clt_experiment(&ex(&[0.0, 1.0]), &params, &[2, 8, 32]).unwrap();
        let d: Vec<f64> = rep.rows.iter().map(|r| r.distance).collect();
        assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    }

    #[test]
    fn reports_serialize() {
        let params = RectParams::new(1, 2).unwrap();
        let rep = convergence_sweep(&ex(&[1.0]), &params, &[1, 2], 2, DEGREE_CAP).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["schema_version"], 1);
        let mut buf = Vec::new();
        rep.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,k,finite,free,gap\n"));
        let lln = lln_experiment(&[ex(&[1.0])], &params, &[1, 2]).unwrap();
        let mut buf = Vec::new();
        lln.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }
}
