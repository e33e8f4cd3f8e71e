//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rectfree::conv::{laguerre_poly, rect_convolve, rect_convolve_diffop};
use rectfree::finite::{finite_r, finite_r_invert, FiniteR};
use rectfree::free::{free_rect_r_series, rect_h_series, RectCauchy, SymmetricMoments};
use rectfree::limits::{clt_experiment, convergence_sweep, lln_experiment, tightness_check};
use rectfree::mc::empirical_convolution;
use rectfree::poly::complex_roots;
use rectfree::scalar::exact_vec;
use rectfree::{Exact, NonnegPoly, RectParams, Result, Scalar};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_roots(rng: &mut ChaCha8Rng, d: usize, top: f64) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(0.0..top)).collect()
}

fn random_poly(rng: &mut ChaCha8Rng, d: usize) -> NonnegPoly {
    NonnegPoly::from_roots(&random_roots(rng, d, 3.0)).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng, d_max: usize, m_max: usize) -> RectParams {
    let d = rng.random_range(1..=d_max);
    RectParams::new(d, rng.random_range(d..=m_max.max(d))).unwrap()
}

/// Largest per-coefficient relative error; entries where both sides vanish count as exact.
fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let scale = x.abs().max(y.abs());
            if scale == 0.0 { 0.0 } else { (x - y).abs() / scale }
        })
        .fold(0.0, f64::max)
}

fn convolution_identity() -> Result<Outcome> {
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let params = random_params(&mut rng, 16, 64);
        let p = random_poly(&mut rng, params.d());
        let c = rect_convolve(&p, &NonnegPoly::monomial(params.d()), &params)?;
        worst = worst.max(max_rel(c.coeffs(), p.coeffs()));
    }
    outcome(worst <= 1e-12, format!("50 polys, max rel err {worst:.2e}"))
}

fn cross_route() -> Result<Outcome> {
    let mut rng = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let params = random_params(&mut rng, 16, 48);
        let p = random_poly(&mut rng, params.d());
        let q = random_poly(&mut rng, params.d());
        let a = rect_convolve(&p, &q, &params)?;
        let b = rect_convolve_diffop(&p, &q, &params)?;
        worst = worst.max(max_rel(a.coeffs(), b.coeffs()));
    }
    outcome(worst <= 1e-9, format!("200 pairs, max rel err {worst:.2e}"))
}

fn real_rootedness() -> Result<Outcome> {
    let mut rng = rng(3);
    let (mut imag, mut min_root) = (0.0f64, f64::INFINITY);
    for _ in 0..500 {
        let params = random_params(&mut rng, 12, 36);
        let p = random_poly(&mut rng, params.d());
        let q = random_poly(&mut rng, params.d());
        let c = rect_convolve(&p, &q, &params)?;
        for z in complex_roots(c.coeffs())? {
            imag = imag.max(z.im.abs());
            min_root = min_root.min(z.re);
        }
    }
    outcome(
        imag < 1e-8 && min_root >= -1e-9,
        format!("500 convolutions, max |Im| {imag:.2e}, min root {min_root:.2e}"),
    )
}

fn monte_carlo() -> Result<Outcome> {
    let mut rng = rng(4);
    let mut worst_z = 0.0f64;
    for (i, &(d, m)) in [(1, 2), (2, 2), (2, 4), (3, 6)].iter().enumerate() {
        let params = RectParams::new(d, m)?;
        let p = random_poly(&mut rng, d);
        let q = random_poly(&mut rng, d);
        let exact = rect_convolve(&p.to_exact()?, &q.to_exact()?, &params)?.to_f64();
        let emp = empirical_convolution(&p, &q, &params, 100_000, 40 + i as u64)?;
        worst_z = emp.z_scores(exact.coeffs()).into_iter().fold(worst_z, f64::max);
    }
    // d = 1: singular values a, b give x - (a² + b²).
    let (a, b) = (rng.random_range(0.1..2.0f64), rng.random_range(0.1..2.0f64));
    let params = RectParams::new(1, 2)?;
    let p = NonnegPoly::from_roots(&[a * a])?;
    let q = NonnegPoly::from_roots(&[b * b])?;
    let c = rect_convolve(&p, &q, &params)?;
    let closed = -(a * a + b * b);
    let closed_ok = (c.coeffs()[1] - closed).abs() <= 1e-14 * closed.abs();
    let emp = empirical_convolution(&p, &q, &params, 100_000, 50)?;
    worst_z = emp.z_scores(&[1.0, closed]).into_iter().fold(worst_z, f64::max);
    outcome(
        worst_z <= 4.0 && closed_ok,
        format!("max |z| {worst_z:.2} over 5 cases at 1e5 samples, d=1 closed form {}", if closed_ok { "ok" } else { "MISMATCH" }),
    )
}

/// Polynomial with rational roots `k/8`, `0 ≤ k ≤ 24`.
fn random_exact_poly(rng: &mut ChaCha8Rng, d: usize) -> NonnegPoly<Exact> {
    let roots: Vec<Exact> = (0..d).map(|_| Exact::new(rng.random_range(0..=24).into(), 8.into())).collect();
    NonnegPoly::from_roots(&roots).unwrap()
}

fn max_rel_exact(a: &[Exact], b: &[Exact]) -> f64 {
    let a: Vec<f64> = a.iter().map(Scalar::to_f64).collect();
    let b: Vec<f64> = b.iter().map(Scalar::to_f64).collect();
    if a == b { 0.0 } else { max_rel(&a, &b).max(f64::MIN_POSITIVE) }
}

// The transform of a rounded convolution amplifies coefficient rounding by
// up to ~1e8 at degree 12, so this runs in exact arithmetic.
fn r_additivity() -> Result<Outcome> {
    let mut rng = rng(5);
    let mut worst = 0.0f64;
    let shapes: [fn(usize) -> usize; 3] = [|d| d, |d| 2 * d, |d| d + 7];
    for i in 0..100 {
        let d = rng.random_range(1..=12);
        let params = RectParams::new(d, shapes[i % 3](d))?;
        let p = random_exact_poly(&mut rng, d);
        let q = random_exact_poly(&mut rng, d);
        let lhs = finite_r(&rect_convolve(&p, &q, &params)?, &params)?;
        let rhs = finite_r(&p, &params)?.checked_add(&finite_r(&q, &params)?)?;
        worst = worst.max(max_rel_exact(lhs.coeffs(), rhs.coeffs()));
    }
    outcome(worst <= 1e-9, format!("100 pairs over m = d, 2d, d+7, max rel err {worst:.2e}"))
}

fn inversion_roundtrip() -> Result<Outcome> {
    let mut rng = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let params = random_params(&mut rng, 12, 36);
        let p = random_poly(&mut rng, params.d());
        let back = finite_r_invert(&finite_r(&p, &params)?)?;
        worst = worst.max(max_rel(back.coeffs(), p.coeffs()));
    }
    outcome(worst <= 1e-9, format!("200 polys, max rel err {worst:.2e}"))
}

fn laguerre_characterization() -> Result<Outcome> {
    let (mut lead, mut rest, mut inv) = (0.0f64, 0.0f64, 0.0f64);
    for d in 1..=32 {
        for m in [d, d + 1, 2 * d] {
            let params = RectParams::new(d, m)?;
            for sigma2 in [Exact::new(1.into(), (m as i64).into()), Exact::new(3.into(), 2.into())] {
                let lag = laguerre_poly(&params, &sigma2)?;
                let r = finite_r(&lag, &params)?;
                let target = Exact::from_usize(m) * sigma2;
                lead = lead.max(max_rel_exact(&r.coeffs()[1..2], std::slice::from_ref(&target)));
                rest = r.coeffs().iter().enumerate().filter(|&(k, _)| k != 1).fold(rest, |acc, (_, c)| acc.max(Scalar::abs(c).to_f64()));
                let mut lin = vec![Exact::zero(); d + 1];
                lin[1] = target;
                let back = finite_r_invert(&FiniteR::new(params, lin)?)?;
                inv = inv.max(max_rel_exact(back.coeffs(), lag.coeffs()));
            }
        }
    }
    outcome(
        lead <= 1e-9 && rest < 1e-9 && inv <= 1e-8,
        format!("d <= 32: linear rel err {lead:.2e}, other coeffs <= {rest:.2e}, inversion rel err {inv:.2e}"),
    )
}

fn laguerre_divisibility() -> Result<Outcome> {
    let mut worst = 0.0f64;
    for d in 1..=16 {
        for m in [d, 2 * d + 1] {
            let params = RectParams::new(d, m)?;
            let mm = m as i64;
            let (s2, t2) = (Exact::new(3.into(), (10 * mm).into()), Exact::new(7.into(), (10 * mm).into()));
            let lhs = laguerre_poly(&params, &(s2.clone() + t2.clone()))?.roots()?;
            let conv = rect_convolve(&laguerre_poly(&params, &s2)?, &laguerre_poly(&params, &t2)?, &params)?;
            worst = worst.max(lhs.distance(&conv.roots()?));
        }
    }
    outcome(worst < 1e-8, format!("d <= 16, max root distance {worst:.2e}"))
}

fn transform_plumbing() -> Result<Outcome> {
    let mut rng = rng(9);
    let (mut jh, mut hj, mut series_gap) = (0.0f64, 0.0f64, 0.0f64);
    let mut exact_ok = true;
    for _ in 0..40 {
        let params = random_params(&mut rng, 8, 20);
        // adjacent roots at least 0.2 apart keep the coefficient data faithful to the atoms
        let roots: Vec<f64> = (0..params.d()).map(|i| 0.4 * i as f64 + rng.random_range(0.0..0.2)).collect();
        let p = NonnegPoly::from_roots(&roots)?;
        let rc = RectCauchy::new(&p, &params)?;
        let x = 2.0 * (1.0 + p.max_root()?.sqrt());
        jh = jh.max((rc.j(rc.h(x)?)? - x).abs() / x);
        let u = 0.5 * rc.h(x)?;
        hj = hj.max((rc.h(rc.j(u)?)? - u).abs() / u);

        let mom = SymmetricMoments::from_roots(&roots, 24)?;
        let series = free_rect_r_series(&mom, &params.lambda(), 21)?;
        let s = (0.02 / p.max_root()?.max(1e-3)).sqrt().min(0.1);
        series_gap = series_gap.max((series.eval(&(s * s)) - rc.free_r(s)?).abs());

        let exact_mom = SymmetricMoments::from_poly(&p.to_exact()?, 6);
        let lambda = Exact::new(params.d().into(), params.m().into());
        let h = rect_h_series(&exact_mom, &lambda, 6)?;
        exact_ok &= h.coeffs()[0].is_zero() && h.coeffs()[1].is_one();
    }
    outcome(
        jh <= 1e-10 && hj <= 1e-10 && series_gap <= 1e-6 && exact_ok,
        format!(
            "40 polys: J(H(x)) {jh:.2e}, H(J(u)) {hj:.2e}, series vs pointwise {series_gap:.2e}, H series 0/1 {}",
            if exact_ok { "exact" } else { "WRONG" }
        ),
    )
}

fn convergence() -> Result<Outcome> {
    let p = NonnegPoly::from_roots(&[Exact::one()])?;
    let params = RectParams::from_lambda(1, "1/2")?;
    let ns = [1, 2, 4, 8, 16, 32];
    let rep = convergence_sweep(&p, &params, &ns, 3, 64)?;
    let first_zero = ns.iter().all(|&n| rep.gap(n, 1) == Some(0.0));
    let g = |n, k| rep.gap(n, k).unwrap_or(f64::NAN);
    let decreasing = g(32, 2) < g(1, 2) && g(32, 3) < g(1, 3);
    outcome(
        first_zero && decreasing,
        format!(
            "j=1 gaps zero: {first_zero}; j=2 gap {:.2e} -> {:.2e}; j=3 gap {:.2e} -> {:.2e}",
            g(1, 2),
            g(32, 2),
            g(1, 3),
            g(32, 3)
        ),
    )
}

fn tightness() -> Result<Outcome> {
    let pairs: [(&[f64], &[f64], &str); 3] = [(&[1.0], &[1.0], "1/2"), (&[0.5, 2.0], &[1.0, 3.0], "2/3"), (&[0.0, 1.0, 4.0], &[2.0, 2.0, 2.0], "1/1")];
    let ns = [1, 2, 4, 8, 16];
    let grid = [0.02, 0.05, 0.1];
    let mut min_gap = f64::INFINITY;
    let mut decreasing = true;
    let mut trend = Vec::new();
    for (pr, qr, lambda) in pairs {
        let p = NonnegPoly::from_roots(&exact_vec(pr)?)?;
        let q = NonnegPoly::from_roots(&exact_vec(qr)?)?;
        let params = RectParams::from_lambda(pr.len(), lambda)?;
        let rep = tightness_check(&p, &q, &params, &ns, &grid, 64)?;
        min_gap = min_gap.min(rep.min_gap());
        let (first, last) = (rep.gap(1, 0.05).unwrap_or(f64::NAN), rep.gap(16, 0.05).unwrap_or(f64::NAN));
        decreasing &= last < first;
        trend.push(format!("{first:.2e} -> {last:.2e}"));
    }
    outcome(
        min_gap >= -1e-9 && decreasing,
        format!("3 pairs, min gap {min_gap:.2e}, gap at s=0.05 n=1 -> 16: {}", trend.join(", ")),
    )
}

fn limit_theorems() -> Result<Outcome> {
    let mut rng = rng(12);
    let ns = [1, 2, 4, 8, 16, 32, 64, 128, 256];
    let params = RectParams::new(3, 5)?;
    let p_list: Vec<NonnegPoly<Exact>> =
        (0..3).map(|_| NonnegPoly::from_roots(&exact_vec(&random_roots(&mut rng, 3, 3.0))?)).collect::<Result<_>>()?;
    let lln = lln_experiment(&p_list, &params, &ns)?;
    let bound = lln.bound.unwrap_or(f64::NAN);
    let lln_ok = lln.rows.iter().all(|r| r.distance <= bound / r.n as f64 * (1.0 + 1e-6));

    let lag_params = RectParams::new(4, 7)?;
    let lag = laguerre_poly(&lag_params, &Exact::new(1.into(), 7.into()))?;
    let clt_ns = [1, 2, 4, 8, 16, 32, 64, 128];
    let fixed = clt_experiment(&lag, &lag_params, &clt_ns)?;
    let fixed_max = fixed.rows.iter().map(|r| r.distance).fold(0.0, f64::max);

    let quad = NonnegPoly::from_roots(&[Exact::zero(), Exact::one()])?;
    let trend = clt_experiment(&quad, &RectParams::new(2, 4)?, &[2, 128])?;
    let (d2, d128) = (trend.distance(2).unwrap_or(f64::NAN), trend.distance(128).unwrap_or(f64::NAN));
    outcome(
        lln_ok && fixed_max < 1e-8 && d128 < d2,
        format!(
            "LLN within bound/N up to N=256: {lln_ok}; Laguerre CLT max distance {fixed_max:.2e}; x^2-x distance {d2:.2e} -> {d128:.2e}"
        ),
    )
}

fn main() -> ExitCode {
    type Check = fn() -> Result<Outcome>;
    let criteria: [(&str, Check, u64); 12] = [
        ("convolution identity", convolution_identity, 1),
        ("cross-route equality", cross_route, 5),
        ("real-rootedness closure", real_rootedness, 30),
        ("Monte-Carlo oracle", monte_carlo, 120),
        ("finite R additivity", r_additivity, 5),
        ("inversion roundtrip", inversion_roundtrip, 5),
        ("Laguerre characterization", laguerre_characterization, 2),
        ("Laguerre divisibility", laguerre_divisibility, 2),
        ("transform plumbing", transform_plumbing, 5),
        ("convergence", convergence, 10),
        ("subadditivity tightness", tightness, 30),
        ("LLN/CLT", limit_theorems, 60),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let (pass, detail) = match result {
            Ok(o) => (o.pass && in_time, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} ({:.3} s, limit {limit} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
