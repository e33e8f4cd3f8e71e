//! Monte-Carlo evaluation of the defining Haar integral of `⊞_{d,λ}`.
//!
//! Samples `χ[(A + Q B Rᵀ)ᵀ(A + Q B Rᵀ)]` with `Q ∈ O(m)`, `R ∈ O(d)` Haar.
//! Samples are split into chunks of [`DEFAULT_CHUNK`]; chunk `c` draws from
//! `ChaCha8Rng::seed_from_u64(seed)` on stream `c`, and chunk statistics are
//! merged in chunk order, so results do not depend on the thread count.

use std::io::Write;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{NonnegPoly, RectParams};

pub const DEFAULT_CHUNK: usize = 1024;

/// A dense `m × d` real matrix with `m ≥ d`.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMatrix {
    data: DMatrix<f64>,
}

impl RectMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if data.nrows() < data.ncols() {
            return Err(Error::Domain(format!("{}×{} matrix has fewer rows than columns", data.nrows(), data.ncols())));
        }
        Ok(RectMatrix { data })
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }
}

/// Haar-distributed `n × n` orthogonal matrix: QR of a Gaussian matrix with
/// the columns of `Q` multiplied by the signs of `diag(R)`.
pub fn haar_orthogonal<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// The `m × d` matrix with `√r_i` on the top diagonal block.
pub fn matrix_from_poly(p: &NonnegPoly<f64>, params: &RectParams) -> Result<RectMatrix> {
    if p.degree() != params.d() {
        return Err(Error::Usage(format!("polynomial has degree {} but d = {}", p.degree(), params.d())));
    }
    let roots = p.roots()?;
    let mut a = DMatrix::<f64>::zeros(params.m(), params.d());
    for (i, &r) in roots.roots().iter().enumerate() {
        a[(i, i)] = f64::sqrt(r);
    }
    RectMatrix::new(a)
}

/// `det(x I - MᵀM)` from the eigenvalues of the Gram matrix.
pub fn char_poly_gram(m: &RectMatrix) -> Result<NonnegPoly<f64>> {
    gram_char_poly(&m.data)
}

fn gram_char_poly(m: &DMatrix<f64>) -> Result<NonnegPoly<f64>> {
    let gram = m.transpose() * m;
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numeric("symmetric eigen-solver did not converge".into()))?;
    let vals: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    NonnegPoly::from_roots(&vals)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalConv {
    pub mean_coeffs: Vec<f64>,
    pub stderr_coeffs: Vec<f64>,
    pub n_samples: usize,
    pub seed: u64,
    pub chunk_size: usize,
}

impl EmpiricalConv {
    /// `|mean - exact| / stderr` per coefficient; zero where both the
    /// difference and the standard error vanish to rounding.
    pub fn z_scores(&self, exact: &[f64]) -> Vec<f64> {
        self.mean_coeffs
            .iter()
            .zip(&self.stderr_coeffs)
            .zip(exact)
            .map(|((m, s), e)| {
                let diff = (m - e).abs();
                if *s > 0.0 {
                    diff / s
                } else if diff <= 1e-12 * (1.0 + e.abs()) {
                    0.0
                } else {
                    f64::INFINITY
                }
            })
            .collect()
    }
}

struct Sampler {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl Sampler {
    fn new(p: &NonnegPoly<f64>, q: &NonnegPoly<f64>, params: &RectParams) -> Result<Self> {
        Ok(Sampler { a: matrix_from_poly(p, params)?.data, b: matrix_from_poly(q, params)?.data })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let (m, d) = self.a.shape();
        let q = haar_orthogonal(m, rng);
        let r = haar_orthogonal(d, rng);
        let c = &self.a + q * &self.b * r.transpose();
        Ok(gram_char_poly(&c)?.coeffs().to_vec())
    }

    fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(chunk as u64);
        rng
    }

    fn chunk_samples(&self, seed: u64, chunk: usize, len: usize) -> Result<Vec<Vec<f64>>> {
        let mut rng = Self::chunk_rng(seed, chunk);
        (0..len).map(|_| self.sample(&mut rng)).collect()
    }
}

#[derive(Clone)]
struct Moments {
    n: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Moments { n: 0.0, mean: vec![0.0; k], m2: vec![0.0; k] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1.0;
        for ((mu, m2), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = v - *mu;
            *mu += delta / self.n;
            *m2 += delta * (v - *mu);
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        if other.n == 0.0 {
            return self;
        }
        let n = self.n + other.n;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * other.n / n;
            self.m2[i] += other.m2[i] + delta * delta * self.n * other.n / n;
        }
        self.n = n;
        self
    }
}

fn chunk_lengths(n_samples: usize, chunk_size: usize) -> Vec<usize> {
    let full = n_samples / chunk_size;
    let mut v = vec![chunk_size; full];
    if n_samples % chunk_size != 0 {
        v.push(n_samples % chunk_size);
    }
    v
}

pub fn empirical_convolution(
    p: &NonnegPoly<f64>,
    q: &NonnegPoly<f64>,
    params: &RectParams,
    n_samples: usize,
    seed: u64,
) -> Result<EmpiricalConv> {
    empirical_convolution_chunked(p, q, params, n_samples, seed, DEFAULT_CHUNK)
}

pub fn empirical_convolution_chunked(
    p: &NonnegPoly<f64>,
    q: &NonnegPoly<f64>,
    params: &RectParams,
    n_samples: usize,
    seed: u64,
    chunk_size: usize,
) -> Result<EmpiricalConv> {
    if n_samples == 0 || chunk_size == 0 {
        return Err(Error::Usage("sample count and chunk size must be positive".into()));
    }
    let sampler = Sampler::new(p, q, params)?;
    let k = params.d() + 1;
    let partials: Vec<Moments> = chunk_lengths(n_samples, chunk_size)
        .into_par_iter()
        .enumerate()
        .map(|(c, len)| {
            let mut rng = Sampler::chunk_rng(seed, c);
            let mut acc = Moments::new(k);
            for _ in 0..len {
                acc.push(&sampler.sample(&mut rng)?);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let total = partials.iter().fold(Moments::new(k), |acc, m| acc.merge(m));
    let stderr_coeffs = if n_samples > 1 {
        total.m2.iter().map(|&v| f64::sqrt((v / (total.n - 1.0)).max(0.0) / total.n)).collect()
    } else {
        vec![0.0; k]
    };
    let mut mean_coeffs = total.mean;
    mean_coeffs[0] = 1.0;
    Ok(EmpiricalConv { mean_coeffs, stderr_coeffs, n_samples, seed, chunk_size })
}

/// Writes one CSV row per sample: `sample, c0, c1, ..., cd` in the same order
/// and with the same streams as [`empirical_convolution`].
pub fn write_samples_csv<W: Write>(
    p: &NonnegPoly<f64>,
    q: &NonnegPoly<f64>,
    params: &RectParams,
    n_samples: usize,
    seed: u64,
    out: W,
) -> Result<()> {
    let sampler = Sampler::new(p, q, params)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["sample".to_string()];
    header.extend((0..=params.d()).map(|i| format!("c{i}")));
    w.write_record(&header)?;
    let mut idx = 0usize;
    for (c, len) in chunk_lengths(n_samples, DEFAULT_CHUNK).into_iter().enumerate() {
        for coeffs in sampler.chunk_samples(seed, c, len)? {
            let mut row = vec![idx.to_string()];
            row.extend(coeffs.iter().map(|x| x.to_string()));
            w.write_record(&row)?;
            idx += 1;
        }
    }
    w.flush()?;
    Ok(())
}
