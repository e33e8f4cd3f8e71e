use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rectfree::conv::{rect_convolve, rect_convolve_diffop};
use rectfree::finite::{finite_r, finite_r_invert};
use rectfree::free::{free_rect_r_series, SymmetricMoments};
use rectfree::io::{load_record, FiniteRRecord, PolyRecord, SCHEMA_VERSION};
use rectfree::limits::{self, DEGREE_CAP};
use rectfree::mc::{empirical_convolution, write_samples_csv, DEFAULT_CHUNK};
use rectfree::{Error, Exact, NonnegPoly, RectParams, Result, Scalar};

/// Finite rectangular free probability: convolutions, R-transforms,
/// Monte-Carlo checks and limit experiments.
#[derive(Parser)]
#[command(name = "rectfree", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rectangular additive convolution of two polynomials.
    Convolve {
        #[command(flatten)]
        pq: PairArgs,
        #[command(flatten)]
        dims: Dims,
        #[command(flatten)]
        out: Output,
    },
    /// Finite rectangular R-transform (optionally also the free one).
    Rtransform {
        #[arg(long)]
        p: String,
        #[command(flatten)]
        dims: Dims,
        /// Also emit the free rectangular R-transform series of the root measure.
        #[arg(long)]
        free: bool,
        /// Order of the free series (default d + 1).
        #[arg(long)]
        order: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Recovers a polynomial from its finite R-transform.
    Invert {
        /// FiniteR record: path or inline JSON.
        #[arg(long)]
        r: String,
        #[command(flatten)]
        out: Output,
    },
    /// Compares the algebraic convolution with a Monte-Carlo estimate.
    McVerify {
        #[command(flatten)]
        pq: PairArgs,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted |z| per coefficient.
        #[arg(long, default_value_t = 4.0)]
        threshold: f64,
        /// Also write every sampled coefficient vector to this CSV file.
        #[arg(long)]
        samples_csv: Option<PathBuf>,
        #[command(flatten)]
        out: Output,
    },
    /// Limit-theorem experiments.
    #[command(subcommand)]
    Limits(LimitsCommand),
}

#[derive(Subcommand)]
enum LimitsCommand {
    /// Law of large numbers: roots of p_1 ⊞ ... ⊞ p_N scaled by 1/N².
    Lln {
        /// Repeat to cycle through several polynomials.
        #[arg(long, required = true)]
        p: Vec<String>,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128,256")]
        n: Vec<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Central limit theorem: roots of p^{⊞N} scaled by 1/N against Laguerre.
    Clt {
        #[arg(long)]
        p: String,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64,128")]
        n: Vec<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Finite R-transform of stacked copies against the free series.
    Converge {
        #[arg(long)]
        p: String,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
        n: Vec<usize>,
        /// Highest compared coefficient.
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[command(flatten)]
        cap: Cap,
        #[command(flatten)]
        out: Output,
    },
    /// Gap R_p + R_q - R_{p^n ⊞ q^n} of free R-transforms on a grid of s.
    Tightness {
        #[command(flatten)]
        pq: PairArgs,
        #[command(flatten)]
        dims: Dims,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16")]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.05,0.1,0.3,0.5")]
        s: Vec<f64>,
        #[command(flatten)]
        cap: Cap,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct PairArgs {
    /// Polynomial record: path or inline JSON.
    #[arg(long)]
    p: String,
    /// Polynomial record: path or inline JSON.
    #[arg(long)]
    q: String,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "shape")]
struct Shape {
    #[arg(long)]
    m: Option<usize>,
    /// λ = d/m as a fraction "a/b".
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Args)]
struct Dims {
    /// Degree; defaults to the degree of the input.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    shape: Shape,
}

impl Dims {
    fn resolve(&self, degree: usize) -> Result<RectParams> {
        if let Some(d) = self.d {
            if d != degree {
                return Err(Error::Usage(format!("--d {d} does not match the input degree {degree}")));
            }
        }
        match (&self.shape.m, &self.shape.lambda) {
            (Some(m), None) => RectParams::new(degree, *m),
            (None, Some(l)) => RectParams::from_lambda(degree, l),
            _ => Err(Error::Usage("give exactly one of --m and --lambda".into())),
        }
    }
}

#[derive(Args)]
struct Cap {
    /// Allow stacked degrees d·n above the default cap of 64.
    #[arg(long)]
    allow_large_degree: bool,
}

impl Cap {
    fn value(&self) -> usize {
        if self.allow_large_degree {
            usize::MAX
        } else {
            DEGREE_CAP
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Output {
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

impl Output {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?),
            None => Box::new(io::stdout().lock()),
        })
    }

    fn json<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        Ok(())
    }

    fn emit<T: Serialize>(&self, value: &T, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        match self.format {
            Format::Json => self.json(value),
            Format::Csv => {
                let mut w = csv::Writer::from_writer(self.writer()?);
                w.write_record(header)?;
                for row in rows {
                    w.write_record(row)?;
                }
                w.flush()?;
                Ok(())
            }
        }
    }

    fn report(&self, value: &impl Serialize, csv: impl FnOnce(Box<dyn Write>) -> Result<()>) -> Result<()> {
        match self.format {
            Format::Json => self.json(value),
            Format::Csv => csv(self.writer()?),
        }
    }
}

fn load_poly(arg: &str) -> Result<NonnegPoly<Exact>> {
    load_record::<PolyRecord>(arg)?.to_poly()
}

fn load_pair(pq: &PairArgs) -> Result<(NonnegPoly<Exact>, NonnegPoly<Exact>)> {
    let (p, q) = (load_poly(&pq.p)?, load_poly(&pq.q)?);
    if p.degree() != q.degree() {
        return Err(Error::Usage(format!("--p has degree {} but --q has degree {}", p.degree(), q.degree())));
    }
    Ok((p, q))
}

fn indexed(values: &[f64]) -> Vec<Vec<String>> {
    values.iter().enumerate().map(|(i, v)| vec![i.to_string(), v.to_string()]).collect()
}

#[derive(Serialize)]
struct ConvolveOutput {
    #[serde(flatten)]
    poly: PolyRecord,
    /// Largest coefficient difference between the binomial formula and the
    /// differential-operator route.
    diffop_max_delta: f64,
}

#[derive(Serialize)]
struct RtransformOutput {
    #[serde(flatten)]
    finite: FiniteRRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    free_r_coeffs: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct McRow {
    index: usize,
    algebraic: f64,
    mc_mean: f64,
    stderr: f64,
    z: f64,
}

#[derive(Serialize)]
struct McOutput {
    schema_version: u32,
    d: usize,
    m: usize,
    n_samples: usize,
    seed: u64,
    chunk_size: usize,
    threshold: f64,
    pass: bool,
    rows: Vec<McRow>,
}

/// `Ok(false)` means the command ran but a statistical check failed.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Convolve { pq, dims, out } => {
            let (p, q) = load_pair(&pq)?;
            let params = dims.resolve(p.degree())?;
            let c = rect_convolve(&p, &q, &params)?;
            let delta = rect_convolve_diffop(&p, &q, &params)?
                .coeffs()
                .iter()
                .zip(c.coeffs())
                .map(|(a, b)| Scalar::abs(&(a.clone() - b.clone())).to_f64())
                .fold(0.0, f64::max);
            let rec = PolyRecord::from_poly(&c, Some(&params));
            let rows = indexed(rec.coeffs.as_deref().unwrap_or_default());
            out.emit(&ConvolveOutput { poly: rec, diffop_max_delta: delta }, &["index", "coeff"], rows)?;
        }
        Command::Rtransform { p, dims, free, order, out } => {
            let p = load_poly(&p)?;
            let params = dims.resolve(p.degree())?;
            let r = finite_r(&p, &params)?;
            let free_r_coeffs = if free {
                let order = order.unwrap_or(params.d() + 1);
                let lambda = Exact::from_usize(params.d()) / Exact::from_usize(params.m());
                let mom = SymmetricMoments::from_poly(&p, order);
                Some(free_rect_r_series(&mom, &lambda, order)?.to_f64().into_coeffs())
            } else {
                None
            };
            let finite = FiniteRRecord::from_finite_r(&r);
            let n = finite.r_coeffs.len().max(free_r_coeffs.as_ref().map_or(0, Vec::len));
            let cell = |v: Option<&f64>| v.map(f64::to_string).unwrap_or_default();
            let rows = (0..n)
                .map(|k| {
                    let mut row = vec![k.to_string(), cell(finite.r_coeffs.get(k))];
                    if let Some(f) = &free_r_coeffs {
                        row.push(cell(f.get(k)));
                    }
                    row
                })
                .collect();
            let header: &[&str] = if free { &["k", "r_coeff", "free_r_coeff"] } else { &["k", "r_coeff"] };
            out.emit(&RtransformOutput { finite, free_r_coeffs }, header, rows)?;
        }
        Command::Invert { r, out } => {
            let rec: FiniteRRecord = load_record(&r)?;
            let fr = rec.to_finite_r()?;
            let p = finite_r_invert(&fr)?;
            let rec = PolyRecord::from_poly(&p, Some(fr.params()));
            let rows = indexed(rec.coeffs.as_deref().unwrap_or_default());
            out.emit(&rec, &["index", "coeff"], rows)?;
        }
        Command::McVerify { pq, dims, samples, seed, threshold, samples_csv, out } => {
            let (p, q) = load_pair(&pq)?;
            let params = dims.resolve(p.degree())?;
            let exact = rect_convolve(&p, &q, &params)?.to_f64();
            let (pf, qf) = (p.to_f64(), q.to_f64());
            let e = empirical_convolution(&pf, &qf, &params, samples, seed)?;
            if let Some(path) = samples_csv {
                let file = File::create(&path).map_err(|err| Error::Io(format!("{}: {err}", path.display())))?;
                write_samples_csv(&pf, &qf, &params, samples, seed, file)?;
            }
            let z = e.z_scores(exact.coeffs());
            let rows: Vec<McRow> = (0..exact.coeffs().len())
                .map(|i| McRow {
                    index: i,
                    algebraic: exact.coeffs()[i],
                    mc_mean: e.mean_coeffs[i],
                    stderr: e.stderr_coeffs[i],
                    z: z[i],
                })
                .collect();
            let pass = z.iter().all(|&v| v <= threshold);
            let table = rows
                .iter()
                .map(|r| {
                    [r.index.to_string(), r.algebraic.to_string(), r.mc_mean.to_string(), r.stderr.to_string(), r.z.to_string()]
                        .to_vec()
                })
                .collect();
            let output = McOutput {
                schema_version: SCHEMA_VERSION,
                d: params.d(),
                m: params.m(),
                n_samples: e.n_samples,
                seed: e.seed,
                chunk_size: DEFAULT_CHUNK,
                threshold,
                pass,
                rows,
            };
            out.emit(&output, &["index", "algebraic", "mc_mean", "stderr", "z"], table)?;
            return Ok(pass);
        }
        Command::Limits(cmd) => run_limits(cmd)?,
    }
    Ok(true)
}

fn run_limits(cmd: LimitsCommand) -> Result<()> {
    match cmd {
        LimitsCommand::Lln { p, dims, n, out } => {
            let ps = p.iter().map(|s| load_poly(s)).collect::<Result<Vec<_>>>()?;
            let params = dims.resolve(ps[0].degree())?;
            let rep = limits::lln_experiment(&ps, &params, &n)?;
            out.report(&rep, |w| rep.write_csv(w))
        }
        LimitsCommand::Clt { p, dims, n, out } => {
            let p = load_poly(&p)?;
            let params = dims.resolve(p.degree())?;
            let rep = limits::clt_experiment(&p, &params, &n)?;
            out.report(&rep, |w| rep.write_csv(w))
        }
        LimitsCommand::Converge { p, dims, n, order, cap, out } => {
            let p = load_poly(&p)?;
            let params = dims.resolve(p.degree())?;
            let rep = limits::convergence_sweep(&p, &params, &n, order, cap.value())?;
            out.report(&rep, |w| rep.write_csv(w))
        }
        LimitsCommand::Tightness { pq, dims, n, s, cap, out } => {
            let (p, q) = load_pair(&pq)?;
            let params = dims.resolve(p.degree())?;
            let rep = limits::tightness_check(&p, &q, &params, &n, &s, cap.value())?;
            out.report(&rep, |w| rep.write_csv(w))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 1 })
        }
    }
}
