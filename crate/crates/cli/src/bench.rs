//! Seeded trial runner and the CSV rows it produces.

use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context};
use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;
use sketchlab::cur::{cross_approx, cur_evaluate, cynical_cur, primitive_cur, CurDecomposition};
use sketchlab::hss::{build_hss, hss_error, HssStrategy};
use sketchlab::leverage::{cur_via_leverage, uniform_scores, LeverageCurOptions, SamplingMode};
use sketchlab::linalg::{spectral_norm, DenseMatrix, LowRankFactors, Norm};
use sketchlab::lra::{lra_premult, range_finder, RangeVariant};
use sketchlab::lsr::{best_of, sketch_solve};
use sketchlab::multipliers::{apply, Family, OperatorSpec, SketchOperator, Side};
use sketchlab::rng::{self, Rng};
use sketchlab::source::Counting;
use sketchlab::testgen::{gen_lsr_family, InputSpec, Kernel, LsrFamily};
use sketchlab::{Error, IndexSet};

use crate::args::{Common, CurArgs, HssArgs, InputArgs, LeverageArgs, LraArgs, LsrArgs};

/// One CSV line: aggregate statistics of a benchmark over its trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub command: String,
    pub input: String,
    pub algorithm: String,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub k: usize,
    pub l: usize,
    pub trials: usize,
    pub seed: u64,
    pub mean_error: f64,
    pub std_error: f64,
    /// Trials that ended in a typed failure; they are left out of the statistics.
    pub failures: usize,
    /// Mean number of input entries read per trial.
    pub mean_reads: f64,
    pub mean_runtime: f64,
}

pub const CSV_HEADER: [&str; 14] = [
    "command", "input", "algorithm", "m", "n", "r", "k", "l", "trials", "seed", "mean_error", "std_error",
    "failures", "mean_reads",
];

/// Six significant digits, as everywhere in the CSV output.
pub fn fmt_stat(x: f64) -> String {
    format!("{x:.5e}")
}

/// CSV text for `rows`; the runtime column is present only with `timing`.
pub fn to_csv(rows: &[BenchRow], timing: bool) -> anyhow::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = CSV_HEADER.to_vec();
    if timing {
        header.push("mean_runtime_s");
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.command.clone(),
            row.input.clone(),
            row.algorithm.clone(),
            row.m.to_string(),
            row.n.to_string(),
            row.r.to_string(),
            row.k.to_string(),
            row.l.to_string(),
            row.trials.to_string(),
            row.seed.to_string(),
            fmt_stat(row.mean_error),
            fmt_stat(row.std_error),
            row.failures.to_string(),
            fmt_stat(row.mean_reads),
        ];
        if timing {
            rec.push(fmt_stat(row.mean_runtime));
        }
        w.write_record(&rec)?;
    }
    Ok(w.into_inner().context("flushing CSV")?)
}

/// Writes CSV to `common.output`, or stdout.
pub fn emit(rows: &[BenchRow], common: &Common) -> anyhow::Result<()> {
    let bytes = to_csv(rows, common.timing)?;
    match &common.output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

/// Result of one trial: error, entries read, or a typed failure.
type Trial = Result<(f64, u64), Error>;

struct Shape {
    m: usize,
    n: usize,
    r: usize,
    k: usize,
    l: usize,
}

/// Runs `trials` seeded trials in parallel and aggregates them in trial order.
fn aggregate(
    command: &str,
    input: String,
    algorithm: String,
    shape: Shape,
    common: &Common,
    trial: impl Fn(&mut Rng) -> anyhow::Result<Trial> + Sync,
) -> anyhow::Result<BenchRow> {
    if common.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let outcomes = (0..common.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut g = rng::from_seed(rng::derive_seed(common.seed, t));
            let start = Instant::now();
            let out = trial(&mut g)?;
            Ok((out, start.elapsed().as_secs_f64()))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let ok: Vec<(f64, u64)> = outcomes.iter().filter_map(|(o, _)| o.as_ref().ok().copied()).collect();
    let failures = outcomes.len() - ok.len();
    if ok.is_empty() {
        let first = outcomes.into_iter().find_map(|(o, _)| o.err()).expect("some trial failed");
        bail!("all {} trials failed; first failure: {first}", common.trials);
    }
    let count = ok.len() as f64;
    let mean_error = ok.iter().map(|o| o.0).sum::<f64>() / count;
    let var = ok.iter().map(|o| (o.0 - mean_error).powi(2)).sum::<f64>() / count;
    let mean_reads = ok.iter().map(|o| o.1 as f64).sum::<f64>() / count;
    let mean_runtime = outcomes.iter().map(|o| o.1).sum::<f64>() / outcomes.len() as f64;
    if !mean_error.is_finite() {
        bail!("mean error is not finite");
    }
    Ok(BenchRow {
        command: command.into(),
        input,
        algorithm,
        m: shape.m,
        n: shape.n,
        r: shape.r,
        k: shape.k,
        l: shape.l,
        trials: common.trials,
        seed: common.seed,
        mean_error,
        std_error: var.sqrt(),
        failures,
        mean_reads,
        mean_runtime,
    })
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> anyhow::Result<T> {
    Ok(s.parse::<T>()?)
}

/// Input description and a per-trial generator.
pub struct Input {
    pub label: String,
    spec: InputSpec,
    /// Seeded families get a fresh seed per trial.
    seeded: bool,
}

impl Input {
    pub fn from_args(a: &InputArgs) -> anyhow::Result<Self> {
        let n = a.n;
        let m = a.m.unwrap_or(n);
        if let Some(path) = &a.input {
            return Ok(Input {
                label: path.display().to_string(),
                spec: InputSpec::MatrixMarket { path: path.clone() },
                seeded: false,
            });
        }
        let family = a.family.as_deref().unwrap_or("factor-gaussian");
        let (spec, seeded) = family_spec(family, m, n, a.rank, a.noise, 0)?;
        Ok(Input { label: family.to_string(), spec, seeded })
    }

    pub fn generate(&self, g: &mut Rng) -> anyhow::Result<DenseMatrix> {
        let mut spec = self.spec.clone();
        if self.seeded {
            let s = g.random::<u64>();
            match &mut spec {
                InputSpec::SvdProfile { seed, .. } | InputSpec::FactorGaussian { seed, .. } => *seed = s,
                _ => {}
            }
        }
        Ok(spec.generate()?)
    }
}

/// Maps a family name to an input spec; the flag says whether it is random.
pub fn family_spec(name: &str, m: usize, n: usize, r: usize, noise: f64, seed: u64) -> anyhow::Result<(InputSpec, bool)> {
    let kernel = |k: Kernel| (InputSpec::Kernel { kernel: k, m, n }, false);
    Ok(match name {
        "svd-profile" => {
            if m != n {
                bail!("svd-profile is square; drop --m");
            }
            (InputSpec::SvdProfile { n, r, seed }, true)
        }
        "factor-gaussian" => (InputSpec::FactorGaussian { m, n, r, noise, seed }, true),
        "laplacian" => (InputSpec::Laplacian { n }, false),
        "fd-inverse" => (InputSpec::FdInverse { m, n }, false),
        "gravity" => kernel(Kernel::Gravity),
        "shaw" => kernel(Kernel::Shaw),
        "hilbert" => kernel(Kernel::Hilbert),
        "cauchy" => (InputSpec::Cauchy { n }, false),
        other => bail!("unknown input family {other:?}"),
    })
}

fn rel_spectral(m: &DenseMatrix, f: &LowRankFactors) -> Result<f64, Error> {
    let norm = spectral_norm(m)?;
    let err = spectral_norm(&m.sub(&f.product())?)?;
    Ok(if norm == 0.0 { err } else { err / norm })
}

fn rel_cur(m: &DenseMatrix, c: &CurDecomposition) -> Result<f64, Error> {
    let norm = spectral_norm(m)?;
    let err = cur_evaluate(m, c, Norm::Spectral)?;
    Ok(if norm == 0.0 { err } else { err / norm })
}

/// Entries of C and R, read once more to form the approximation.
fn strip_reads(c: &CurDecomposition, m: usize, n: usize) -> u64 {
    let (k, l) = (c.row_set.len(), c.col_set.len());
    (m * l + k * n - k * l) as u64
}

/// Typed algorithm failures become failed trials; anything else aborts the run.
fn soft(r: Result<(f64, u64), Error>) -> anyhow::Result<Trial> {
    match r {
        Ok(v) => Ok(Ok(v)),
        Err(e) if e.is_algorithmic() => Ok(Err(e)),
        Err(e) => Err(e.into()),
    }
}

/// Number of rows of the input a k×m multiplier reads (its nonzero columns).
/// Input rows the operator reads: the nonzero columns of S, found from one
/// random combination gᵀS of its rows.
fn footprint_rows(op: &SketchOperator) -> anyhow::Result<usize> {
    let probe = rng::gaussian_matrix(1, op.rows(), &mut rng::from_seed(0x5eed));
    let row = apply(op, &probe, Side::Right)?;
    Ok(row.row(0).iter().filter(|v| **v != 0.0).count())
}

fn lsr_spec(mult: &str, m: usize, k: usize, depth: usize, seed: u64) -> anyhow::Result<OperatorSpec> {
    let family: Family = parse(mult)?;
    Ok(OperatorSpec::new(family, m, seed).depth(depth).keep_rows(k))
}

pub fn run_lsr(a: &LsrArgs) -> anyhow::Result<BenchRow> {
    let family: LsrFamily = parse(&a.family)?;
    if a.tries == 0 {
        bail!("--tries must be at least 1");
    }
    let shape = Shape { m: a.m, n: a.n, r: a.n, k: a.k, l: 0 };
    let algo = format!("{}-d{}x{}", a.mult, a.d, a.tries);
    aggregate("lsr", a.family.clone(), algo, shape, &a.common, |g| {
        let p = gen_lsr_family(family, a.m, a.n, g)?;
        let ops = (0..a.tries)
            .map(|_| lsr_spec(&a.mult, a.m, a.k, a.d, g.random::<u64>())?.build().map_err(Into::into))
            .collect::<anyhow::Result<Vec<_>>>()?;
        let report = if ops.len() == 1 { sketch_solve(&p, &ops[0]) } else { best_of(&p, &ops) };
        let rows_read = ops.iter().map(footprint_rows).collect::<anyhow::Result<Vec<_>>>()?;
        let reads = rows_read.iter().sum::<usize>() * (a.n + 1);
        soft(report.map(|r| (r.ratio.unwrap_or(f64::INFINITY), reads as u64)))
    })
}

fn lra_multiplier(mult: &str, n: usize, l: usize, depth: usize, g: &mut Rng) -> anyhow::Result<SketchOperator> {
    let family: Family = parse(mult)?;
    let spec = OperatorSpec::new(family, n, g.random::<u64>()).depth(depth);
    // leftmost columns of a randomly permuted operator: a random l-column slice
    let op = spec.build()?;
    Ok(sketchlab::multipliers::take_columns(op, l, sketchlab::multipliers::SliceMode::Random, g)?)
}

pub fn run_lra(a: &LraArgs) -> anyhow::Result<BenchRow> {
    let input = Input::from_args(&a.input)?;
    let r = a.r.unwrap_or(a.l);
    let variant = match a.variant.as_str() {
        "a" => RangeVariant::A,
        "b" => RangeVariant::B,
        v => bail!("unknown variant {v:?}; expected a or b"),
    };
    let probe = input.generate(&mut rng::from_seed(0))?;
    let (m, n) = probe.shape();
    let shape = Shape { m, n, r, k: a.premult.unwrap_or(0), l: a.l };
    let mut algo = format!("{}-d{}-{}", a.mult, a.d, a.variant);
    if let Some(k) = a.premult {
        algo.push_str(&format!("-f{k}"));
    }
    aggregate("lra", input.label.clone(), algo, shape, &a.common, |g| {
        let mat = input.generate(g)?;
        let h = lra_multiplier(&a.mult, n, a.l, a.d, g)?;
        let res = match a.premult {
            None => range_finder(&mat, &h, r, variant),
            Some(k) => {
                let f = OperatorSpec::new(Family::Gaussian, m, g.random::<u64>()).keep_rows(k).build()?;
                lra_premult(&mat, &f, &h, r, variant)
            }
        };
        // MH touches every entry unless H is a column selector
        soft(res.and_then(|f| Ok((rel_spectral(&mat, &f)?, (m * n) as u64))))
    })
}

pub fn run_cur(a: &CurArgs) -> anyhow::Result<BenchRow> {
    let input = Input::from_args(&a.input)?;
    let k = a.k.unwrap_or(a.r);
    let l = a.l.unwrap_or(k);
    let probe = input.generate(&mut rng::from_seed(0))?;
    let (m, n) = probe.shape();
    let algo = match a.algo.as_str() {
        "ca" => format!("ca-loops{}", a.loops),
        "primitive" | "cynical" => a.algo.clone(),
        other => bail!("unknown CUR algorithm {other:?}; expected primitive, cynical or ca"),
    };
    let shape = Shape { m, n, r: a.r, k, l };
    aggregate("cur", input.label.clone(), algo, shape, &a.common, |g| {
        let mat = input.generate(g)?;
        let src = Counting::new(&mat);
        let res = match a.algo.as_str() {
            "primitive" => {
                let rows = IndexSet::new(rng::random_subset(m, k, g), m)?;
                let cols = IndexSet::new(rng::random_subset(n, l, g), n)?;
                primitive_cur(&src, &rows, &cols, a.r)
            }
            "cynical" => {
                let p = a.p.unwrap_or(4 * k).min(m);
                let q = a.p.unwrap_or(4 * l).min(n);
                cynical_cur(&src, p, q, k, l, a.r, g)
            }
            _ => {
                let init = IndexSet::new(rng::random_subset(m, k, g), m)?;
                cross_approx(&src, a.r, k, l, &init, a.loops, a.h, None, g).map(|(c, _)| c)
            }
        };
        soft(res.and_then(|c| Ok((rel_cur(&mat, &c)?, src.reads() + strip_reads(&c, m, n)))))
    })
}

pub fn run_leverage(a: &LeverageArgs) -> anyhow::Result<BenchRow> {
    let input = Input::from_args(&a.input)?;
    let k = a.k.unwrap_or(4 * a.r);
    let l = a.l.unwrap_or(k);
    let mode: SamplingMode = parse(&a.mode)?;
    let probe = input.generate(&mut rng::from_seed(0))?;
    let (m, n) = probe.shape();
    let uniform = match a.scores.as_str() {
        "svd" => false,
        "uniform" => true,
        s => bail!("unknown scores {s:?}; expected svd or uniform"),
    };
    let opts = LeverageCurOptions { mode, alternative_nucleus: a.alternative, ..Default::default() };
    let algo = format!("{}-{}{}", a.scores, a.mode, if a.alternative { "-alt" } else { "" });
    let shape = Shape { m, n, r: a.r, k, l };
    let scores = uniform_scores(n);
    aggregate("leverage", input.label.clone(), algo, shape, &a.common, |g| {
        let mat = input.generate(g)?;
        let src = Counting::new(&mat);
        let res = cur_via_leverage(&src, a.r, k, l, opts, uniform.then_some(&scores), g);
        soft(res.and_then(|c| Ok((rel_cur(&mat, &c)?, src.reads() + strip_reads(&c, m, n)))))
    })
}

pub fn run_hss(a: &HssArgs) -> anyhow::Result<BenchRow> {
    let input = Input::from_args(&a.input)?;
    let strategy: HssStrategy = parse(&a.strategy)?;
    let probe = input.generate(&mut rng::from_seed(0))?;
    let (m, n) = probe.shape();
    let shape = Shape { m, n, r: a.r, k: 0, l: 0 };
    let algo = format!("{}-L{}-tol{:e}", a.strategy, a.depth, a.tol);
    aggregate("hss", input.label.clone(), algo, shape, &a.common, |g| {
        let mat = input.generate(g)?;
        let src = Counting::new(&mat);
        let res = build_hss(&src, a.depth, a.r, a.tol, strategy, g);
        soft(res.and_then(|h| {
            let norm = spectral_norm(&mat)?;
            let err = hss_error(&h, &mat, Norm::Spectral)?;
            Ok((if norm == 0.0 { err } else { err / norm }, src.reads()))
        }))
    })
}
