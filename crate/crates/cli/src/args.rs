//! Command line definitions and `--config` expansion.

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(name = "sketchlab", version, about = "Sublinear low-rank approximation benchmarks")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a generated input matrix in MatrixMarket format.
    Gen(GenArgs),
    /// Sketch-and-solve least squares.
    Lsr(LsrArgs),
    /// Range-finder low-rank approximation.
    Lra(LraArgs),
    /// CUR approximation (primitive, cynical, cross-approximation).
    Cur(CurArgs),
    /// CUR through leverage-score sampling.
    Leverage(LeverageArgs),
    /// Hierarchical approximation with low-rank off-diagonal blocks.
    Hss(HssArgs),
    /// Run the acceptance suite and print one line per criterion.
    Selftest(SelftestArgs),
}

/// Options shared by every benchmark.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Master seed; per-trial seeds are derived from it.
    #[arg(long, env = "SKETCHLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// CSV destination; stdout when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Add a wall-clock runtime column.
    #[arg(long)]
    pub timing: bool,
}

/// Input matrix: a MatrixMarket file or a generated family.
#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// MatrixMarket file (array or coordinate format).
    #[arg(long, conflicts_with = "family")]
    pub input: Option<PathBuf>,
    /// svd-profile | factor-gaussian | laplacian | fd-inverse | gravity | shaw | hilbert | cauchy
    #[arg(long)]
    pub family: Option<String>,
    /// Row count (defaults to --n).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Rank parameter of the generated family.
    #[arg(long = "rank", default_value_t = 8)]
    pub rank: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Any input family, plus delta | shifted-delta.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 8)]
    pub r: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Position of the unit entry of a delta matrix.
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    #[arg(long, env = "SKETCHLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct LsrArgs {
    /// gaussian | illcond | semicoherent | coherent
    #[arg(long, default_value = "gaussian")]
    pub family: String,
    #[arg(long, default_value_t = 4096)]
    pub m: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Sketch rows.
    #[arg(long, default_value_t = 600)]
    pub k: usize,
    #[arg(long, default_value = "gaussian")]
    pub mult: String,
    /// Recursion depth of abridged multipliers.
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Independent sketches per trial; the best residual is kept.
    #[arg(long, default_value_t = 1)]
    pub tries: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct LraArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value = "gaussian")]
    pub mult: String,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Sketch columns.
    #[arg(long, default_value_t = 8)]
    pub l: usize,
    /// Target rank (defaults to l).
    #[arg(long)]
    pub r: Option<usize>,
    /// a: orthonormal basis of MH; b: rank-r truncation of MH.
    #[arg(long, default_value = "a")]
    pub variant: String,
    /// Pre-multiplier rows; enables V = (FU)⁺FM.
    #[arg(long)]
    pub premult: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct CurArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// primitive | cynical | ca
    #[arg(long, default_value = "ca")]
    pub algo: String,
    #[arg(long, default_value_t = 8)]
    pub r: usize,
    /// Generator rows (defaults to r).
    #[arg(long)]
    pub k: Option<usize>,
    /// Generator columns (defaults to k).
    #[arg(long)]
    pub l: Option<usize>,
    /// Cross-approximation loops.
    #[arg(long, default_value_t = 3)]
    pub loops: usize,
    /// Random block size for the cynical algorithm (defaults to 4k).
    #[arg(long)]
    pub p: Option<usize>,
    #[arg(long, default_value_t = 1.1)]
    pub h: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct LeverageArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 8)]
    pub r: usize,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub l: Option<usize>,
    /// exact | expected
    #[arg(long, default_value = "exact")]
    pub mode: String,
    /// svd: scores of the top-r singular vectors; uniform: p = 1/n.
    #[arg(long, default_value = "svd")]
    pub scores: String,
    /// Use the unweighted nucleus (G)_r⁺.
    #[arg(long)]
    pub alternative: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct HssArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 8)]
    pub r: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// svd | cur_ca
    #[arg(long, default_value = "cur_ca")]
    pub strategy: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    /// Fewer trials per criterion.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, env = "SKETCHLAB_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

/// Replaces `--config FILE` by the flags it holds.
///
/// The file is a JSON object with a `command` key naming the subcommand and
/// one key per long flag (`{"command": "lra", "l": 8, "mult": "asph"}`).
/// Flags given on the command line after the subcommand override the file.
pub fn expand_config(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(pos) = argv.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(argv);
    };
    let (path, skip) = match argv[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (argv.get(pos + 1).context("--config needs a file")?.clone(), 2),
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {path}"))?;
    let value: Value = serde_json::from_str(&text).with_context(|| format!("parsing {path}"))?;
    let Value::Object(map) = value else { bail!("{path}: config must be a JSON object") };
    let command = match map.get("command") {
        Some(Value::String(c)) => c.clone(),
        _ => bail!("{path}: missing string field \"command\""),
    };
    let mut rest: Vec<String> = argv[..pos].iter().chain(&argv[pos + skip..]).cloned().collect();
    let bin = if rest.is_empty() { "sketchlab".to_string() } else { rest.remove(0) };
    if rest.first() == Some(&command) {
        rest.remove(0);
    }
    let mut out = vec![bin, command];
    for (key, v) in &map {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Bool(true) => out.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::String(s) => out.extend([flag, s.clone()]),
            Value::Number(n) => out.extend([flag, n.to_string()]),
            _ => bail!("{path}: field {key} must be a scalar"),
        }
    }
    out.extend(rest);
    Ok(out)
}
