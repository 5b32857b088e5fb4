use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use sketchlab::testgen::{gen_delta, gen_shifted_delta, write_matrix_market};
use sketchlab_cli::args::{expand_config, Cli, Command, GenArgs, SelftestArgs};
use sketchlab_cli::bench::{self, family_spec};
use sketchlab_cli::selftest::{self, Mode};

fn gen(a: &GenArgs) -> anyhow::Result<()> {
    let m = a.m.unwrap_or(a.n);
    let mat = match a.family.as_str() {
        "delta" => gen_delta(m, a.n, a.i, a.j)?,
        "shifted-delta" => gen_shifted_delta(m, a.n, a.i, a.j)?,
        name => family_spec(name, m, a.n, a.r, a.noise, a.seed)?.0.generate()?,
    };
    write_matrix_market(&a.output, &mat).with_context(|| format!("writing {}", a.output.display()))?;
    eprintln!("wrote {}x{} matrix to {}", mat.rows(), mat.cols(), a.output.display());
    Ok(())
}

fn run_selftest(a: &SelftestArgs) -> anyhow::Result<bool> {
    let mode = if a.quick { Mode::Quick } else { Mode::Full };
    let mut outcomes = selftest::run_all(mode, a.seed);
    outcomes.push(selftest::determinism(a.seed, |o| selftest::to_csv(o, a.seed, false)));
    for o in &outcomes {
        println!("{}", o.line());
    }
    let bytes = selftest::to_csv(&outcomes, a.seed, a.timing);
    match &a.output {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(&bytes)?,
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    Ok(failed == 0)
}

fn run() -> anyhow::Result<bool> {
    let argv = expand_config(std::env::args().collect())?;
    let cli = Cli::parse_from(argv);
    match &cli.command {
        Command::Gen(a) => gen(a)?,
        Command::Lsr(a) => bench::emit(&[bench::run_lsr(a)?], &a.common)?,
        Command::Lra(a) => {
            let row = bench::run_lra(a)?;
            eprintln!("mean relative spectral error {}", bench::fmt_stat(row.mean_error));
            bench::emit(&[row], &a.common)?
        }
        Command::Cur(a) => bench::emit(&[bench::run_cur(a)?], &a.common)?,
        Command::Leverage(a) => bench::emit(&[bench::run_leverage(a)?], &a.common)?,
        Command::Hss(a) => bench::emit(&[bench::run_hss(a)?], &a.common)?,
        Command::Selftest(a) => return run_selftest(a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
