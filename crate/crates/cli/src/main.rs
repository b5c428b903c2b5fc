//! `gbcurv`: curvature invariants, identity verification and conformal
//! checks from the command line. JSON in, JSON out.
//!
//! Exit codes: 0 pass, 1 identity failure, 2 config error, 3 runtime error.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use gbcurv::exec::{with_jobs, Exec};
use gbcurv::verify::Suite;
use serde::Serialize;

use config::{parse_list, OneOrMany, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "gbcurv", version, about = "Gauss-Bonnet curvatures, Newton transformations and conformal identities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curvature invariants of a model or explicit metric.
    Invariants(Common),
    /// Run identity suites and report residuals.
    Verify(Common),
    /// Conformal operators and transformation laws for a given field.
    Conformal(Common),
    /// Print every implemented identity with its formula.
    ListIdentities(Output),
}

#[derive(Args, Debug)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
    #[arg(long)]
    suite: Option<Suite>,
    /// Dimensions: `5`, `4,6` or `4..6`.
    #[arg(long, value_parser = parse_list)]
    n: Option<OneOrMany>,
    /// Degrees, same syntax as `--n`.
    #[arg(long, value_parser = parse_list)]
    k: Option<OneOrMany>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Tolerance for every identity (per-identity values in the config win).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    fd_order: Option<u32>,
    #[arg(long)]
    fd_step: Option<f64>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Worker threads; 0 uses every core.
    #[arg(long, env = "GBCURV_JOBS", default_value_t = 0)]
    jobs: usize,
    /// Add wall-clock time to the report (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long, hide = true)]
    debug_corrupt_star: bool,
}

/// Why a command did not pass.
#[derive(Debug)]
pub enum Failure {
    Config(gbcurv::Error),
    Runtime(gbcurv::Error),
}

impl Common {
    fn run_config(&self, command: &str) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = &cfg.command {
            if c != command {
                return Err(format!("config is for command {c:?}, not {command:?}"));
            }
        }
        macro_rules! over {
            ($($f:ident),*) => { $(if let Some(v) = &self.$f { cfg.$f = Some(v.clone()); })* };
        }
        over!(suite, n, k, trials, samples, seed, tol, fd_order, fd_step, resolution);
        if self.debug_corrupt_star {
            cfg.debug_corrupt_star = Some(true);
        }
        Ok(cfg)
    }

    fn out(&self, cfg: &RunConfig) -> Option<PathBuf> {
        self.output.out.clone().or_else(|| cfg.out.as_ref().map(PathBuf::from))
    }
}

fn emit<T: Serialize>(report: &T, out: Option<PathBuf>) -> Result<(), String> {
    let mut text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    text.push('\n');
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("config error: {msg}");
    ExitCode::from(2)
}

fn runtime_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(3)
}

fn failure(f: Failure) -> ExitCode {
    match f {
        Failure::Config(e) => config_error(e),
        Failure::Runtime(e) => runtime_error(e),
    }
}

fn finish<T: Serialize>(report: &T, out: Option<PathBuf>, passed: bool) -> ExitCode {
    if let Err(e) = emit(report, out) {
        return runtime_error(e);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> ExitCode {
    let (name, common) = match &cli.command {
        Command::ListIdentities(o) => return finish(&commands::list_identities(), o.out.clone(), true),
        Command::Invariants(c) => ("invariants", c),
        Command::Verify(c) => ("verify", c),
        Command::Conformal(c) => ("conformal", c),
    };
    let cfg = match common.run_config(name) {
        Ok(c) => c,
        Err(e) => return config_error(e),
    };
    let out = common.out(&cfg);
    let vcfg = cfg.verify_config();
    let fd = match vcfg.fd() {
        Ok(fd) => fd,
        Err(e) => return config_error(e),
    };
    let built = match (&cli.command, &cfg.manifold) {
        (Command::Verify(_), _) => None,
        (_, None) => return config_error(format!("{name} needs a manifold in the config")),
        (_, Some(m)) => match m.build(fd) {
            Ok(b) => Some(b),
            Err(e) => return config_error(e),
        },
    };
    let start = Instant::now();
    with_jobs(common.jobs, || match &cli.command {
        Command::Invariants(_) => match commands::invariants(&cfg, built.as_ref().unwrap(), Exec::Parallel) {
            Ok(mut r) => {
                r.wall_time_s = common.timing.then(|| commands::elapsed(start));
                finish(&r, out, true)
            }
            Err(f) => failure(f),
        },
        Command::Verify(_) => match commands::verify(&vcfg, Exec::Parallel) {
            Ok(mut r) => {
                r.summary.wall_time_s = common.timing.then(|| commands::elapsed(start));
                let passed = r.passed();
                finish(&r, out, passed)
            }
            Err(f) => failure(f),
        },
        Command::Conformal(_) => match commands::conformal(&cfg, &vcfg, built.as_ref().unwrap(), Exec::Parallel) {
            Ok(mut r) => {
                r.summary.wall_time_s = common.timing.then(|| commands::elapsed(start));
                let passed = r.summary.fail == 0;
                finish(&r, out, passed)
            }
            Err(f) => failure(f),
        },
        Command::ListIdentities(_) => unreachable!(),
    })
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            ExitCode::from(code)
        }
    }
}
