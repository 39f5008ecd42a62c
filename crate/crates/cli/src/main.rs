//! `conesemi`: run the toolkit's checks on JSON problem files.
//!
//! Exit codes: 0 pass, 1 a check fails, 2 malformed input or numerical error.

mod commands;
mod problem;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use conesemi::report::{Report, Verdict};
use conesemi::semigroup::{Method, SemigroupConfig};

use commands::{Outcome, Run};
use problem::ProblemFile;

const DEFAULT_SAMPLES: usize = 200;
const SEED_ENV: &str = "CONESEMI_SEED";

#[derive(Parser, Debug)]
#[command(name = "conesemi", version, about = "Half-norms, dissipativity and positive semigroups on ordered spaces")]
struct Cli {
    /// Seed for sampled checks; overrides CONESEMI_SEED and the file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Random points per sampled check.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Also write the machine-readable report here.
    #[arg(long, global = true, value_name = "PATH")]
    json_out: Option<PathBuf>,
    /// Print nothing on success; errors still go to stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct FileArg {
    /// JSON problem file.
    #[arg(long)]
    file: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact positive off-diagonal check over extreme rays.
    CheckPod(FileArg),
    /// Sampled dissipativity check for the file's half-norm.
    CheckDissipative(FileArg),
    /// Resolvent contractivity and semigroup positivity pipelines.
    Simulate(FileArg),
    /// Represent phi as a nonnegative measure on the normalized states.
    Represent(FileArg),
    /// Finite-difference Dirichlet Laplacian on [0, 1].
    DirichletDemo {
        /// Interior grid sizes.
        #[arg(long = "n", value_delimiter = ',', default_values_t = [15usize, 31, 63])]
        ns: Vec<usize>,
        /// Times at which T(t) is checked.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        t_grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 64)]
        euler_steps: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::CheckPod(_) => "check-pod",
            Command::CheckDissipative(_) => "check-dissipative",
            Command::Simulate(_) => "simulate",
            Command::Represent(_) => "represent",
            Command::DirichletDemo { .. } => "dirichlet-demo",
        }
    }

    fn file(&self) -> Option<&Path> {
        match self {
            Command::CheckPod(f)
            | Command::CheckDissipative(f)
            | Command::Simulate(f)
            | Command::Represent(f) => Some(&f.file),
            Command::DirichletDemo { .. } => None,
        }
    }
}

#[derive(Serialize)]
struct RunReport {
    schema_version: u32,
    command: String,
    tool_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem: Option<ProblemFile>,
    seed: u64,
    samples: usize,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<Verdict>,
    wall_time_ms: f64,
    checks: Vec<Report>,
    details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .with_context(|| format!("{SEED_ENV}={s:?} is not an unsigned integer")),
        Err(_) => Ok(None),
    }
}

fn load(path: &Path) -> Result<ProblemFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ProblemFile::parse(&text).with_context(|| format!("in {}", path.display()))
}

fn run(cli: &Cli, problem: Option<&ProblemFile>, run: &Run) -> Result<Outcome> {
    match &cli.command {
        Command::CheckPod(_) => commands::check_pod(problem.expect("loaded")),
        Command::CheckDissipative(_) => commands::check_dissipative(problem.expect("loaded"), run),
        Command::Simulate(_) => commands::simulate(problem.expect("loaded"), run),
        Command::Represent(_) => commands::represent(problem.expect("loaded")),
        Command::DirichletDemo { ns, t_grid, euler_steps } => {
            let grid = t_grid.clone().unwrap_or_else(|| SemigroupConfig::default().t_grid);
            let cfg = SemigroupConfig::new(grid, *euler_steps, Method::Expm)
                .context("flag --t-grid")?;
            commands::dirichlet_demo(ns, &cfg, run)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = RunReport {
        schema_version: problem::SCHEMA_VERSION,
        command: cli.command.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION"),
        file: cli.command.file().map(|p| p.display().to_string()),
        problem: None,
        seed: 0,
        samples: 0,
        exit_code: 2,
        verdict: None,
        wall_time_ms: 0.0,
        checks: Vec::new(),
        details: Value::Null,
        error: None,
    };

    let result = (|| -> Result<Outcome> {
        let problem = cli.command.file().map(load).transpose()?;
        let seed = match cli.seed {
            Some(s) => s,
            None => env_seed()?.or(problem.as_ref().and_then(|p| p.seed)).unwrap_or(0),
        };
        let samples = cli
            .samples
            .or(problem.as_ref().and_then(|p| p.samples))
            .unwrap_or(DEFAULT_SAMPLES);
        report.seed = seed;
        report.samples = samples;
        let out = run(&cli, problem.as_ref(), &Run { seed, samples });
        report.problem = problem;
        out
    })();

    match result {
        Ok(out) => {
            let verdict = out.verdict();
            report.exit_code = u8::from(verdict.is_failure());
            report.verdict = Some(verdict);
            if !cli.quiet {
                for c in &out.checks {
                    print!("{c}");
                }
                for line in &out.text {
                    println!("{line}");
                }
                println!("overall: {verdict}");
                if verdict == Verdict::Inconclusive {
                    println!("note: sampled checks passed on the tested points only; this is not a proof");
                }
            }
            report.checks = out.checks;
            report.details = out.details;
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            report.error = Some(format!("{e:#}"));
        }
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(path) = &cli.json_out {
        let body = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(path, body + "\n") {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code)
}
