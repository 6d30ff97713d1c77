use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gencost::verify::CertificateKind;
use gencost_cli::catalog;
use gencost_cli::replay::{verify_trace, BoundArgs};
use gencost_cli::{run_experiment, ExperimentConfig, Result, RunOutcome};

/// Environment variable overriding the output directory.
const OUT_ENV: &str = "GENCOST_OUT";

#[derive(Parser)]
#[command(name = "gencost", version, about = "Run and verify general-cost descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a file, a builtin experiment, or all builtins.
    Run(RunArgs),
    /// List the builtin experiments.
    List,
    /// Recompute a rate certificate from a written trace.
    Verify(VerifyArgs),
}

#[derive(Args)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Experiment file (TOML, or JSON with a .json extension).
    #[arg(long, group = "source")]
    config: Option<PathBuf>,
    /// Builtin experiment name.
    #[arg(long, group = "source")]
    experiment: Option<String>,
    /// Every builtin experiment, one worker each.
    #[arg(long, group = "source")]
    all: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Output root; each experiment writes into its own subdirectory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override. Builtin experiments derive their seed from it and
    /// their name.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// trace.csv written by `run`.
    #[arg(long)]
    trace: PathBuf,
    /// Certificate kind, e.g. gdgc_sublinear.
    #[arg(long)]
    kind: CertificateKind,
    /// Reference point as comma-separated values.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    reference: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, allow_hyphen_values = true)]
    f_star: Option<f64>,
}

fn out_root(cli: Option<&Path>, config: Option<&str>) -> PathBuf {
    cli.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .or_else(|| config.map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn summary(o: &RunOutcome) {
    let r = &o.report;
    let passed = r.checks.iter().filter(|c| c.passed).count();
    let verdict = if r.passed { "PASS" } else { "FAIL" };
    println!("{verdict} {} ({passed}/{} checks, seed {})", r.name, r.checks.len(), r.seed);
    if let Some(e) = &r.solver_error {
        println!("  solver error: {e}");
    }
    for c in r.checks.iter().filter(|c| !c.passed) {
        let why = c.error.clone().unwrap_or_else(|| format!("{:?}, expect_violation = {}", c.status, c.expect_violation));
        println!("  check {} {}: {why}", c.index, c.check);
    }
}

fn run_one(mut config: ExperimentConfig, out: Option<&Path>, seed: Option<u64>) -> Result<bool> {
    if let Some(s) = seed {
        config.seed = s;
    }
    let root = out_root(out, config.output.as_deref());
    let outcome = run_experiment(config, &root)?;
    summary(&outcome);
    Ok(outcome.report.passed)
}

fn run(args: &RunArgs) -> Result<bool> {
    let out = args.out.as_deref();
    let derived = |c: &ExperimentConfig| args.seed.map(|s| catalog::derive_seed(s, &c.name));
    if let Some(path) = &args.source.config {
        return run_one(ExperimentConfig::load(path)?, out, args.seed);
    }
    if let Some(name) = &args.source.experiment {
        let config = catalog::find(name)?;
        let seed = derived(&config);
        return run_one(config, out, seed);
    }
    let configs = catalog::experiments();
    let results: Vec<Result<RunOutcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .into_iter()
            .map(|mut config| {
                if let Some(seed) = derived(&config) {
                    config.seed = seed;
                }
                let root = out_root(out, config.output.as_deref());
                s.spawn(move || run_experiment(config, &root))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("experiment worker panicked")).collect()
    });
    let mut all_passed = true;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(o) => {
                summary(&o);
                all_passed &= o.report.passed;
            }
            Err(e) => {
                eprintln!("error: {e}");
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e),
        None => Ok(all_passed),
    }
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let bound = BoundArgs { reference: args.reference.clone(), lambda: args.lambda, mu: args.mu, f_star: args.f_star };
    let cert = verify_trace(&args.trace, args.kind, &bound)?;
    for row in cert.rows.iter().filter(|r| !r.pass) {
        println!("n = {}: {:e} > {:e}", row.n, row.lhs, row.rhs);
    }
    let verdict = if cert.passed { "PASS" } else { "FAIL" };
    println!("{verdict} {} over {} iterations", args.kind.name(), cert.rows.len());
    Ok(cert.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for (name, description) in catalog::list() {
                println!("{name:<32} {description}");
            }
            Ok(true)
        }
        Command::Verify(args) => verify(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

