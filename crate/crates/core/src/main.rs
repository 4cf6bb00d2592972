use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dbal::harness::{self, parse_algorithms, ClassSpec, ExperimentConfig};
use dbal::Error;

#[derive(Parser)]
#[command(name = "dbal", version, about = "Diameter-based active learning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run seeded trials and write one CSV row per (trial, algorithm, round).
    Run(RunArgs),
    /// Run the acceptance criteria and print one line per criterion.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// linear:D | disjunction:D:K:P | coordinate:N | finite:PATH
    #[arg(long)]
    class: Option<String>,
    /// Comma-separated list of dbal, passive, cal, qbc.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed; trial i uses seed + i.
    #[arg(long, env = "DBAL_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    pool_size: Option<usize>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use uncapped sample sizes in query selection.
    #[arg(long)]
    theory_mode: bool,
    /// Row budget per trial.
    #[arg(long)]
    rounds: Option<usize>,
    /// Fill the `ms` column with elapsed wall-clock time.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Run only criteria whose name contains this text.
    #[arg(long)]
    only: Vec<String>,
}

fn build_config(args: RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(c) = args.class {
        cfg.class = c.parse::<ClassSpec>()?;
    }
    if let Some(a) = args.algo {
        cfg.algorithms = parse_algorithms(&a)?;
    }
    if let Some(v) = args.epsilon {
        cfg.epsilon = v;
    }
    if let Some(v) = args.delta {
        cfg.delta = v;
    }
    if let Some(v) = args.trials {
        cfg.trials = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.pool_size {
        cfg.pool_size = v;
    }
    if let Some(v) = args.rounds {
        cfg.rounds = v;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    cfg.theory_mode |= args.theory_mode;
    cfg.timing |= args.timing;
    cfg.validate()?;
    Ok(cfg)
}

fn run(args: RunArgs) -> ExitCode {
    let cfg = match build_config(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = harness::run_experiment(&cfg).and_then(|rows| match &cfg.out {
        Some(path) => harness::write_csv_file(&rows, path),
        None => harness::write_csv(&rows, std::io::stdout().lock()),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn verify(args: VerifyArgs) -> ExitCode {
    let reports = harness::verify::run_verification_suite(|name| {
        args.only.is_empty() || args.only.iter().any(|o| name.contains(o.as_str()))
    });
    for r in &reports {
        println!("{r}");
    }
    if reports.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
    }
}
