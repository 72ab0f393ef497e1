mod commands;
mod config;
mod error;
mod manifest;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mixnorm::selftest::{self, CheckOutcome};

use crate::commands::CommandResult;
use crate::config::ConfigDocument;
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "mixnorm", version, about = "Mixed-norm computations and Monte Carlo moment-bound experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Number of worker threads for replica simulation.
    #[arg(long, global = true, env = "MIXNORM_WORKERS")]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV outputs and the run manifest.
    #[arg(long)]
    out: PathBuf,
    /// Replace `experiment.seed` before running.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mixed norms of explicit fields, with an optional permutation check.
    Norm(RunArgs),
    /// Rosenthal and mixingale constant tables.
    Constants(RunArgs),
    /// KS distance between the normed sums and their Gaussian limit.
    Clt(RunArgs),
    /// Moment bound for the normed sums.
    Moments(RunArgs),
    /// Empirical tail of the normed sums against the fitted curve.
    Tails(RunArgs),
    /// Moment bound after applying a linear operator.
    Sobolev(RunArgs),
    /// Built-in checks.
    Selftest {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
        /// Directory for the check report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Level {
    Quick,
    Full,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if workers == 0 {
            eprintln!("{}", CliError::validation("--workers", "must be at least 1"));
            return ExitCode::from(3);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
            eprintln!("{}", CliError::runtime(e));
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Selftest { level, out } => return run_selftest(level, out.as_deref()),
        Command::Norm(args) => run(&args, "norm", commands::norm),
        Command::Constants(args) => run(&args, "constants", commands::constants),
        Command::Clt(args) => run(&args, "clt", commands::clt),
        Command::Moments(args) => run(&args, "moments", commands::moments),
        Command::Tails(args) => run(&args, "tails", commands::tails),
        Command::Sobolev(args) => run(&args, "sobolev", commands::sobolev),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(
    args: &RunArgs,
    subcommand: &str,
    command: fn(&ConfigDocument) -> Result<CommandResult, CliError>,
) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", args.config.display())))?;
    let mut doc = config::parse(&text)?;
    if let Some(seed) = args.seed_override {
        doc.override_seed(seed);
    }
    let canonical = config::canonicalize(&doc);
    let experiment_id = match subcommand {
        "constants" => doc.experiment_id.clone().unwrap_or_else(|| "constants".into()),
        _ => doc.experiment_id()?.to_string(),
    };
    let result = command(&doc)?;

    fs::create_dir_all(&args.out)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", args.out.display())))?;
    let mut manifest = RunManifest::new(&experiment_id, subcommand, &canonical, doc.seed());
    write_file(&args.out, "config.toml", &canonical)?;
    manifest.outputs.push("config.toml".into());
    for output in &result.outputs {
        write_file(&args.out, output.name, &output.contents)?;
        manifest.outputs.push(output.name.into());
    }
    let json = serde_json::to_string_pretty(&manifest).map_err(CliError::runtime)?;
    write_file(&args.out, "manifest.json", &(json + "\n"))?;
    println!("{}", result.summary);
    println!("wrote {} to {}", manifest.outputs.join(", "), args.out.display());
    Ok(())
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))
}

fn run_selftest(level: Level, out: Option<&Path>) -> ExitCode {
    let outcomes = match level {
        Level::Quick => selftest::quick_checks(),
        Level::Full => selftest::full_checks(),
    };
    let report: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    print!("{report}");
    if let Some(dir) = out {
        let name = match level {
            Level::Quick => "selftest_quick.txt",
            Level::Full => "acceptance_report.txt",
        };
        if let Err(e) = fs::create_dir_all(dir).map_err(CliError::runtime).and_then(|_| write_file(dir, name, &report)) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let failed: Vec<&CheckOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
    if failed.is_empty() {
        println!("all {} checks passed", outcomes.len());
        ExitCode::SUCCESS
    } else {
        eprintln!("{} of {} checks failed:", failed.len(), outcomes.len());
        for o in failed {
            eprintln!("  {}", o.name);
        }
        ExitCode::from(1)
    }
}
