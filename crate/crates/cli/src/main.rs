use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use occlast_cli::{cmd_eval, cmd_simulate, cmd_table, cmd_validate, CliError, Report, RunConfig};

#[derive(Parser)]
#[command(
    name = "occlast",
    version,
    about = "Occupation times up to last passage times of spectrally negative Lévy processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate analytic quantities at every x.
    Eval(Common),
    /// Compare analytic values with Monte Carlo estimates.
    Validate(Common),
    /// Tabulate densities over an (x, y) grid.
    Table(Common),
    /// Monte Carlo estimates only.
    Simulate(Common),
}

#[derive(Args)]
struct Common {
    /// Config file, key = value text or JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output path; overrides `out` in the config. Standard output if neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(common: &Common, f: fn(&RunConfig) -> Result<Report, CliError>) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| CliError(format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg = RunConfig::parse(&text)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(CliError("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError(format!("cannot start workers: {e}")))?;
    let report = pool.install(|| f(&cfg))?;

    match out {
        Some(path) => std::fs::write(&path, &report.body)
            .map_err(|e| CliError(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{}", report.body),
    }
    Ok(!report.failed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(c) => run(c, cmd_eval),
        Command::Validate(c) => run(c, cmd_validate),
        Command::Table(c) => run(c, cmd_table),
        Command::Simulate(c) => run(c, cmd_simulate),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("occlast: some checks failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("occlast: {e}");
            ExitCode::from(2)
        }
    }
}
