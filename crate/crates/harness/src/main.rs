use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cpsoc_harness::{run_grid, run_point, sig6, write_csv, write_csv_file, write_plot_series, ExperimentConfig, HarnessError};

/// Cellular PSO with clonal refinement on the Moving Peaks Benchmark.
#[derive(Parser)]
#[command(name = "cpsoc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full {f} x {m} grid and write the results table.
    Run(RunArgs),
    /// One seeded run; prints its offline error.
    Single(SingleArgs),
    /// Print the built-in default configuration.
    Defaults,
}

#[derive(Args)]
struct Common {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Changes per run.
    #[arg(long)]
    changes: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Independent runs per grid point.
    #[arg(long)]
    runs: Option<usize>,
    /// Seed of the first run; run k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Change frequencies, comma separated.
    #[arg(long, value_delimiter = ',')]
    f: Option<Vec<u64>>,
    /// Peak counts, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// CSV output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-f plot series.
    #[arg(long)]
    plot_dir: Option<PathBuf>,
    /// Record wall-clock seconds per grid point instead of 0.
    #[arg(long)]
    record_wall_time: bool,
    /// No progress lines on stderr.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Args)]
struct SingleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    f: Option<u64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load(common: &Common) -> Result<ExperimentConfig, HarnessError> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(changes) = common.changes {
        config.changes_per_run = changes;
    }
    Ok(config)
}

fn run(args: RunArgs) -> Result<(), HarnessError> {
    let mut config = load(&args.common)?;
    if let Some(runs) = args.runs {
        config.runs = runs;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    if let Some(f) = args.f {
        config.sweep.change_frequencies = f;
    }
    if let Some(m) = args.m {
        config.sweep.peak_counts = m;
    }
    config.record_wall_time |= args.record_wall_time;
    config.validate()?;

    let rows = run_grid(&config, |row| {
        if !args.quiet {
            eprintln!(
                "f={:<5} m={:<4} OE {} +- {} ({} runs)",
                row.f,
                row.m,
                sig6(row.mean_offline_error),
                sig6(row.std_error),
                row.runs
            );
        }
    })?;
    match &args.out {
        Some(path) => write_csv_file(&rows, path)?,
        None => write_csv(&rows, std::io::stdout().lock())
            .map_err(|e| HarnessError::Results(e.to_string()))?,
    }
    if let Some(dir) = &args.plot_dir {
        write_plot_series(&rows, dir)?;
    }
    Ok(())
}

fn single(args: SingleArgs) -> Result<(), HarnessError> {
    let config = load(&args.common)?;
    let f = args.f.unwrap_or(config.mpb.change_frequency);
    let m = args.m.unwrap_or(config.mpb.num_peaks);
    let seed = args.seed.unwrap_or(config.base_seed);
    config.run_config(f, m).validate()?;
    println!("{}", sig6(run_point(&config, f, m, seed)?));
    Ok(())
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Single(args) => single(args),
        Command::Defaults => {
            print!("{}", ExperimentConfig::default().to_toml());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
