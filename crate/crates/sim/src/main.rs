use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mmimo::montecarlo::pool_outputs;
use mmimo::prelude::Deployment;
use mmimo_sim::config::{load_config_file, ConfigError, Overrides, PowerChoice, ScenarioConfig};
use mmimo_sim::output;
use mmimo_sim::report::{print_report, reproduce_table_sized, write_report_csv, Scale};
use mmimo_sim::runner;

/// Monte Carlo evaluation of uplink spectral efficiency for cellular and
/// cell-free massive MIMO.
#[derive(Parser)]
#[command(name = "mmimo-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write per-sample and summary CSVs.
    Simulate(RunArgs),
    /// Run one scenario and write plot-ready CDF CSVs (one per power mode).
    Cdf(RunArgs),
    /// Re-run every cell of a benchmark table and compare against the
    /// published reference values.
    ReproduceTable(TableArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON scenario file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// urban, suburban, or rural.
    #[arg(long)]
    morphology: Option<String>,
    /// cellular or cellfree.
    #[arg(long)]
    deployment: Option<String>,
    /// mr or zf.
    #[arg(long)]
    decoder: Option<String>,
    /// full, maxmin, or both.
    #[arg(long)]
    power: Option<PowerChoice>,
    /// Number of service antennas.
    #[arg(long = "M", visible_alias = "m")]
    m: Option<usize>,
    /// Number of user terminals.
    #[arg(long = "K", visible_alias = "k")]
    k: Option<usize>,
    /// Pilot length in symbols (defaults to K).
    #[arg(long)]
    tau: Option<usize>,
    /// Large-scale fading realizations.
    #[arg(long)]
    n_largescale: Option<usize>,
    /// Small-scale realizations per profile (cf-ZF expectations).
    #[arg(long)]
    n_smallscale: Option<usize>,
    /// Master seed; identical seeds reproduce outputs byte for byte.
    #[arg(long)]
    seed: Option<u64>,
    /// Output stem; files are written as <stem>_samples.csv etc.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct TableArgs {
    /// Which table to reproduce: cellular or cellfree.
    table: String,
    /// full (published run sizes) or reduced (desk scale).
    #[arg(long, default_value = "reduced")]
    scale: Scale,
    /// Exit with status 3 when any cell is out of tolerance.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Small-scale realizations per profile for ZF cells.
    #[arg(long, default_value_t = 200)]
    n_smallscale: usize,
    /// Override every cell's realization count (smoke runs only).
    #[arg(long)]
    n_largescale: Option<usize>,
    /// Output stem for the report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn resolve_scenario(args: &RunArgs) -> Result<ScenarioConfig, ConfigError> {
    let file = match &args.config {
        Some(path) => Some(load_config_file(path)?),
        None => None,
    };
    let flags = Overrides {
        morphology: args.morphology.clone(),
        deployment: args.deployment.clone(),
        decoder: args.decoder.clone(),
        power: args.power,
        m: args.m,
        k: args.k,
        tau: args.tau,
        n_largescale: args.n_largescale,
        n_smallscale: args.n_smallscale,
        seed: args.seed,
        out: args.out.clone(),
    };
    ScenarioConfig::resolve(file.as_ref(), &flags)
}

fn cmd_simulate(args: &RunArgs) -> Result<(), MainError> {
    let config = resolve_scenario(args)?;
    let plan = config.plan().map_err(|e| ConfigError(e.to_string()))?;
    let outputs = runner::run_outputs(&plan).map_err(MainError::run)?;
    let summaries = pool_outputs(&plan, &outputs).map_err(MainError::run)?;

    let samples = output::samples_path(&config.out);
    let summary = output::summary_path(&config.out);
    output::write_samples(&samples, &config, &outputs)?;
    output::write_summary(&summary, &config, &summaries)?;

    println!("wrote {}", samples.display());
    println!("wrote {}", summary.display());
    for s in &summaries {
        for &(p, se) in &s.percentile_values {
            let label = 100.0 - p;
            println!(
                "{} {}: {label}%-likely SE = {se:.3} bps/Hz",
                s.config, s.power
            );
        }
    }
    Ok(())
}

fn cmd_cdf(args: &RunArgs) -> Result<(), MainError> {
    let config = resolve_scenario(args)?;
    let plan = config.plan().map_err(|e| ConfigError(e.to_string()))?;
    let summaries = runner::run_parallel(&plan).map_err(MainError::run)?;
    for summary in &summaries {
        let path = output::cdf_path(&config.out, summary.power);
        output::write_cdf(&path, &config, summary)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_reproduce_table(args: &TableArgs) -> Result<(), MainError> {
    let table = match args.table.as_str() {
        "cellular" => Deployment::Cellular,
        "cellfree" | "cell-free" => Deployment::CellFree,
        other => {
            return Err(ConfigError(format!(
                "unknown table `{other}` (expected cellular or cellfree)"
            ))
            .into())
        }
    };
    let rows = reproduce_table_sized(
        table,
        args.scale,
        args.seed,
        args.n_smallscale,
        args.n_largescale,
    )
    .map_err(MainError::run)?;
    print_report(&rows, &mut std::io::stdout())?;
    if let Some(stem) = &args.out {
        let path = output::report_path(stem);
        write_report_csv(&path, args.seed, &rows)?;
        println!("wrote {}", path.display());
    }
    let failures = rows.iter().filter(|r| !r.passes()).count();
    if failures > 0 {
        println!("{failures} cell(s) out of tolerance");
        if args.strict {
            return Err(MainError::OutOfTolerance);
        }
    }
    Ok(())
}

enum MainError {
    Config(ConfigError),
    Io(std::io::Error),
    Run(String),
    OutOfTolerance,
}

impl MainError {
    fn run(e: mmimo::Error) -> Self {
        MainError::Run(e.to_string())
    }
}

impl From<ConfigError> for MainError {
    fn from(e: ConfigError) -> Self {
        MainError::Config(e)
    }
}

impl From<std::io::Error> for MainError {
    fn from(e: std::io::Error) -> Self {
        MainError::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Cdf(args) => cmd_cdf(args),
        Command::ReproduceTable(args) => cmd_reproduce_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(MainError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(MainError::Run(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(MainError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
        Err(MainError::OutOfTolerance) => ExitCode::from(3),
    }
}
