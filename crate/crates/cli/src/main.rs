use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use spinerase_cli::{parse_config, run, CliError, Subcommand};

/// Qubit-erasure experiments: thermal work, spin-reservoir protocol, Monte
/// Carlo validation and demon ledgers.
#[derive(Debug, Parser)]
#[command(name = "spinerase", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    subcommand: Subcommand,

    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,

    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Output directory; takes precedence over the configuration.
    #[arg(long, env = "SPINERASE_OUT_DIR")]
    out_dir: Option<PathBuf>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let mut config = parse_config(args.subcommand, &text)
        .map_err(|e| e.context(&args.config.display().to_string()))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let out_dir = args
        .out_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("."));
    let started = std::time::Instant::now();
    let artifacts = run(&config, &out_dir)?;
    eprintln!(
        "wrote {} and {} in {:.3} s",
        artifacts.csv.display(),
        artifacts.json.display(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.report() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
