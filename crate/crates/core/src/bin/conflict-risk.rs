use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conflict_risk::error::Result;
use conflict_risk::report::{
    cmd_compare, cmd_dataset, cmd_detect, cmd_estimate, cmd_plot, cmd_synth, exit_code,
    parse_thresholds, CommandOutput, Overrides, RunConfig,
};

#[derive(Parser)]
#[command(version, about = "Traffic conflict detection and severity modelling")]
struct Cli {
    /// Run configuration (TOML).
    #[arg(short, long, global = true, default_value = "conflict-risk.toml")]
    config: PathBuf,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Halton draws per group.
    #[arg(long, global = true)]
    draws: Option<usize>,
    /// Sample every N frames.
    #[arg(long, global = true)]
    stride: Option<u32>,
    /// Slight and severe TTC thresholds in seconds, e.g. "3.0,1.5".
    #[arg(long, global = true)]
    thresholds: Option<String>,
    /// Repeat for more logging.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Label interactions and write the conflict table.
    Detect,
    /// Build the observation table for estimation.
    Dataset,
    /// Fit the configured models.
    Estimate,
    /// Likelihood-ratio tests between fitted or stored models.
    Compare,
    /// Write trajectory and TTC histogram data for plotting.
    Plot,
    /// Generate synthetic trajectories or choices.
    Synth,
}

fn run(cli: &Cli) -> Result<CommandOutput> {
    let mut cfg = RunConfig::load(&cli.config)?;
    cfg.apply(&Overrides {
        seed: cli.seed,
        draws: cli.draws,
        stride: cli.stride,
        thresholds: cli
            .thresholds
            .as_deref()
            .map(parse_thresholds)
            .transpose()?,
    });
    cfg.validate()?;
    match cli.command {
        Command::Detect => cmd_detect(&cfg),
        Command::Dataset => cmd_dataset(&cfg),
        Command::Estimate => cmd_estimate(&cfg),
        Command::Compare => cmd_compare(&cfg),
        Command::Plot => cmd_plot(&cfg),
        Command::Synth => cmd_synth(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.message);
            if !out.message.ends_with('\n') {
                println!();
            }
            for f in &out.files {
                log::info!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
