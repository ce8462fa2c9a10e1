use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use memwave::harness::{run_with, Experiment, ExperimentConfig};

/// Membrane waves over a diffusive half-space and their fractional limit.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled membrane and bulk diffusion, energy per step.
    SimulateCoupled(Common),
    /// Fractionally damped wave equation with the reduced energy audit.
    SimulateFractional(Common),
    /// Admissible dispersion roots over a wavenumber sweep.
    Dispersion(Common),
    /// Lyapunov and balance audits of both models.
    EnergyAudit(Common),
    /// Rate at which the coupled model approaches its eps = 0 limit.
    Converge(Common),
    /// Dimensionless scales of a physical parameter set.
    Nondim(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory, overrides `output_dir` in the config.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::SimulateCoupled(a) => (Experiment::SimulateCoupled, a),
        Command::SimulateFractional(a) => (Experiment::SimulateFractional, a),
        Command::Dispersion(a) => (Experiment::Dispersion, a),
        Command::EnergyAudit(a) => (Experiment::EnergyAudit, a),
        Command::Converge(a) => (Experiment::Converge, a),
        Command::Nondim(a) => (Experiment::Nondim, a),
    };
    env_logger::Builder::new()
        .filter_level(if args.verbose {
            log::LevelFilter::Info
        } else {
            log::LevelFilter::Warn
        })
        .init();

    let result = ExperimentConfig::load(&args.config).and_then(|cfg| {
        let out = args
            .output
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("output"));
        run_with(experiment, &cfg, &out)
    });
    match result {
        Ok(outcome) => {
            if let Some(csv) = &outcome.csv {
                println!("{}", csv.display());
            }
            println!("{}", outcome.json.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
