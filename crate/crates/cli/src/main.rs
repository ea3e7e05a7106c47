use std::path::PathBuf;
use std::process::ExitCode;

use advect_cli::{converge_study, run_experiment, CliError, ExperimentConfig, StudySpec};
use clap::{Parser, Subcommand};

/// Upwind finite-volume advection experiments.
///
/// Exit status: 0 success, 1 i/o failure, 2 invalid configuration,
/// 3 numerical invariant violated (CFL refusal, energy identity, mass or
/// maximum principle), 4 fitted order outside the study window.
#[derive(Parser)]
#[command(name = "advect", version)]
struct Cli {
    /// Directory that output paths in configs are relative to.
    #[arg(long, global = true, env = "ADVECT_OUTPUT_ROOT", default_value = ".")]
    output_root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write report.csv, energy.csv and error.csv.
    Run { config: PathBuf },
    /// Run a refinement study and write convergence.csv, eoc.csv and
    /// convergence.svg.
    Converge { study: PathBuf },
    /// Check a config (or with --study, a study file) without running it.
    Validate {
        config: PathBuf,
        #[arg(long)]
        study: bool,
    },
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { config } => {
            let s = run_experiment(&ExperimentConfig::load(config)?, &cli.output_root)?;
            println!(
                "{} steps of dt = {:.6e}; L1 error {:.6e}; E_h {:.6e}, Q_h {:.6e}, eps_h {:.6e}; identity residual {:.2e}",
                s.timestep.steps, s.timestep.dt, s.error.l1_at_t, s.energy.e_h, s.energy.q_h, s.energy.eps_h, s.energy.identity_residual
            );
            println!("wrote {}", s.dir.display());
        }
        Command::Converge { study } => {
            let result = converge_study(&StudySpec::load(study)?, &cli.output_root);
            if let Ok(s) = &result {
                for r in &s.table.rows {
                    println!("h = {:.6e}  L1 = {:.6e}  Q_h = {:.6e}", r.h, r.l1_error, r.q_h);
                }
                println!("EOC = {:.4} (residual {:.2e})", s.fit.slope, s.fit.residual);
                println!("wrote {}", s.dir.display());
            }
            result?;
        }
        Command::Validate { config, study } => {
            if *study {
                StudySpec::load(config)?.validate()?;
            } else {
                ExperimentConfig::load(config)?.validate()?;
            }
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
