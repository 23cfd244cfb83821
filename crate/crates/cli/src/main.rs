use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qme_cli::config::ScenarioConfig;
use qme_cli::error::CliError;
use qme_cli::{compare, presets, resolve_output_dir, scenario};

/// Simulate multi-timescale relaxation of small open quantum systems:
/// master-equation propagation, Liouvillian timescale analysis, and seeded
/// jump-trajectory ensembles, driven by declarative scenario files.
#[derive(Parser)]
#[command(name = "qme", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write its outputs.
    Run {
        /// Path to a TOML scenario file.
        config: PathBuf,
    },
    /// Compare the shared columns of two observables CSV files.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Fail (exit 1) if any shared column deviates beyond this bound.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Bundled scenario presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List preset names with one-line descriptions.
    List,
    /// Run a preset by name.
    Run { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| CliError::Config(format!("{}: {e}", config.display())))?;
            let parsed = ScenarioConfig::from_toml(&text)?;
            run(&parsed, None)
        }
        Command::Compare { a, b, tol } => {
            let report = compare::compare_files(&a, &b, tol)?;
            print!("{}", report.render());
            Ok(())
        }
        Command::Presets { action } => match action {
            PresetsAction::List => {
                for name in presets::names() {
                    println!("{name}: {}", presets::describe(name));
                }
                Ok(())
            }
            PresetsAction::Run { name } => {
                let config = presets::get(&name)?;
                run(&config, Some(&name))
            }
        },
    }
}

fn run(config: &ScenarioConfig, preset: Option<&str>) -> Result<(), CliError> {
    let out_dir = resolve_output_dir(&config.output.directory);
    let summary = scenario::run_scenario(config, &out_dir, preset)?;
    for warning in &summary.warnings {
        eprintln!("warning: {warning}");
    }
    println!(
        "wrote {} file(s) to {}",
        summary.files.len(),
        summary.out_dir.display()
    );
    for file in &summary.files {
        println!("  {file}");
    }
    Ok(())
}
