use anyhow::Context;
use clap::{Parser, Subcommand};
use cloaklab::cli::{list_scenarios, run, CliError, ScenarioConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Thread count for the parallel solves; unset means one per core.
const THREADS_ENV: &str = "CLOAKLAB_THREADS";

#[derive(Parser)]
#[command(name = "cloaklab", version, about = "Negative-index media and three-sphere/Carleman verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write CSV tables, manifest.json and summary.txt.
    Run {
        config: PathBuf,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    ValidateConfig { config: PathBuf },
    /// List the available scenarios.
    ListScenarios,
}

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.parse().with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn exit_for(err: &anyhow::Error) -> ExitCode {
    let code = err.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
    ExitCode::from(code as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: anyhow::Result<ExitCode> = (|| {
        match cli.command {
            Command::ListScenarios => {
                for (name, what) in list_scenarios() {
                    println!("{name:<24}{what}");
                }
                Ok(ExitCode::SUCCESS)
            }
            Command::ValidateConfig { config } => {
                let cfg = ScenarioConfig::load(&config)?;
                let scenario = cfg.resolve()?;
                println!("{}: valid `{}` config (sha256 {})", config.display(), cfg.scenario, cfg.hash());
                println!("{}", serde_json::to_string_pretty(&scenario.parameters_json())?);
                Ok(ExitCode::SUCCESS)
            }
            Command::Run { config, out } => {
                init_threads()?;
                let cfg = ScenarioConfig::load(&config)?;
                let outcome = run(&cfg, out.as_deref())?;
                print!("{}", outcome.report.summary());
                println!("outputs written to {}", outcome.output_dir.display());
                Ok(ExitCode::from(outcome.exit_code() as u8))
            }
        }
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_for(&e)
        }
    }
}
