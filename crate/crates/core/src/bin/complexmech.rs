use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use complexmech::scenario::{resolve_output_dir, run_scenario, validate_config, SCENARIOS};

const OUT_ENV: &str = "COMPLEXMECH_OUT";

#[derive(Parser)]
#[command(version, about = "Run complexified-mechanics scenarios from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory; overrides COMPLEXMECH_OUT and the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// Print the known scenario names.
    ListScenarios,
}

fn load(path: &PathBuf) -> Result<complexmech::scenario::ScenarioConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: reading {}: {e}", path.display());
        ExitCode::from(1)
    })?;
    validate_config(&text).map_err(|errs| {
        for e in errs.0 {
            eprintln!("error: {e}");
        }
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListScenarios => {
            for name in SCENARIOS {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match load(&config) {
            Ok(c) => {
                println!("{}: ok ({})", config.display(), c.scenario);
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Run { config, out } => {
            let c = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let env = std::env::var(OUT_ENV).ok();
            let dir = resolve_output_dir(out.as_deref(), env.as_deref(), &c);
            match run_scenario(&c, &dir) {
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
                Ok(result) => {
                    for check in &result.checks {
                        let verdict = if check.pass { "pass" } else { "FAIL" };
                        println!("{verdict} {} value={:e} tolerance={:e}", check.name, check.value, check.tolerance);
                    }
                    println!("wrote {}", dir.display());
                    if result.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(3)
                    }
                }
            }
        }
    }
}
