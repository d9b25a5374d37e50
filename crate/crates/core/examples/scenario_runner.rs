//! Runs a scenario config through the library API, as the CLI does.
//!
//! `cargo run --example scenario_runner -- crates/core/scenarios/spatial_barrier.toml [OUT_DIR]`

use std::path::PathBuf;

use complexmech::scenario::{run_scenario, validate_config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let path = args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/spatial_barrier.toml").into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("complexmech-example"));

    let config = validate_config(&std::fs::read_to_string(&path)?)?;
    let result = run_scenario(&config, &out)?;
    for check in &result.checks {
        println!("{:<36} {} ({:.3e} <= {:.3e})", check.name, if check.pass { "pass" } else { "FAIL" }, check.value, check.tolerance);
    }
    for artifact in &result.artifacts {
        println!("{} {}", &artifact.sha256[..12], out.join(&artifact.path).display());
    }
    Ok(())
}
