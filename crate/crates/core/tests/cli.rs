//! End-to-end runs of the `complexmech` binary.
//!
//! Goldens hold each bundled scenario's `summary.json`, which lists the
//! SHA-256 of every artifact. Set `UPDATE_GOLDEN=1` to rewrite them.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_complexmech");

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bundled() -> Vec<PathBuf> {
    let mut configs: Vec<PathBuf> = fs::read_dir(root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    configs.sort();
    configs
}

fn complexmech(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("COMPLEXMECH_OUT").output().unwrap()
}

fn run_into(config: &Path, out: &Path) -> Output {
    complexmech(&["run", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn list_scenarios_prints_every_name() {
    let out = complexmech(&["list-scenarios"]);
    assert!(out.status.success());
    let names: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(str::to_owned).collect();
    assert_eq!(names, complexmech::scenario::SCENARIOS);
}

#[test]
fn bundled_configs_validate() {
    for config in bundled() {
        let out = complexmech(&["validate", config.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", config.display());
    }
}

#[test]
fn bundled_configs_are_deterministic_and_match_goldens() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some_and(|v| v == "1");
    for config in bundled() {
        let stem = config.file_stem().unwrap().to_string_lossy().into_owned();
        let first = tempfile::tempdir().unwrap();
        let second = tempfile::tempdir().unwrap();
        let a = run_into(&config, first.path());
        let b = run_into(&config, second.path());
        assert_eq!(a.status.code(), Some(0), "{stem}: {}", String::from_utf8_lossy(&a.stdout));
        assert_eq!(b.status.code(), Some(0), "{stem}");
        assert_eq!(listing(first.path()), listing(second.path()), "{stem} differs between runs");

        let summary = fs::read_to_string(first.path().join("summary.json")).unwrap();
        let golden = root().join("tests/golden").join(&stem).join("summary.json");
        if update {
            fs::create_dir_all(golden.parent().unwrap()).unwrap();
            fs::write(&golden, &summary).unwrap();
        } else {
            let expected = fs::read_to_string(&golden)
                .unwrap_or_else(|_| panic!("missing {}; rerun with UPDATE_GOLDEN=1", golden.display()));
            assert_eq!(summary, expected, "{stem} drifted from its golden");
        }
    }
}

#[test]
fn misspelled_parameter_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario = \"spatial_barrier\"\n[parameters]\nVo = 2.0\n");
    let out = complexmech(&["validate", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("V0"));
    assert_eq!(run_into(&config, dir.path()).status.code(), Some(1));
}

#[test]
fn unknown_scenario_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario = \"wormhole\"\n");
    assert_eq!(complexmech(&["validate", config.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn singular_trajectory_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "scenario = \"cosmology\"\n[parameters]\npT_re = -100.0\n");
    assert_eq!(complexmech(&["validate", config.to_str().unwrap()]).status.code(), Some(0));
    let out = run_into(&config, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_check_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_into(&root().join("tests/fixtures/doctored_cosmology.toml"), dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL energy_drift"));
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn environment_overrides_config_but_not_flag() {
    let dir = tempfile::tempdir().unwrap();
    let config = root().join("scenarios/operator_algebra.toml");
    let from_env = dir.path().join("env");
    let out = Command::new(BIN)
        .args(["run", config.to_str().unwrap()])
        .env("COMPLEXMECH_OUT", &from_env)
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(from_env.join("summary.json").exists());

    let from_flag = dir.path().join("flag");
    let out = Command::new(BIN)
        .args(["run", config.to_str().unwrap(), "--out", from_flag.to_str().unwrap()])
        .env("COMPLEXMECH_OUT", dir.path().join("ignored"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(from_flag.join("summary.json").exists());
    assert!(!dir.path().join("ignored").exists());
}

#[test]
fn missing_config_is_a_validation_error() {
    assert_eq!(complexmech(&["validate", "/nonexistent/config.toml"]).status.code(), Some(1));
}
