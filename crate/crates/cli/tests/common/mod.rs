#![allow(dead_code)] // each test target uses its own subset of the fixtures

//! Shared fixtures for the CLI tests: spec files written into a tempdir
//! and a small wrapper around invoking the built binary.

use std::path::Path;
use std::process::Output;

pub const AWGN_SPEC: &str = r#"{"type": "awgn", "symbols": [0, 1, -1], "sigma2": 1.0}"#;

pub const LAPLACE_SPEC: &str = r#"{"type": "laplace", "symbols": [0, 1, -1], "lambda": 1.0}"#;

/// Forward matrix of the three-symbol table channel (posterior columns
/// halved, uniform observation marginal).
pub const TABLE_SPEC: &str = r#"{
  "type": "discrete",
  "symbols": ["x1", "x2", "x3"],
  "observations": ["a", "b", "c", "d", "e", "f"],
  "transition": [
    0.17, 0.165, 0.165, 0.1675, 0.1675, 0.165,
    0.165, 0.17, 0.165, 0.1675, 0.165, 0.1675,
    0.165, 0.165, 0.17, 0.165, 0.1675, 0.1675
  ]
}"#;

pub const ZERO_ENTRY_SPEC: &str = r#"{
  "type": "discrete",
  "symbols": ["x1", "x2"],
  "observations": ["a", "b"],
  "transition": [1.0, 0.0, 0.5, 0.5]
}"#;

pub const REPETITION_CODEBOOK: &str = "1,1,1\n2,2,2\n3,3,3\n";

pub fn write_fixture(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

pub fn run_detgeo(current_dir: &Path, args: &[&str]) -> Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_detgeo"))
        .args(args)
        .current_dir(current_dir)
        .output()
        .expect("binary runs")
}

pub fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}
