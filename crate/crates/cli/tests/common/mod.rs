#![allow(dead_code)]

use std::path::Path;
use std::process::{Command, Output};

pub fn nestspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nestspec"))
        .args(args)
        .env_remove("NESTSPEC_LOG")
        .output()
        .expect("binary runs")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

pub fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

/// Malformed inputs: file, family flag, line and column the error must name.
pub const MALFORMED: [(&str, &str, u64, Option<usize>); 10] = [
    ("non_numeric.csv", "linear", 3, Some(2)),
    ("missing_field.csv", "linear", 3, Some(3)),
    ("extra_field.csv", "linear", 3, Some(4)),
    ("bad_header.csv", "linear", 1, Some(2)),
    ("header_only.csv", "linear", 2, None),
    ("nan_value.csv", "linear", 3, Some(1)),
    ("binomial_response.csv", "binomial", 4, Some(1)),
    ("poisson_fraction.csv", "poisson", 3, Some(1)),
    ("survival_event.csv", "cox", 3, Some(2)),
    ("negative_time.csv", "cox", 4, Some(1)),
];

pub fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/malformed/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// Runs `fit` on a malformed fixture; returns a description of what went
/// wrong, or `None` when the contract (exit 2, located message) holds.
pub fn check_malformed(dir: &Path, (name, family, line, column): (&str, &str, u64, Option<usize>)) -> Option<String> {
    let out_path = dir.join(format!("{name}.json"));
    let out = nestspec(&[
        "fit",
        "--input",
        &fixture(name),
        "--family",
        family,
        "--output",
        out_path.to_str().unwrap(),
    ]);
    let msg = stderr(&out);
    let located = msg.contains(name)
        && msg.contains(&format!("line {line}"))
        && column.is_none_or(|c| msg.contains(&format!("column {c}")));
    if code(&out) != 2 || !located || out_path.exists() {
        Some(format!("{name}: exit {}, stderr {msg:?}", code(&out)))
    } else {
        None
    }
}
