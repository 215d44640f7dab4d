//! Schema pins: CSV headers and JSON key paths per output kind.
//!
//! Set `UPDATE_GOLDEN=1` to rewrite the files after an intentional schema
//! change (and bump `SCHEMA_VERSION`).

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use spinerase_cli::{parse_config, run, Subcommand, SCHEMA_VERSION};

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn key_paths(prefix: &str, v: &Value, out: &mut Vec<String>) {
    if let Value::Object(map) = v {
        for (k, child) in map {
            let path = if prefix.is_empty() {
                k.clone()
            } else {
                format!("{prefix}.{k}")
            };
            out.push(path.clone());
            key_paths(&path, child, out);
        }
    }
}

fn schema_of(subcommand: Subcommand, config: &str, dir: &Path) -> String {
    let text = fs::read_to_string(manifest().join("tests/configs").join(config)).unwrap();
    let cfg = parse_config(subcommand, &text).unwrap();
    let artifacts = run(&cfg, dir).unwrap();
    let csv = fs::read_to_string(&artifacts.csv).unwrap();
    let json: Value = serde_json::from_str(&fs::read_to_string(&artifacts.json).unwrap()).unwrap();
    let mut keys = Vec::new();
    key_paths("", &json, &mut keys);
    let mut out = format!(
        "schema_version: {SCHEMA_VERSION}\ncsv: {}\n",
        csv.lines().next().unwrap()
    );
    for k in keys {
        out.push_str(&format!("json: {k}\n"));
    }
    out
}

fn check(name: &str, subcommand: Subcommand, config: &str) {
    let dir = tempfile::tempdir().unwrap();
    let got = schema_of(subcommand, config, dir.path());
    let path = manifest()
        .join("tests/golden")
        .join(format!("{name}.golden"));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::write(&path, &got).unwrap();
        return;
    }
    let want = fs::read_to_string(&path)
        .unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(
        got, want,
        "schema drift for {name}; rerun with UPDATE_GOLDEN=1 if intended"
    );
}

#[test]
fn model_a_run() {
    check("model_a_run", Subcommand::ModelA, "model_a.toml");
}

#[test]
fn model_a_sweep() {
    check("model_a_sweep", Subcommand::ModelA, "model_a_sweep.toml");
}

#[test]
fn protocol_run() {
    check("protocol_run", Subcommand::Protocol, "protocol.toml");
}

#[test]
fn protocol_sweep() {
    check(
        "protocol_sweep",
        Subcommand::Protocol,
        "protocol_sweep.toml",
    );
}

#[test]
fn microsim_exchange_run() {
    check(
        "microsim_exchange_run",
        Subcommand::Microsim,
        "microsim_exchange.toml",
    );
}

#[test]
fn microsim_block_run() {
    check(
        "microsim_block_run",
        Subcommand::Microsim,
        "microsim_block.toml",
    );
}

#[test]
fn microsim_sweep() {
    check(
        "microsim_sweep",
        Subcommand::Microsim,
        "microsim_sweep.toml",
    );
}

#[test]
fn demon_run() {
    check("demon_run", Subcommand::Demon, "demon.toml");
}

#[test]
fn demon_sweep() {
    check("demon_sweep", Subcommand::Demon, "demon_sweep.toml");
}

#[test]
fn maxent_run() {
    check("maxent_run", Subcommand::Maxent, "maxent.toml");
}
