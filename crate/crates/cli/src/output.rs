//! Executes a [`RunConfig`] and writes `<stem>.csv` and `<stem>.json`.
//!
//! Output bytes depend only on the configuration: rows come in grid order,
//! JSON keys are sorted, and wall time is recorded only on request.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};
use spinerase::parallel::map_ordered;

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::experiments::{evaluate, streams_needed, summary_json, Cell, Table};

/// Bumped whenever a CSV column or JSON key changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifacts {
    pub csv: PathBuf,
    pub json: PathBuf,
}

struct Outcome {
    table: Table,
    derived: Value,
    results: Value,
    tolerances: Value,
}

fn run_single(config: &RunConfig) -> Result<Outcome> {
    let report = evaluate(&config.validated, config.seed, 0, config.execution)?;
    let mut results = summary_json(&report.summary);
    if let (Value::Object(map), Value::Object(extra)) = (&mut results, report.extra) {
        map.extend(extra);
    }
    Ok(Outcome {
        table: report.table,
        derived: report.derived,
        results,
        tolerances: report.tolerances,
    })
}

fn run_sweep(config: &RunConfig) -> Result<Outcome> {
    let points = config.grid()?;
    let mut bases = Vec::with_capacity(points.len());
    let mut next = 0u64;
    for p in &points {
        bases.push(next);
        next += streams_needed(&p.parameters);
    }
    let indexed: Vec<usize> = (0..points.len()).collect();
    let reports = map_ordered(config.execution, &indexed, |&i| {
        evaluate(
            &points[i].parameters,
            config.seed,
            bases[i],
            config.execution,
        )
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut header: Vec<String> = config
        .sweep
        .iter()
        .map(|a| format!("sweep_{}", a.parameter))
        .collect();
    header.extend(reports[0].summary.iter().map(|(k, _)| k.to_string()));
    let mut table = Table {
        header,
        rows: Vec::with_capacity(points.len()),
    };
    for (point, report) in points.iter().zip(&reports) {
        let mut row: Vec<Cell> = point.coordinates.iter().map(|&v| Cell::Float(v)).collect();
        row.extend(report.summary.iter().map(|(_, v)| v.clone()));
        table.rows.push(row);
    }

    // Every boolean column is a per-point check; report whether all pass.
    let mut checks = Map::new();
    for (col, (name, first)) in reports[0].summary.iter().enumerate() {
        if matches!(first, Cell::Bool(_)) {
            let all = reports.iter().all(|r| r.summary[col].1 == Cell::Bool(true));
            checks.insert(format!("all_{name}"), json!(all));
        }
    }
    Ok(Outcome {
        table,
        derived: json!({
            "points": points.len(),
            "streams_used": next,
        }),
        results: json!({ "points": points.len(), "checks": checks }),
        tolerances: reports[0].tolerances.clone(),
    })
}

fn write_csv(path: &Path, table: &Table) -> Result<()> {
    let io = |e: csv::Error| match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::io(path, source),
        other => CliError::io(path, std::io::Error::other(format!("{other:?}"))),
    };
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(&table.header).map_err(io)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render)).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Runs the configuration and writes both artifacts into `out_dir`.
pub fn run(config: &RunConfig, out_dir: &Path) -> Result<Artifacts> {
    let started = Instant::now();
    let outcome = if config.is_sweep() {
        run_sweep(config)?
    } else {
        run_single(config)?
    };

    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
    let csv_name = format!("{}.csv", config.stem);
    let json_name = format!("{}.json", config.stem);
    let artifacts = Artifacts {
        csv: out_dir.join(&csv_name),
        json: out_dir.join(&json_name),
    };
    write_csv(&artifacts.csv, &outcome.table)?;

    let mut echo = serde_json::to_value(&config.parameters).expect("configs serialize");
    if let Value::Object(map) = &mut echo {
        map.insert("seed".into(), json!(config.seed));
        map.insert("subcommand".into(), json!(config.subcommand.name()));
    }
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "tool": { "name": "spinerase", "version": env!("CARGO_PKG_VERSION") },
        "subcommand": config.subcommand.name(),
        "kind": if config.is_sweep() { "sweep" } else { "run" },
        "seed": config.seed,
        "execution": config.execution,
        "config": echo,
        "inputs": config.validated,
        "derived": outcome.derived,
        "results": outcome.results,
        "tolerances": outcome.tolerances,
        "files": { "csv": csv_name, "rows": outcome.table.rows.len() },
    });
    if config.is_sweep() {
        doc["sweep"] = json!(config.sweep);
    }
    if config.wall_time {
        doc["wall_time_seconds"] = json!(started.elapsed().as_secs_f64());
    }
    let mut text = serde_json::to_string_pretty(&doc).expect("json serializes");
    text.push('\n');
    fs::write(&artifacts.json, text).map_err(|e| CliError::io(&artifacts.json, e))?;
    Ok(artifacts)
}
