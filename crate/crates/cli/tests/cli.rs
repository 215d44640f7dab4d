use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use spinerase_cli::{parse_config, run, Subcommand};
use std::f64::consts::LN_2;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/configs")
}

fn spinerase(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spinerase"));
    cmd.args(args).env_remove("SPINERASE_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("SPINERASE_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn protocol_run_through_binary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("protocol.toml");
    let out = spinerase(
        &[
            "protocol",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = csv_rows(&dir.path().join("protocol.csv"));
    assert_eq!(
        header,
        ["cycle", "block_size", "p1", "cycle_cost", "cumulative_cost"]
    );
    assert_eq!(rows.len(), 9);
    let last_p1: f64 = rows[8][2].parse().unwrap();
    assert!((last_p1 - 1.0 / 1025.0).abs() < 1e-15);
}

#[test]
fn model_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("model_a.toml");
    let out = spinerase(
        &["model-a", "--config", cfg.to_str().unwrap()],
        Some(dir.path()),
    );
    assert!(out.status.success());
    let json = read_json(&dir.path().join("model-a.json"));
    let work = json["results"]["work"].as_f64().unwrap();
    assert!((work - LN_2).abs() < 1e-6);
    assert!(json["results"]["tail_bound"].as_f64().unwrap() < 1e-21);
    assert_eq!(json["tool"]["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn alpha_ratio_is_echoed_as_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a.toml", "alpha = \"1/3\"\ncycles = 2\n");
    let out = spinerase(
        &[
            "protocol",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            dir.path().to_str().unwrap(),
        ],
        None,
    );
    assert!(out.status.success());
    let json = read_json(&dir.path().join("protocol.json"));
    assert!((json["derived"]["gamma_tilde"].as_f64().unwrap() - LN_2).abs() < 1e-15);
    assert_eq!(json["config"]["alpha"], "1/3");
}

#[test]
fn exit_codes_and_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let cases = [
        (
            "both.toml",
            "gamma_tilde = 1.0\nalpha = 0.2\n",
            "protocol",
            2,
            "config",
        ),
        ("syntax.toml", "gamma_tilde = \n", "protocol", 2, "config"),
        (
            "unknown.toml",
            "gamma_tilde = 1.0\nwarp = 9\n",
            "protocol",
            2,
            "config",
        ),
        (
            "stuck.toml",
            "gamma_tilde = 0.0\ntarget_p1 = 0.01\n",
            "protocol",
            3,
            "numeric",
        ),
        ("cold.toml", "gamma_tilde = -1.0\n", "demon", 2, "config"),
    ];
    for (file, text, sub, code, category) in cases {
        let cfg = write(dir.path(), file, text);
        let out = spinerase(
            &[sub, "--config", cfg.to_str().unwrap(), "--out-dir", d],
            None,
        );
        assert_eq!(out.status.code(), Some(code), "{file}");
        let err: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
        assert_eq!(err["error"]["category"], category, "{file}");
        assert_eq!(err["error"]["exit_code"], code);
    }

    let missing = spinerase(&["protocol", "--config", "/nonexistent/x.toml"], None);
    assert_eq!(missing.status.code(), Some(4));

    // Output directory blocked by a regular file.
    let blocker = write(dir.path(), "blocker", "");
    let cfg = configs().join("demon.toml");
    let out = spinerase(
        &[
            "demon",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            blocker.join("sub").to_str().unwrap(),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn out_dir_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let (flag, env, conf) = (
        dir.path().join("flag"),
        dir.path().join("env"),
        dir.path().join("conf"),
    );
    let cfg = write(
        dir.path(),
        "d.toml",
        &format!(
            "gamma_tilde = 1.0\n[output]\ndir = \"{}\"\n",
            conf.display()
        ),
    );
    let c = cfg.to_str().unwrap();
    assert!(spinerase(&["demon", "--config", c], None).status.success());
    assert!(conf.join("demon.json").exists());
    assert!(spinerase(&["demon", "--config", c], Some(&env))
        .status
        .success());
    assert!(env.join("demon.json").exists());
    assert!(spinerase(
        &["demon", "--config", c, "--out-dir", flag.to_str().unwrap()],
        Some(&env)
    )
    .status
    .success());
    assert!(flag.join("demon.json").exists());
}

#[test]
fn seed_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("microsim_exchange.toml");
    let d = dir.path().to_str().unwrap();
    assert!(spinerase(
        &[
            "microsim",
            "--config",
            cfg.to_str().unwrap(),
            "--out-dir",
            d,
            "--seed",
            "99"
        ],
        None
    )
    .status
    .success());
    let json = read_json(&dir.path().join("microsim.json"));
    assert_eq!(json["seed"], 99);
    assert_eq!(json["config"]["seed"], 99);

    let defaulted = write(dir.path(), "nos.toml", "gamma_tilde = 1.0\n");
    assert!(spinerase(
        &[
            "demon",
            "--config",
            defaulted.to_str().unwrap(),
            "--out-dir",
            d
        ],
        None
    )
    .status
    .success());
    assert_eq!(read_json(&dir.path().join("demon.json"))["seed"], 0);
}

fn run_twice(
    sub: Subcommand,
    config: &str,
    mutate: impl Fn(&mut spinerase_cli::RunConfig),
) -> (Vec<u8>, Vec<u8>, Vec<u8>, Vec<u8>) {
    let text = fs::read_to_string(configs().join(config)).unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = parse_config(sub, &text).unwrap();
    let mut second = first.clone();
    mutate(&mut second);
    let x = run(&first, a.path()).unwrap();
    let y = run(&second, b.path()).unwrap();
    (
        fs::read(x.csv).unwrap(),
        fs::read(y.csv).unwrap(),
        fs::read(x.json).unwrap(),
        fs::read(y.json).unwrap(),
    )
}

#[test]
fn reruns_are_byte_identical() {
    for (sub, cfg) in [
        (Subcommand::Microsim, "microsim_exchange.toml"),
        (Subcommand::Microsim, "microsim_block.toml"),
        (Subcommand::Microsim, "microsim_sweep.toml"),
        (Subcommand::Protocol, "protocol_sweep.toml"),
        (Subcommand::Demon, "demon_sweep.toml"),
    ] {
        let (c1, c2, j1, j2) = run_twice(sub, cfg, |_| {});
        assert_eq!(c1, c2, "{cfg}");
        assert_eq!(j1, j2, "{cfg}");
    }
}

#[test]
fn execution_mode_does_not_change_numbers() {
    use spinerase::parallel::Execution;
    for (sub, cfg) in [
        (Subcommand::Microsim, "microsim_exchange.toml"),
        (Subcommand::Microsim, "microsim_sweep.toml"),
    ] {
        let (c1, c2, _, _) = run_twice(sub, cfg, |c| c.execution = Execution::Sequential);
        assert_eq!(c1, c2, "{cfg}");
    }
}

#[test]
fn different_seeds_differ() {
    let (c1, c2, _, _) = run_twice(Subcommand::Microsim, "microsim_exchange.toml", |c| {
        c.seed += 1
    });
    assert_ne!(c1, c2);
}

#[test]
fn protocol_sweep_rows_respect_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("protocol_sweep.toml")).unwrap();
    let a = run(
        &parse_config(Subcommand::Protocol, &text).unwrap(),
        dir.path(),
    )
    .unwrap();
    let (header, rows) = csv_rows(&a.csv);
    assert_eq!(rows.len(), 50);
    let (lo, v, hi) = (
        column(&header, "delta_jz_lower"),
        column(&header, "delta_jz"),
        column(&header, "delta_jz_upper"),
    );
    for row in &rows {
        let f = |i: usize| row[i].parse::<f64>().unwrap();
        assert!(f(lo) < f(v) && f(v) < f(hi), "{row:?}");
    }
    let json = read_json(&a.json);
    assert_eq!(json["results"]["checks"]["all_within_bounds"], true);
    assert_eq!(json["results"]["checks"]["all_within_bounds_initial"], true);
}

#[test]
fn demon_sweep_entropy_positive() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("demon_sweep.toml")).unwrap();
    let a = run(&parse_config(Subcommand::Demon, &text).unwrap(), dir.path()).unwrap();
    let (header, rows) = csv_rows(&a.csv);
    assert_eq!(rows.len(), 40);
    let (total, energy) = (
        column(&header, "total_entropy_change"),
        column(&header, "net_energy_cost_of_erasure"),
    );
    for row in &rows {
        assert!(row[total].parse::<f64>().unwrap() > 0.0);
        assert_eq!(row[energy], "0");
    }
    // The first axis varies slowest.
    assert_eq!(rows[0][0], rows[1][0]);
    assert_ne!(rows[0][1], rows[1][1]);
}

#[test]
fn single_point_sweep_matches_run() {
    let dir = tempfile::tempdir().unwrap();
    for (sub, base, key) in [
        (
            Subcommand::Demon,
            "temperature = 1.0\ngamma_tilde = 0.8\n",
            "gamma_tilde",
        ),
        (
            Subcommand::Protocol,
            "gamma_tilde = 0.8\ncycles = 5\n",
            "gamma_tilde",
        ),
        (
            Subcommand::Microsim,
            "n_spins = 4\nm_spins = 6\ntotal_up = 3\nsamples = 3000\n",
            "m_spins",
        ),
    ] {
        let value = match key {
            "m_spins" => "6",
            _ => "0.8",
        };
        let single = parse_config(sub, base).unwrap();
        let swept = parse_config(
            sub,
            &format!("{base}[[sweep]]\nparameter = \"{key}\"\nvalues = [{value}]\n"),
        )
        .unwrap();
        let a = run(&single, &dir.path().join("a")).unwrap();
        let b = run(&swept, &dir.path().join("b")).unwrap();
        let results = read_json(&a.json)["results"].clone();
        let (header, rows) = csv_rows(&b.csv);
        assert_eq!(rows.len(), 1);
        for (h, cell) in header.iter().zip(&rows[0]).skip(1) {
            let want = &results[h.as_str()];
            match want {
                Value::Number(n) => {
                    assert_eq!(cell.parse::<f64>().unwrap(), n.as_f64().unwrap(), "{h}")
                }
                Value::Bool(v) => assert_eq!(cell, &v.to_string(), "{h}"),
                Value::String(s) => assert_eq!(cell, s, "{h}"),
                Value::Null => assert_eq!(cell, "", "{h}"),
                other => panic!("{h}: {other}"),
            }
        }
    }
}

#[test]
fn microsim_block_reports_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(configs().join("microsim_block.toml")).unwrap();
    let a = run(
        &parse_config(Subcommand::Microsim, &text).unwrap(),
        dir.path(),
    )
    .unwrap();
    let json = read_json(&a.json);
    let r = &json["results"];
    assert!((r["p1_expected"].as_f64().unwrap() - 0.2).abs() < 1e-15);
    assert!(r["std_error"].as_f64().unwrap() > 0.0);
    assert_eq!(r["conserved"], true);
    let (_, rows) = csv_rows(&a.csv);
    let total: u64 = rows.iter().map(|r| r[1].parse::<u64>().unwrap()).sum();
    assert_eq!(total, 20_000);
}

#[test]
fn wall_time_only_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let plain = run(
        &parse_config(Subcommand::Demon, "gamma_tilde = 1.0\n").unwrap(),
        &dir.path().join("a"),
    )
    .unwrap();
    assert!(read_json(&plain.json).get("wall_time_seconds").is_none());
    let timed = parse_config(
        Subcommand::Demon,
        "gamma_tilde = 1.0\n[output]\nwall_time = true\n",
    )
    .unwrap();
    let timed = run(&timed, &dir.path().join("b")).unwrap();
    assert!(
        read_json(&timed.json)["wall_time_seconds"]
            .as_f64()
            .unwrap()
            >= 0.0
    );
}
