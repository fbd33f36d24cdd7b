use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use epr_cqed::experiments::{ScenarioConfig, Table, POPULATION_COLUMNS, PULSE_COLUMNS, SWEEP_COLUMNS};

const SMALL: &str = "n_max = 1\nn_steps = 800\noutput_stride = 40\n";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_epr-cqed")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn header_block(text: &str) -> String {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .map(|l| format!("{}\n", &l[2..]))
        .collect()
}

#[test]
fn evolve_writes_schema_files_with_config_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("evolve");
    let o = run(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let pops = Table::read(&out.join("populations.csv")).unwrap();
    assert_eq!(pops.columns, POPULATION_COLUMNS);
    assert_eq!(pops.rows.len(), 21);
    let pulses = Table::read(&out.join("pulses.csv")).unwrap();
    assert_eq!(pulses.columns, PULSE_COLUMNS);
    assert!(out.join("metrics.csv").exists());

    let text = fs::read_to_string(out.join("populations.csv")).unwrap();
    let embedded = ScenarioConfig::parse(&header_block(&text)).unwrap();
    assert_eq!(embedded.n_max, 1);
    assert_eq!(embedded.grid.n_steps, 800);
    assert!(!text.contains("timestamp"));
    let meta = fs::read_to_string(out.join("metadata.txt")).unwrap();
    assert!(meta.contains("timestamp_unix = ") && meta.contains("wall_time_s = "));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}kappa = 3\nmaster_seed = 1\n"));
    let out = dir.path().join("lindblad");
    let o = run(&[
        "lindblad",
        "--config",
        &cfg,
        "--kappa-ratio",
        "0.02",
        "--seed",
        "9",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join("metrics.csv")).unwrap();
    let embedded = ScenarioConfig::parse(&header_block(&text)).unwrap();
    assert_eq!(embedded.physical_params().kappa, 0.2);
    assert_eq!(embedded.master_seed, 9);
}

#[test]
fn mcwf_output_is_independent_of_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}kappa_ratio = 0.05\n"));
    let mut outputs = Vec::new();
    for workers in ["1", "3"] {
        let out = dir.path().join(format!("w{workers}"));
        let o = run(&[
            "mcwf",
            "--config",
            &cfg,
            "--trajectories",
            "24",
            "--seed",
            "5",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(out);
    }
    for name in ["populations.csv", "pulses.csv", "metrics.csv"] {
        assert_eq!(
            fs::read(outputs[0].join(name)).unwrap(),
            fs::read(outputs[1].join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn sweep_rows_follow_ratio_order() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("{SMALL}sweep_ratios = 0.001, 0.01, 0.1\n"));
    let out = dir.path().join("sweep");
    let o = run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = Table::read(&out.join("sweep.csv")).unwrap();
    assert_eq!(table.columns, SWEEP_COLUMNS);
    let ratios: Vec<f64> = table.column("kappa_over_g0").unwrap().into_iter().map(Option::unwrap).collect();
    assert_eq!(ratios, vec![0.001, 0.01, 0.1]);
}

#[test]
fn darkstate_dump() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("dark");
    let o = run(&["darkstate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let table = Table::read(&out.join("darkstate.csv")).unwrap();
    assert_eq!(table.rows.len(), 21);
    assert_eq!(table.columns[0], "t");
}

#[test]
fn validation_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "unknown_key = 1\n");
    assert_eq!(run(&["evolve", "--config", &bad]).status.code(), Some(1));
    assert_eq!(run(&["evolve", "--nmax", "0"]).status.code(), Some(1));
    assert_eq!(run(&["evolve", "--solver", "mcwf"]).status.code(), Some(1));
    assert_eq!(run(&["evolve", "--no-such-flag"]).status.code(), Some(1));
    assert_eq!(run(&["sweep", "--solver", "schrodinger"]).status.code(), Some(1));
}

#[test]
fn integration_failure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "n_max = 1\nomega0 = 1e200\nn_steps = 2\noutput_stride = 1\n");
    let out = dir.path().join("boom");
    let o = run(&["evolve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn failing_verify_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // A coarse grid breaks the norm-drift and step-halving bounds.
    let cfg = write_config(dir.path(), "n_max = 1\nn_steps = 300\noutput_stride = 30\n");
    let out = dir.path().join("verify");
    let o = run(&["verify", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
    let report = fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(report.contains("norm_drift,fail"));
}
