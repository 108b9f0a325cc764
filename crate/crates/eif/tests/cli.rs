use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eif::RunConfig;
use eif_core::oracles::constrained_avg_density_oracle;
use eif_core::{presets, Settings};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn load(name: &str) -> RunConfig {
    RunConfig::load(&configs().join(name)).unwrap()
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let p = dir.join("run.toml");
    std::fs::write(&p, cfg.to_flat()).unwrap();
    p
}

fn eif(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eif")).args(args).output().unwrap()
}

fn run_cfg(cfg: &RunConfig, args: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let p = write_config(dir.path(), cfg);
    let mut all = vec!["--config", p.to_str().unwrap()];
    all.extend_from_slice(args);
    eif(&all)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Column `name` of a CSV with a header row.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

fn num_column(csv: &str, name: &str) -> Vec<f64> {
    column(csv, name).iter().map(|v| v.parse().unwrap()).collect()
}

#[test]
fn point_example1() {
    let o = run_cfg(&load("example1.toml"), &["point"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = num_column(&stdout(&o), "value")[0];
    assert!((v / -0.963 - 1.0).abs() < 5e-3, "{v}");
    assert_eq!(column(&stdout(&o), "stable_path"), ["true"]);
}

#[test]
fn missing_model_names_the_key() {
    let mut cfg = load("example1.toml");
    cfg.model = None;
    let o = run_cfg(&cfg, &["point"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("model.kind"), "{}", stderr(&o));
}

#[test]
fn zero_epsilon_is_a_config_error() {
    let mut cfg = load("example1.toml");
    cfg.perturbation.epsilon = Some(0.0);
    assert_eq!(run_cfg(&cfg, &["point"]).status.code(), Some(1));
}

#[test]
fn wrong_point_dimension_is_a_config_error() {
    let mut cfg = load("example2.toml");
    cfg.point.x = Some(vec![0.0, 1.0]);
    assert_eq!(run_cfg(&cfg, &["point"]).status.code(), Some(1));
}

#[test]
fn infeasible_projection_is_numerical() {
    let mut cfg = load("example1.toml");
    cfg.model.as_mut().unwrap().mu = Some(0.9);
    assert_eq!(run_cfg(&cfg, &["point"]).status.code(), Some(2));
}

#[test]
fn unknown_key_and_bad_syntax() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["model.kindd = \"markov\"", "model.kind = ", "demo.seed = -3"] {
        let p = dir.path().join("bad.toml");
        std::fs::write(&p, text).unwrap();
        assert_eq!(eif(&["--config", p.to_str().unwrap(), "point"]).status.code(), Some(1), "{text}");
    }
}

#[test]
fn one_by_one_grid_has_no_consensus() {
    let mut cfg = load("example1.toml");
    cfg.grid.epsilons = Some(vec![1e-6]);
    cfg.grid.lambdas = Some(vec![1e-2]);
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run_cfg(&cfg, &["grid", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let g = std::fs::read_to_string(&out).unwrap();
    assert_eq!(g.lines().count(), 2);
    let s = std::fs::read_to_string(dir.path().join("g.plateau.csv")).unwrap();
    assert_eq!(column(&s, "consensus"), [""]);
    assert_eq!(column(&s, "cell_count"), ["0"]);
}

#[test]
fn grid_rows_are_lambda_major_descending() {
    let mut cfg = load("example1.toml");
    cfg.grid.epsilons = Some(vec![1e-4, 1e-6]);
    cfg.grid.lambdas = Some(vec![1e-1, 1e-2, 1e-3]);
    let o = run_cfg(&cfg, &["grid"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert_eq!(num_column(&csv, "lambda"), [1e-1, 1e-1, 1e-2, 1e-2, 1e-3, 1e-3]);
    assert_eq!(num_column(&csv, "epsilon"), [1e-4, 1e-6, 1e-4, 1e-6, 1e-4, 1e-6]);
    assert!(stderr(&o).contains("consensus"));
}

#[test]
fn ascending_grid_is_rejected() {
    let mut cfg = load("example1.toml");
    cfg.grid.epsilons = Some(vec![1e-6, 1e-4]);
    assert_eq!(run_cfg(&cfg, &["grid"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_fails() {
    let o = run_cfg(&load("example1.toml"), &["point", "--out", "/nonexistent-dir/x/out.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn onestep_single_observation_matches_point() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("one.csv");
    std::fs::write(&data, "0.6\n").unwrap();
    let cfg = load("example1.toml");
    let o = run_cfg(&cfg, &["onestep", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let p = run_cfg(&cfg, &["point"]);
    assert_eq!(num_column(&stdout(&o), "correction")[0], num_column(&stdout(&p), "value")[0]);
    assert_eq!(column(&stdout(&o), "n"), ["1"]);
}

#[test]
fn onestep_demo_sample_tracks_oracle_correction() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("demo.csv");
    let mut cfg = load("example1.toml");
    let o = run_cfg(&cfg, &["demo-data", "--out", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    // The oracle average nearly cancels, so a small lambda and epsilon keep
    // the bias of the smoothed correction well under the 1% budget.
    cfg.perturbation.lambda = Some(1e-3);
    cfg.perturbation.epsilon = Some(1e-8);
    let o = run_cfg(&cfg, &["onestep", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let est = num_column(&stdout(&o), "estimate")[0];
    let plug = num_column(&stdout(&o), "plug_in")[0];

    let rows = eif::commands::read_data(&data, 1).unwrap();
    assert_eq!(rows.len(), 50);
    let quad = Settings::default().quadrature;
    let oracle = constrained_avg_density_oracle(&presets::beta_3_5(), presets::BETA_MU, &quad).unwrap();
    let mean: f64 = rows.iter().map(|r| oracle.evaluate(r)).sum::<f64>() / rows.len() as f64;
    let target = plug + mean;
    assert!((est / target - 1.0).abs() < 0.01, "{est} vs {target}");
}

#[test]
fn onestep_bad_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = load("example1.toml");
    let data = dir.path().join("bad.csv");
    std::fs::write(&data, "0.2\n0.3\nabc\n").unwrap();
    let o = run_cfg(&cfg, &["onestep", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));

    std::fs::write(&data, "0.2\n0.3,0.4\n").unwrap();
    let o = run_cfg(&cfg, &["onestep", "--data", data.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 2"), "{}", stderr(&o));

    std::fs::write(&data, "").unwrap();
    assert_eq!(run_cfg(&cfg, &["onestep", "--data", data.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn validate_example1() {
    let o = run_cfg(&load("example1.toml"), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(num_column(&stdout(&o), "rel_error")[0] <= 1e-3);
}

#[test]
fn validate_tilt_gives_centered_identity() {
    let o = run_cfg(&load("tilt.toml"), &["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    for (k, v) in num_column(&csv, "engine_value").iter().enumerate() {
        assert!((v - (k as f64 - 2.0)).abs() < 1e-6, "{k}: {v}");
    }
}

#[test]
fn validate_without_oracle_fails() {
    let mut cfg = load("tilt.toml");
    cfg.model.as_mut().unwrap().kind = Some("nonparametric".into());
    let o = run_cfg(&cfg, &["validate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no oracle"));
}

#[test]
fn diagnose_example1_slope() {
    let o = run_cfg(&load("example1.toml"), &["diagnose"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let (eps, lam, r) = (num_column(&csv, "epsilon"), num_column(&csv, "lambda"), num_column(&csv, "R"));
    for l in [1e-1, 1e-2] {
        let pts: Vec<(f64, f64)> = (0..eps.len()).filter(|&k| lam[k] == l).map(|k| (eps[k], r[k])).collect();
        let s = eif_core::diagnostics::loglog_slope(&pts);
        assert!((s - 2.0).abs() <= 0.2, "lambda {l}: slope {s}");
    }
}

#[test]
fn demo_data_is_reproducible() {
    let cfg = load("example2.toml");
    let a = run_cfg(&cfg, &["demo-data"]);
    let b = run_cfg(&cfg, &["demo-data"]);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 200);
    let c = run_cfg(&cfg, &["demo-data", "--seed", "8"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn demo_data_needs_a_seed() {
    let mut cfg = load("example1.toml");
    cfg.demo.seed = None;
    assert_eq!(run_cfg(&cfg, &["demo-data"]).status.code(), Some(1));
    let big = (i64::MAX as u64 + 1).to_string();
    assert_eq!(run_cfg(&cfg, &["demo-data", "--seed", &big]).status.code(), Some(1));
}

#[test]
fn print_config_round_trips() {
    for name in ["example1.toml", "example2.toml", "toy.toml", "tilt.toml"] {
        let o = eif(&["--config", configs().join(name).to_str().unwrap(), "--print-config"]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(RunConfig::parse(&stdout(&o)).unwrap(), load(name), "{name}");
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let cfg = load("example1.toml");
    for cmd in ["point", "validate", "diagnose"] {
        assert_eq!(run_cfg(&cfg, &[cmd]).stdout, run_cfg(&cfg, &[cmd]).stdout, "{cmd}");
    }
}
