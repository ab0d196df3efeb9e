use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn fpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpoly")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    fpoly(&args)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn simulate_config() -> Value {
    json!({
        "model": {"kind": "m_dependent_gaussian_ma", "m": 1, "marginal": {"name": "triangular"}},
        "region": {"rectangle": [7, 5]},
        "seed": 12
    })
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

#[test]
fn simulate_writes_one_row_per_site() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sim.json", &simulate_config());
    let o = run("simulate", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(text.lines().count(), 35 + 1);
    assert_eq!(text.lines().next().unwrap(), "i1,i2,value");
    assert!(csv_column(&text, 2).iter().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn simulate_reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sim.json", &simulate_config());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(run("simulate", &cfg, &a, &[]).status.success());
    assert!(run("simulate", &cfg, &b, &["--threads", "3"]).status.success());
    assert_eq!(fs::read(a.join("field.csv")).unwrap(), fs::read(b.join("field.csv")).unwrap());
}

#[test]
fn missing_marginal_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = simulate_config();
    cfg["model"].as_object_mut().unwrap().remove("marginal");
    let path = write_config(dir.path(), "sim.json", &cfg);
    let out = dir.path().join("out");
    let o = run("simulate", &path, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("marginal"), "{}", stderr(&o));
    assert!(!out.join("field.csv").exists());
}

#[test]
fn override_paths_are_named_in_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "sim.json", &simulate_config());
    let o = run("simulate", &cfg, dir.path(), &["--set", "model.marginal.name=cauchy"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.marginal"), "{}", stderr(&o));
    let o = run("simulate", &cfg, dir.path(), &["--set", "model.m=0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unreadable_config_and_unwritable_output_are_io_errors() {
    let dir = TempDir::new().unwrap();
    let o = run("simulate", &dir.path().join("nope.json"), dir.path(), &[]);
    assert_eq!(o.status.code(), Some(3));
    let cfg = write_config(dir.path(), "sim.json", &simulate_config());
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run("simulate", &cfg, &blocker.join("sub"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

fn estimate_setup(data: &str, extra: Value) -> (TempDir, PathBuf) {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("obs.csv"), data).unwrap();
    let mut cfg = json!({"input": "obs.csv", "bin_width": 0.1});
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = write_config(dir.path(), "est.json", &cfg);
    (dir, path)
}

#[test]
fn estimate_reproduces_the_hand_example() {
    let (dir, cfg) = estimate_setup("value\n0.02\n0.06\n0.13\n0.27\n", json!({}));
    let o = run("estimate", &cfg, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let hist = fs::read_to_string(dir.path().join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().next().unwrap(), "k,left_edge,count,histogram_height");
    assert_eq!(csv_column(&hist, 2), vec![2.0, 1.0, 1.0]);
    let poly = fs::read_to_string(dir.path().join("polygon.csv")).unwrap();
    let xs = csv_column(&poly, 0);
    let fp = csv_column(&poly, 1);
    let i = xs.iter().position(|&x| x == 0.1).expect("grid contains x = 0.1");
    assert!((fp[i] - 3.75).abs() < 1e-12, "{}", fp[i]);
    assert!(xs[0] <= 0.02 - 0.1 && *xs.last().unwrap() >= 0.27 + 0.1);
}

#[test]
fn single_observation_polygon_integrates_to_one() {
    let (dir, cfg) = estimate_setup("0.537\n", json!({"points_per_bin": 40}));
    assert!(run("estimate", &cfg, dir.path(), &[]).status.success());
    let poly = fs::read_to_string(dir.path().join("polygon.csv")).unwrap();
    let xs = csv_column(&poly, 0);
    let fp = csv_column(&poly, 1);
    let integral: f64 = xs.windows(2).zip(fp.windows(2)).map(|(x, f)| (x[1] - x[0]) * (f[0] + f[1]) / 2.0).sum();
    assert!((integral - 1.0).abs() < 1e-9, "{integral}");
}

#[test]
fn estimate_input_errors() {
    let (dir, cfg) = estimate_setup("0.1\n0.2\nabc\n0.4\n", json!({}));
    let o = run("estimate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert!(!dir.path().join("histogram.csv").exists());

    let (dir, cfg) = estimate_setup("", json!({}));
    assert_eq!(run("estimate", &cfg, dir.path(), &[]).status.code(), Some(2));

    let (dir, cfg) = estimate_setup("0.1\n", json!({"normalized": true}));
    let o = run("estimate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulation mode required"), "{}", stderr(&o));

    let (dir, cfg) = estimate_setup("0.1\n", json!({"input": "missing.csv"}));
    assert_eq!(run("estimate", &cfg, dir.path(), &[]).status.code(), Some(3));
}

#[test]
fn estimate_simulation_mode_adds_normalized_column() {
    let (dir, cfg) = estimate_setup(
        "0.02\n0.06\n0.13\n0.27\n",
        json!({"normalized": true, "density": {"name": "uniform"}}),
    );
    assert!(run("estimate", &cfg, dir.path(), &[]).status.success());
    let poly = fs::read_to_string(dir.path().join("polygon.csv")).unwrap();
    assert_eq!(poly.lines().next().unwrap(), "x,fp_value,fn_value");
    let row = poly.lines().find(|l| l.starts_with("0.1,")).unwrap();
    let f_n: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
    assert!((f_n - 3.75 / 0.5f64.sqrt()).abs() < 1e-12);
}

fn small_experiment() -> Value {
    json!({
        "model": {"kind": "iid", "marginal": {"name": "uniform"}},
        "region": {"rectangle": [16, 16]},
        "bin_width": 0.0625,
        "eval_points": [0.3, 0.7],
        "replicates": 50,
        "master_seed": 4
    })
}

#[test]
fn experiment_writes_report_and_statistics() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "exp.json", &small_experiment());
    let o = run("clt", &cfg, dir.path(), &["--set", "plot_grid=true"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["replicates"], 50);
    assert_eq!(report["report"]["hypothesis"]["holds"], true);
    let stats = fs::read_to_string(dir.path().join("statistics.csv")).unwrap();
    assert_eq!(stats.lines().count(), 51);
    assert!(dir.path().join("grid.csv").exists());
}

#[test]
fn failed_checks_exit_4_only_under_assert() {
    let dir = TempDir::new().unwrap();
    // scaled variance near 1.19 here, outside the band at R = 5000
    let cfg = json!({
        "model": {"kind": "m_dependent_gaussian_ma", "m": 1, "marginal": {"name": "normal"}},
        "region": {"rectangle": [16, 16]},
        "bin_width": 0.5,
        "eval_points": [0.25],
        "replicates": 5000,
        "master_seed": 4
    });
    let path = write_config(dir.path(), "exp.json", &cfg);
    let o = run("variance", &path, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("check failed"));
    assert_eq!(run("variance", &path, dir.path(), &["--assert"]).status.code(), Some(4));
    assert_eq!(run("clt", &path, dir.path(), &["--assert", "--set", "bin_width=0.0625"]).status.code(), Some(4));
}

#[test]
fn declared_divergent_mixing_is_refused() {
    let dir = TempDir::new().unwrap();
    let mut cfg = small_experiment();
    cfg["model"]["mixing"] = json!({"kind": "alpha", "tau": "inf", "decay": {"type": "polynomial", "theta": 4, "cap": 0.25}});
    let path = write_config(dir.path(), "exp.json", &cfg);
    let out = dir.path().join("out");
    let o = run("clt", &path, &out, &[]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
    assert!(!out.join("report.json").exists());
    let o = run("clt", &path, &out, &["--set", "override_hypotheses=true"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["report"]["hypothesis"]["holds"], false);
}

fn profile(decay: Value) -> Value {
    json!({"profile": {"kind": "alpha", "tau": "inf", "decay": decay}, "d": 2})
}

#[test]
fn check_hypotheses_reports_divergence() {
    let dir = TempDir::new().unwrap();
    let path = write_config(dir.path(), "h.json", &profile(json!({"type": "polynomial", "theta": 4})));
    let o = run("check-hypotheses", &path, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let h: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("hypotheses.json")).unwrap()).unwrap();
    assert!(h.to_string().contains("divergent"));
    assert_eq!(run("check-hypotheses", &path, dir.path(), &["--assert"]).status.code(), Some(4));

    let ok = write_config(dir.path(), "ok.json", &profile(json!({"type": "polynomial", "theta": 5})));
    assert_eq!(run("check-hypotheses", &ok, dir.path(), &["--assert"]).status.code(), Some(0));
}

#[test]
fn lemma_with_finite_range_has_zero_tail_column() {
    let dir = TempDir::new().unwrap();
    let mut cfg = profile(json!({"type": "finite_range", "m0": 2}));
    cfg["schedule"] = json!([1e-2, 1e-3, 1e-4]);
    let path = write_config(dir.path(), "l.json", &cfg);
    let o = run("lemma-mn", &path, dir.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("lemma1.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "tail_ratio").unwrap();
    assert_eq!(csv_column(&csv, col), vec![0.0; 3]);
}

#[test]
fn help_lists_config_keys() {
    let keys: &[(&str, &[&str])] = &[
        ("simulate", &["model.kind", "model.marginal", "region", "seed", "replicate"]),
        ("estimate", &["input", "bin_width", "points_per_bin", "normalized", "density"]),
        ("variance", &["eval_points", "replicates", "master_seed", "override_hypotheses", "plot_grid"]),
        ("clt", &["eval_points", "replicates", "master_seed", "bin_width"]),
        ("sweep", &["gamma", "sides"]),
        ("lemma-mn", &["profile.kind", "profile.tau", "profile.decay", "schedule", "rule"]),
        ("check-hypotheses", &["profile.kind", "conditions", "d"]),
    ];
    for (sub, want) in keys {
        let o = fpoly(&[sub, "--help"]);
        let text = String::from_utf8_lossy(&o.stdout);
        for k in *want {
            assert!(text.contains(k), "{sub} --help lacks {k}");
        }
        assert!(text.contains("Exit codes"));
    }
}
