//! End-to-end checks of the command-line surface: flags, exit codes, and the
//! CSV file contracts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mmimo-sim"))
}

fn scratch_dir(label: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mmimo_cli_{label}_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn mmimo-sim");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn data_rows(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1) // column header
        .map(|l| l.to_string())
        .collect()
}

#[test]
fn samples_csv_row_count_contract() {
    let dir = scratch_dir("rows");
    let stem = dir.join("run");
    run_ok(&[
        "simulate",
        "--morphology",
        "urban",
        "--deployment",
        "cellfree",
        "--decoder",
        "zf",
        "--M",
        "70",
        "--power",
        "both",
        "--seed",
        "3",
        "--n-largescale",
        "1",
        "--n-smallscale",
        "8",
        "--out",
        stem.to_str().unwrap(),
    ]);
    // One realization, K=18 users, two power modes.
    let rows = data_rows(&dir.join("run_samples.csv"));
    assert_eq!(rows.len(), 18 * 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn identical_seeds_give_byte_identical_outputs() {
    let dir = scratch_dir("repeat");
    let args = |stem: &Path| {
        vec![
            "simulate".to_string(),
            "--morphology".into(),
            "suburban".into(),
            "--deployment".into(),
            "cellfree".into(),
            "--decoder".into(),
            "mr".into(),
            "--M".into(),
            "40".into(),
            "--power".into(),
            "both".into(),
            "--seed".into(),
            "11".into(),
            "--n-largescale".into(),
            "5".into(),
            "--out".into(),
            stem.to_string_lossy().into_owned(),
        ]
    };
    let a = dir.join("a");
    let b = dir.join("b");
    run_ok(&args(&a).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    run_ok(&args(&b).iter().map(|s| s.as_str()).collect::<Vec<_>>());
    for suffix in ["samples.csv", "summary.csv"] {
        let fa = std::fs::read(dir.join(format!("a_{suffix}"))).unwrap();
        let fb = std::fs::read(dir.join(format!("b_{suffix}"))).unwrap();
        assert_eq!(fa, fb, "{suffix} differs between identical runs");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn summary_recomputable_from_samples() {
    let dir = scratch_dir("roundtrip");
    let stem = dir.join("rt");
    run_ok(&[
        "simulate",
        "--morphology",
        "urban",
        "--deployment",
        "cellfree",
        "--decoder",
        "zf",
        "--M",
        "30",
        "--K",
        "6",
        "--power",
        "both",
        "--seed",
        "21",
        "--n-largescale",
        "40",
        "--n-smallscale",
        "12",
        "--out",
        stem.to_str().unwrap(),
    ]);

    // Pool the SE column per (config, power) from the samples file.
    let mut pools: std::collections::BTreeMap<(String, String), Vec<f64>> = Default::default();
    for row in data_rows(&dir.join("rt_samples.csv")) {
        let fields: Vec<&str> = row.split(',').collect();
        let key = (fields[2].to_string(), fields[3].to_string());
        pools
            .entry(key)
            .or_default()
            .push(fields[5].parse().unwrap());
    }
    for pool in pools.values_mut() {
        pool.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    }

    // Every summary row must match the rank-based percentile of its pool.
    let summary_rows = data_rows(&dir.join("rt_summary.csv"));
    assert!(!summary_rows.is_empty());
    for row in summary_rows {
        let fields: Vec<&str> = row.split(',').collect();
        let pool = &pools[&(fields[0].to_string(), fields[1].to_string())];
        let pct: f64 = fields[2].parse().unwrap();
        let se: f64 = fields[3].parse().unwrap();
        let rank = (pct / 100.0 * pool.len() as f64).ceil() as usize;
        let expected = pool[rank.clamp(1, pool.len()) - 1];
        assert_eq!(se, expected, "summary percentile mismatch");
        let n: usize = fields[5].parse().unwrap();
        assert_eq!(n, pool.len());
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cdf_is_a_step_function_per_sample() {
    let dir = scratch_dir("cdf");
    let stem = dir.join("c");
    run_ok(&[
        "cdf",
        "--morphology",
        "urban",
        "--deployment",
        "cellfree",
        "--decoder",
        "zf",
        "--M",
        "70",
        "--power",
        "full",
        "--seed",
        "5",
        "--n-largescale",
        "1",
        "--n-smallscale",
        "8",
        "--out",
        stem.to_str().unwrap(),
    ]);
    let rows = data_rows(&dir.join("c_cdf_full.csv"));
    assert_eq!(rows.len(), 18, "single realization gives 18 steps");
    let mut prev_se = f64::NEG_INFINITY;
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 2);
        let p: f64 = fields[0].parse().unwrap();
        let se: f64 = fields[1].parse().unwrap();
        assert!((p - (i + 1) as f64 / 18.0).abs() < 1e-12);
        assert!(se >= prev_se);
        prev_se = se;
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cf_mr_cdf_carries_bound_columns() {
    let dir = scratch_dir("cdfmr");
    let stem = dir.join("c");
    run_ok(&[
        "cdf",
        "--morphology",
        "urban",
        "--deployment",
        "cellfree",
        "--decoder",
        "mr",
        "--M",
        "24",
        "--K",
        "6",
        "--power",
        "both",
        "--seed",
        "5",
        "--n-largescale",
        "4",
        "--out",
        stem.to_str().unwrap(),
    ]);
    for power in ["full", "maxmin"] {
        let path = dir.join(format!("c_cdf_{power}.csv"));
        let text = std::fs::read_to_string(&path).unwrap();
        let header = text.lines().nth(1).unwrap();
        assert_eq!(
            header,
            "cumulative_probability,se_bps_hz,se_upper_bound,se_maxmin_bound"
        );
        for row in data_rows(&path) {
            let fields: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
            assert_eq!(fields.len(), 4);
            // Achieved SE sits below the per-sample cap at every quantile.
            assert!(fields[1] < fields[2]);
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_configs_exit_with_code_2() {
    // ZF needs M > K.
    let out = bin()
        .args([
            "simulate",
            "--morphology",
            "urban",
            "--deployment",
            "cellfree",
            "--decoder",
            "zf",
            "--M",
            "18",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("M > K"), "unhelpful message: {msg}");

    // Unknown morphology.
    let out = bin()
        .args(["simulate", "--morphology", "downtown", "--M", "70"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Malformed config file: the error must point at a line.
    let dir = scratch_dir("badcfg");
    let cfg = dir.join("bad.json");
    std::fs::write(&cfg, "{\n  \"morphology\": \"urban\",\n  \"m\": }\n").unwrap();
    let out = bin()
        .args(["simulate", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 3"), "no line reference: {msg}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_plus_flag_overrides() {
    let dir = scratch_dir("cfg");
    let cfg = dir.join("scenario.json");
    std::fs::write(
        &cfg,
        r#"{
  "morphology": "urban",
  "deployment": "cellfree",
  "decoder": "zf",
  "power": "full",
  "m": 70,
  "n_largescale": 2,
  "n_smallscale": 8,
  "seed": 7
}"#,
    )
    .unwrap();
    let stem = dir.join("r");
    run_ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "8",
        "--out",
        stem.to_str().unwrap(),
    ]);
    let summary = std::fs::read_to_string(dir.join("r_summary.csv")).unwrap();
    // The flag seed wins and is echoed in the header and the rows.
    assert!(summary.lines().next().unwrap().contains("seed=8"));
    for row in data_rows(&dir.join("r_summary.csv")) {
        assert!(row.ends_with(",8"));
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn reproduce_table_strict_exit_code_tracks_report() {
    // A deliberately tiny smoke run: the point is only that --strict turns
    // out-of-tolerance cells into exit code 3 and a clean report into 0.
    let dir = scratch_dir("table");
    let stem = dir.join("t");
    let out = bin()
        .args([
            "reproduce-table",
            "cellular",
            "--scale",
            "reduced",
            "--n-largescale",
            "2",
            "--seed",
            "1234",
            "--out",
            stem.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "non-strict mode always exits 0");
    let report = std::fs::read_to_string(dir.join("t_report.csv")).unwrap();
    let failures = report.matches("out_of_tolerance").count();

    let strict = bin()
        .args([
            "reproduce-table",
            "cellular",
            "--scale",
            "reduced",
            "--n-largescale",
            "2",
            "--seed",
            "1234",
        ])
        .arg("--strict")
        .output()
        .unwrap();
    let expected = if failures > 0 { 3 } else { 0 };
    assert_eq!(strict.status.code(), Some(expected));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_table_rejected() {
    let out = bin().args(["reproduce-table", "hexgrid"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
