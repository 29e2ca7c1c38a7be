//! End-to-end checks of the command-line surface: exit codes, JSON
//! schema, and seed-for-seed reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_randinfer"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn two_sample_json_schema_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(
        dir.path(),
        "two.csv",
        "y,group\n1.2,0\n0.8,0\n2.5,1\n3.1,1\n2.2,1\n0.4,0\n1.9,1\n0.2,0\n",
    );
    let args = [
        "test",
        "two-sample",
        "--studentize",
        "--input",
        &csv,
        "--cols",
        "y,group",
        "--alpha",
        "0.05",
        "--mc",
        "999",
        "--seed",
        "7",
    ];
    let out1 = run(&args);
    let out2 = run(&args);
    assert_eq!(
        out1.stdout, out2.stdout,
        "same seed must give identical bytes"
    );

    let v = stdout_json(&out1);
    for field in [
        "method",
        "statistic",
        "group",
        "mode",
        "m_or_b",
        "seed",
        "alpha",
        "t_obs",
        "p_value",
        "reject_nonrandomized",
        "a",
        "r_hat",
        "warnings",
        "config_echo",
        "version",
    ] {
        assert!(v.get(field).is_some(), "missing field {field}");
    }
    assert_eq!(v["mode"], "monte-carlo");
    assert_eq!(v["m_or_b"], 999);
    assert_eq!(v["seed"], 7);
    let p = v["p_value"].as_f64().unwrap();
    assert!(p > 0.0 && p <= 1.0);
}

#[test]
fn missing_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "two.csv", "y,group\n1,0\n2,1\n3,0\n4,1\n");
    let out = run(&["test", "two-sample", "--input", &csv, "--cols", "y,group"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn unknown_column_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "two.csv", "y,group\n1,0\n2,1\n");
    let out = run(&[
        "test",
        "two-sample",
        "--input",
        &csv,
        "--cols",
        "wat,group",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wat"));
}

#[test]
fn malformed_cell_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "bad.csv", "y\n1.0\nnot-a-number\n2.0\n");
    let out = run(&[
        "test",
        "one-sample",
        "--input",
        &csv,
        "--cols",
        "y",
        "--exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "missing line number in: {err}");
}

#[test]
fn one_sample_exact_small() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "one.csv", "y\n1.0\n2.0\n3.0\n");
    let v = stdout_json(&run(&[
        "test",
        "one-sample",
        "--input",
        &csv,
        "--cols",
        "y",
        "--exact",
    ]));
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["m_or_b"], 8);
    assert_eq!(v["p_value"], 0.25);
    assert_eq!(v["seed"], serde_json::Value::Null);
}

#[test]
fn wide_two_sample_layout() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "wide.csv", "a,b\n1.0,4.0\n2.0,5.0\n3.0,\n");
    let v = stdout_json(&run(&[
        "test",
        "two-sample",
        "--wide",
        "--input",
        &csv,
        "--cols",
        "a,b",
        "--exact",
    ]));
    // Three a-values and two b-values: the group has 5! elements.
    assert_eq!(v["m_or_b"], 120);
}

#[test]
fn trend_test_detects_monotone_series() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..12)
        .map(|i| format!("{}.0\n", i))
        .collect::<Vec<_>>()
        .join("");
    let csv = write_file(dir.path(), "trend.csv", &format!("y\n{rows}"));
    let v = stdout_json(&run(&[
        "test", "trend", "--input", &csv, "--cols", "y", "--mc", "400", "--seed", "3",
    ]));
    assert!(v["p_value"].as_f64().unwrap() < 0.05);
}

#[test]
fn hothand_requires_binary_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "hh.csv", "made\n1\n0\n2\n");
    let out = run(&[
        "test", "hothand", "--input", &csv, "--cols", "made", "--streak", "1", "--exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0/1"));
}

#[test]
fn conformal_split_zero_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let line: String = (0..10).map(|i| format!("{i}.0,{}.0\n", 2 * i)).collect();
    let train = write_file(dir.path(), "train.csv", &format!("x,y\n{line}"));
    let calib_rows: String = (0..5).map(|i| format!("{i}.5,{}.0\n", 2 * i + 1)).collect();
    let calib = write_file(dir.path(), "calib.csv", &format!("x,y\n{calib_rows}"));
    let v = stdout_json(&run(&[
        "conformal",
        "split",
        "--train",
        &train,
        "--calib",
        &calib,
        "--cols",
        "x,y",
        "--x",
        "1.5",
        "--alpha",
        "0.2",
    ]));
    let lower = v["result"]["lower"].as_f64().unwrap();
    let upper = v["result"]["upper"].as_f64().unwrap();
    // The calibration points lie on the fitted line exactly, so the
    // interval collapses onto the prediction 3.0.
    assert!((lower - 3.0).abs() < 1e-9, "lower = {lower}");
    assert!((upper - 3.0).abs() < 1e-9, "upper = {upper}");
}

#[test]
fn conformal_bound_order_statistic() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (1..=19).map(|i| format!("{i}.0\n")).collect();
    let csv = write_file(dir.path(), "vals.csv", &format!("y\n{rows}"));
    let v = stdout_json(&run(&[
        "conformal",
        "bound",
        "--input",
        &csv,
        "--cols",
        "y",
        "--alpha",
        "0.05",
    ]));
    assert_eq!(v["result"]["upper"], 19.0);
}

#[test]
fn cluster_art_degenerate_enumeration() {
    let dir = tempfile::tempdir().unwrap();
    // Four clusters of identical constant outcomes: every cluster mean is
    // 2, so all scores tie and only the two global flips match t_obs.
    let mut rows = String::new();
    for c in ["a", "b", "c", "d"] {
        for _ in 0..3 {
            rows.push_str(&format!("2.0,{c}\n"));
        }
    }
    let csv = write_file(dir.path(), "cl.csv", &format!("y,cluster\n{rows}"));
    let v = stdout_json(&run(&[
        "cluster",
        "art",
        "--input",
        &csv,
        "--cols",
        "y,cluster",
        "--coef",
        "0",
        "--exact",
    ]));
    assert_eq!(v["p_value"], 0.125);
    assert!(!v["warnings"].as_array().unwrap().is_empty());

    // The comparison t-test is undefined at zero spread and says so.
    let out = run(&[
        "cluster",
        "art",
        "--input",
        &csv,
        "--cols",
        "y,cluster",
        "--coef",
        "0",
        "--exact",
        "--compare-ttest",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zero spread"));
}

#[test]
fn cluster_art_with_ttest_comparison() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    for (c, base) in [("a", 1.0), ("b", 2.0), ("c", 1.5), ("d", 2.5)] {
        for i in 0..3 {
            rows.push_str(&format!("{},{c}\n", base + 0.1 * i as f64));
        }
    }
    let csv = write_file(dir.path(), "cl2.csv", &format!("y,cluster\n{rows}"));
    let v = stdout_json(&run(&[
        "cluster",
        "art",
        "--input",
        &csv,
        "--cols",
        "y,cluster",
        "--coef",
        "0",
        "--exact",
        "--compare-ttest",
    ]));
    assert!(
        v["config_echo"]["comparison_ttest"]["t_stat"]
            .as_f64()
            .unwrap()
            > 0.0
    );
}

#[test]
fn experiment_weak_reports_variance() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    let ys = [1.2, 0.9, 2.4, 2.0, 0.4, 0.7, 3.0, 3.3, 1.8, 1.5];
    for (i, y) in ys.iter().enumerate() {
        let pair = i / 2;
        let d = i % 2;
        rows.push_str(&format!("{y},{d},p{pair}\n"));
    }
    let csv = write_file(dir.path(), "pairs.csv", &format!("y,d,pair\n{rows}"));
    let v = stdout_json(&run(&[
        "experiment",
        "weak",
        "--input",
        &csv,
        "--cols",
        "y,d,pair",
        "--exact",
    ]));
    assert!(
        v["config_echo"]["variance_report"]["v_hat"]
            .as_f64()
            .unwrap()
            > 0.0
    );
    assert_eq!(v["m_or_b"], 32);
}

#[test]
fn experiment_strong_pairs_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    let ys = [1.2, 0.9, 2.4, 2.0, 0.4, 0.7, 3.0, 3.3];
    for (i, y) in ys.iter().enumerate() {
        rows.push_str(&format!("{y},{},{}\n", i % 2, i / 2));
    }
    let csv = write_file(dir.path(), "exp.csv", &format!("y,d,pair\n{rows}"));
    let v = stdout_json(&run(&[
        "experiment",
        "strong",
        "--scheme",
        "pairs",
        "--input",
        &csv,
        "--cols",
        "y,d,pair",
        "--exact",
    ]));
    assert_eq!(v["m_or_b"], 16);
    assert_eq!(v["group"], "pair-swap(4 pairs)");
}

#[test]
fn simlab_hothand_json_and_determinism() {
    let a = run(&[
        "simlab", "hothand", "--n", "60", "--streak", "2", "--b", "300", "--reps", "4", "--seed",
        "11",
    ]);
    let b = run(&[
        "simlab", "hothand", "--n", "60", "--streak", "2", "--b", "300", "--reps", "4", "--seed",
        "11",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let v = stdout_json(&a);
    assert!(v["mean_bias"].as_f64().unwrap() < 0.1);
}

#[test]
fn simlab_weaknull_emits_csv() {
    let out = run(&[
        "simlab", "weaknull", "--pairs", "12", "--reps", "100", "--b", "49", "--seed", "5",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("scenario,test,reps,rejections,rate,mc_se"));
    assert_eq!(text.lines().count(), 3, "two test rows expected:\n{text}");
}

#[test]
fn output_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write_file(dir.path(), "one.csv", "y\n0.4\n-1.0\n2.2\n0.3\n");
    let out_path = dir.path().join("result.json");
    let out = run(&[
        "test",
        "one-sample",
        "--input",
        &csv,
        "--cols",
        "y",
        "--mc",
        "200",
        "--seed",
        "42",
        "--output",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    // The artifact echoes everything needed to reproduce the run.
    assert_eq!(v["config_echo"]["opts"]["seed"], 42);
    assert_eq!(v["config_echo"]["opts"]["cols"], "y");
    assert_eq!(v["version"], randinfer::VERSION);
}

#[test]
fn k_sample_and_hotelling_paths() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    for g in 0..3 {
        for i in 0..5 {
            rows.push_str(&format!("{}.{i},g{g}\n", g + i));
        }
    }
    let csv = write_file(dir.path(), "k.csv", &format!("y,group\n{rows}"));
    let v = stdout_json(&run(&[
        "test", "k-sample", "--input", &csv, "--cols", "y,group", "--mc", "200", "--seed", "1",
    ]));
    assert_eq!(v["statistic"], "k-sample");

    let mut rows = String::new();
    for i in 0..12u64 {
        let g = i % 2;
        // Hashed second coordinate so the pooled covariance has full rank.
        let w = (i.wrapping_mul(2654435761) % 97) as f64 / 10.0;
        rows.push_str(&format!("{}.5,{w},{g}\n", i));
    }
    let csv = write_file(dir.path(), "h.csv", &format!("y1,y2,group\n{rows}"));
    let v = stdout_json(&run(&[
        "test",
        "hotelling",
        "--input",
        &csv,
        "--cols",
        "y1,y2,group",
        "--mc",
        "200",
        "--seed",
        "2",
    ]));
    assert_eq!(v["statistic"], "hotelling-studentized");
}

#[test]
fn autocorr_and_correlation_paths() {
    let dir = tempfile::tempdir().unwrap();
    // Xorshift noise so the observed plug-in long-run variance is positive.
    let mut state = 0x9e3779b97f4a7c15u64;
    let mut step = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state % 1000) as f64 / 1000.0
    };
    let rows: String = (0..40).map(|_| format!("{}\n", step())).collect();
    let csv = write_file(dir.path(), "ts.csv", &format!("y\n{rows}"));
    let v = stdout_json(&run(&[
        "test",
        "autocorr",
        "--input",
        &csv,
        "--cols",
        "y",
        "--lag",
        "1",
        "--studentize",
        "--mc",
        "300",
        "--seed",
        "4",
    ]));
    assert!(v["statistic"]
        .as_str()
        .unwrap()
        .contains("studentized-autocorr"));

    let rows: String = (0..25)
        .map(|i| format!("{},{}\n", i as f64 * 0.2, (i as f64 * 0.2) * 1.5 + 1.0))
        .collect();
    let csv = write_file(dir.path(), "corr.csv", &format!("x,y\n{rows}"));
    let v = stdout_json(&run(&[
        "test",
        "correlation",
        "--input",
        &csv,
        "--cols",
        "x,y",
        "--studentize",
        "--mc",
        "400",
        "--seed",
        "5",
    ]));
    assert!(
        v["p_value"].as_f64().unwrap() < 0.05,
        "exact linear relation must reject"
    );
}

#[test]
fn stratified_and_resampled_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows = String::new();
    for s in 0..2 {
        for i in 0..6 {
            let d = usize::from(i < 3);
            rows.push_str(&format!("{}.0,{d},s{s}\n", i + 10 * s));
        }
    }
    let csv = write_file(dir.path(), "strat.csv", &format!("y,d,stratum\n{rows}"));
    let v = stdout_json(&run(&[
        "experiment",
        "strong",
        "--scheme",
        "stratified",
        "--q",
        "0.5",
        "--input",
        &csv,
        "--cols",
        "y,d,stratum",
        "--mc",
        "150",
        "--seed",
        "6",
    ]));
    assert_eq!(v["group"], "stratified-permutation(2 strata)");

    let v = stdout_json(&run(&[
        "experiment",
        "strong",
        "--scheme",
        "complete",
        "--resample",
        "--input",
        &csv,
        "--cols",
        "y,d",
        "--mc",
        "150",
        "--seed",
        "7",
    ]));
    assert_eq!(v["method"], "experiment strong (resampled)");
}

#[test]
fn conformal_full_and_deviation_bound() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..15)
        .map(|i| format!("{},{}\n", i as f64 * 0.1, 2.0 + i as f64 * 0.1))
        .collect();
    let csv = write_file(dir.path(), "fc.csv", &format!("x,y\n{rows}"));
    let v = stdout_json(&run(&[
        "conformal",
        "full",
        "--input",
        &csv,
        "--cols",
        "x,y",
        "--x",
        "0.7",
        "--alpha",
        "0.2",
        "--grid",
        "0:5:101",
        "--predictor",
        "linear",
    ]));
    assert!(!v["result"]["intervals"].as_array().unwrap().is_empty());

    let rows: String = (0..20).map(|i| format!("{}\n", i as f64 * 0.3)).collect();
    let csv = write_file(dir.path(), "dev.csv", &format!("y\n{rows}"));
    let v = stdout_json(&run(&[
        "conformal",
        "bound",
        "--input",
        &csv,
        "--cols",
        "y",
        "--alpha",
        "0.2",
        "--score",
        "abs-median",
    ]));
    assert!(v["result"]["intervals"].as_array().is_some());
}

#[test]
fn cluster_blocks_mode() {
    let dir = tempfile::tempdir().unwrap();
    let rows: String = (0..40)
        .map(|i| format!("{}\n", 1.0 + (i as f64 * 1.3).sin() * 0.4))
        .collect();
    let csv = write_file(dir.path(), "ts.csv", &format!("y\n{rows}"));
    let v = stdout_json(&run(&[
        "cluster", "art", "--input", &csv, "--cols", "y", "--blocks", "5", "--coef", "0",
        "--theta0", "1.0", "--exact",
    ]));
    assert_eq!(v["group"], "cluster-sign-change(5)");
}

#[test]
fn simlab_figure2_small() {
    let out = run(&[
        "simlab", "figure2", "--n", "24", "--reps", "100", "--b", "49", "--seed", "3", "--format",
        "csv",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    // Header plus 6 scenarios x 2 tests.
    assert_eq!(text.lines().count(), 13, "{text}");
}
