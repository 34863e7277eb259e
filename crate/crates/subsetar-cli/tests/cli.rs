//! End-to-end tests of the command-line interface, driving the built
//! binary against temporary series files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subsetar"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_file(dir: &Path, name: &str, contents: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn simulated_series(dir: &Path, name: &str, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = run(&[
        "simulate",
        "--lags",
        "1,4",
        "--zeta",
        "0.5,0.3",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    path
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulated_series(dir.path(), "a.txt", 300, 7);
    let b = simulated_series(dir.path(), "b.txt", 300, 7);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = simulated_series(dir.path(), "c.txt", 300, 8);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn simulate_rejects_boundary_zeta() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "simulate",
        "--lags",
        "1",
        "--zeta",
        "0.999999999",
        "--n",
        "100",
        "--seed",
        "1",
        "--out",
        dir.path().join("x.txt").to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("error[E_NUMERIC]"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn fit_runs_and_reports_small_estimate_on_white_noise() {
    let dir = tempfile::tempdir().unwrap();
    // zeta = 0 at lag 1 gives white noise
    let path = dir.path().join("wn.txt");
    let out = run(&[
        "simulate",
        "--lags",
        "1",
        "--zeta",
        "0",
        "--n",
        "900",
        "--seed",
        "3",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let report = dir.path().join("fit.json");
    let out = run(&[
        "fit",
        path.to_str().unwrap(),
        "--lags",
        "1",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let zeta = doc["results"]["zeta"][0].as_f64().unwrap();
    assert!(zeta.abs() < 3.0 / (900f64).sqrt(), "zeta {zeta}");
    assert_eq!(doc["command"], "fit");
    assert!(doc["input"]["sha256"].as_str().unwrap().len() == 64);
}

#[test]
fn fit_rejects_malformed_lag_list() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 100, 1);
    let out = run(&["fit", path.to_str().unwrap(), "--lags", "1,,7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[E_USAGE]"), "{}", stderr(&out));
}

#[test]
fn pacf_writes_tsv_and_rejects_zero_lags() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 400, 5);
    let tsv = dir.path().join("pacf.tsv");
    let out = run(&[
        "pacf",
        path.to_str().unwrap(),
        "--lags",
        "10",
        "--out",
        tsv.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = std::fs::read_to_string(&tsv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lag\tvalue\tlo\thi");
    assert_eq!(lines.count(), 10);

    let out = run(&["pacf", path.to_str().unwrap(), "--lags", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[E_USAGE]"));
}

#[test]
fn pacf_yule_walker_method() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 600, 6);
    let out = run(&[
        "pacf",
        path.to_str().unwrap(),
        "--lags",
        "6",
        "--method",
        "yw",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("yule-walker"));
}

#[test]
fn pacf_fails_cleanly_on_constant_series() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "const.txt", "5.0\n5.0\n5.0\n5.0\n5.0\n5.0\n");
    let out = run(&["pacf", path.to_str().unwrap(), "--lags", "2"]);
    assert!(!out.status.success());
    assert!(
        stderr(&out).contains("error[E_NUMERIC]"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn select_rejects_max_params_above_max_order() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 200, 9);
    let out = run(&[
        "select",
        path.to_str().unwrap(),
        "--max-order",
        "5",
        "--max-params",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[E_USAGE]"));
}

#[test]
fn select_finds_generating_lags() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 2500, 11);
    let out = run(&[
        "select",
        path.to_str().unwrap(),
        "--max-order",
        "10",
        "--max-params",
        "5",
        "--top",
        "3",
        "--exact",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("(1,4)"), "{text}");
}

#[test]
fn diagnose_requires_df() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 300, 13);
    let out = run(&[
        "diagnose",
        path.to_str().unwrap(),
        "--lags",
        "1,4",
        "--acf-lags",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("degrees of freedom"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn forecast_split_beyond_series_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 120, 15);
    let out = run(&[
        "forecast",
        path.to_str().unwrap(),
        "--lags",
        "1",
        "--split",
        "130",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("error[E_USAGE]"));
}

#[test]
fn forecast_requires_split_or_horizon() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 120, 15);
    let out = run(&["forecast", path.to_str().unwrap(), "--lags", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_error_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(dir.path(), "bad.txt", "1.5\n2.5\nnot-a-number\n4.0\n");
    let out = run(&["fit", path.to_str().unwrap(), "--lags", "1"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(
        err.contains("error[E_PARSE]") && err.contains(":3:"),
        "{err}"
    );
}

#[test]
fn header_line_and_crlf_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_file(
        dir.path(),
        "crlf.txt",
        "value\r\n1.2\r\n2.7\r\n3.1\r\n1.9\r\n0.8\r\n2.2\r\n3.4\r\n2.1\r\n1.4\r\n2.3\r\n2.9\r\n1.7\r\n",
    );
    let out = run(&["pacf", path.to_str().unwrap(), "--lags", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("n = 12"));
}

#[test]
fn run_reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 400, 21);
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for r in [&r1, &r2] {
        let out = run(&[
            "select",
            path.to_str().unwrap(),
            "--max-order",
            "8",
            "--max-params",
            "4",
            "--top",
            "3",
            "--exact",
            "--out",
            r.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    assert_eq!(std::fs::read(&r1).unwrap(), std::fs::read(&r2).unwrap());
}

#[test]
fn thread_cap_env_var_is_respected() {
    let dir = tempfile::tempdir().unwrap();
    let path = simulated_series(dir.path(), "s.txt", 400, 23);
    let out = bin()
        .env("SUBSETAR_THREADS", "1")
        .args([
            "select",
            path.to_str().unwrap(),
            "--max-order",
            "6",
            "--max-params",
            "3",
            "--top",
            "2",
            "--exact",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn series_a_reproductions_when_data_present() {
    // Runs only when the bundled dataset is available.
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/seriesA.txt");
    if !data.exists() {
        eprintln!("skipping: data/seriesA.txt not present");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("select.json");
    let out = run(&[
        "select",
        data.to_str().unwrap(),
        "--max-order",
        "20",
        "--max-params",
        "10",
        "--top",
        "5",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    let first = &doc["results"]["candidates"][0];
    assert_eq!(first["lags"], serde_json::json!([1, 2, 7]));
    let score = first["score"].as_f64().unwrap();
    assert!((score + 82.2).abs() < 0.3, "score {score}");

    let out = run(&["fit", data.to_str().unwrap(), "--lags", "1,2,7"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("loglik    229.4"), "{}", stdout(&out));

    // identification plot: lags 1, 2 and 7 stand outside the limits
    let tsv = dir.path().join("pacf.tsv");
    let out = run(&[
        "pacf",
        data.to_str().unwrap(),
        "--lags",
        "20",
        "--out",
        tsv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&tsv).unwrap();
    for line in text.lines().skip(1) {
        let cells: Vec<f64> = line.split('\t').map(|c| c.parse().unwrap()).collect();
        let (lag, _value, lo, hi) = (cells[0] as usize, cells[1], cells[2], cells[3]);
        let significant = lo > 0.0 || hi < 0.0;
        if [1, 2, 7].contains(&lag) {
            assert!(significant, "lag {lag} should stand out: {line}");
        }
    }
}
