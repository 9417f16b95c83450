use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_szego-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value_after(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.trim_start().starts_with(key)).expect("key present");
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn kernel_at_origin_of_ball() {
    let o = run(&["kernel", "--z", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value_after(&text, "S(z, w)") - 1.0 / std::f64::consts::PI.powi(2)).abs() < 1e-8);
    assert!((value_after(&text, "K(z, w)") - 2.0 / std::f64::consts::PI.powi(2)).abs() < 1e-8);

    let halved = stdout(&run(&["kernel", "--z", "0,0", "--cn", "2"]));
    assert!((value_after(&halved, "S(z, w)") - 0.5 / std::f64::consts::PI.powi(2)).abs() < 1e-8);
}

#[test]
fn metric_at_origin_of_ball() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["metric", "--z", "0,0", "--x", "1,0", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value_after(&text, "tau") - 2f64.sqrt()).abs() < 1e-7);
    assert!((value_after(&text, "g ") - 4.0).abs() < 1e-7);
    assert!((value_after(&text, "R ") + 1.0).abs() < 1e-7);
    let csv = std::fs::read_to_string(dir.path().join("metric.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("z,X,tau,g,beta,R,Ric,tail_bound"));
    assert_eq!(lines.next().unwrap().split(',').count(), 8);
}

fn assert_report_files(dir: &Path, stem: &str) {
    let csv = std::fs::read_to_string(dir.join(format!("{stem}.csv"))).unwrap();
    assert!(csv.starts_with("experiment,delta,value,tail_bound,L_hat,L_star,rel_err,provenance\n"));
    let json = std::fs::read_to_string(dir.join(format!("{stem}.json"))).unwrap();
    let summary = szego_lab::experiments::parse_summary(&json).unwrap();
    assert!(!summary.reports.is_empty());
}

#[test]
fn limits_on_ball_and_bumped_ball() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = run(&["limits", "--domain", "ball", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_report_files(dir.path(), "limits");

    let o = run(&["limits", "--domain", "bumped", "--epsilon", "0.05", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("refused deltas"));
}

#[test]
fn unattainable_tolerance_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["limits", "--tol-limit", "1e-12", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn localize_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["localize", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_report_files(dir.path(), "localize");
    assert!(stdout(&o).contains("loc-e[X5]"));
}

#[test]
fn scale_sequences() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for domain in ["ball", "siegel", "bumped"] {
        let o = run(&["scale", "--domain", domain, "--out", out]);
        assert_eq!(o.status.code(), Some(0), "{domain}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = run(&["scale", "--deltas", "1e-2,1e-3", "--out", out]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("scale.csv")).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|f| f.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[1][3] < rows[0][3]);
    assert!(rows[1][4] < rows[0][4]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "domain = ball\ncn = 2\n").unwrap();
    let from_file = stdout(&run(&["kernel", "--config", cfg.to_str().unwrap(), "--z", "0,0"]));
    assert!((value_after(&from_file, "S(z, w)") - 0.5 / std::f64::consts::PI.powi(2)).abs() < 1e-8);
    let overridden = stdout(&run(&["kernel", "--config", cfg.to_str().unwrap(), "--cn", "1", "--z", "0,0"]));
    assert!((value_after(&overridden, "S(z, w)") - 1.0 / std::f64::consts::PI.powi(2)).abs() < 1e-8);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["bogus"],
        vec!["kernel", "--z", "1"],
        vec!["kernel", "--z", "0,0", "--degree", "3"],
        vec!["kernel", "--z", "0,0", "--cn", "-1"],
        vec!["kernel", "--z", "2,0"],
        vec!["kernel", "--domain", "siegel", "--z", "0,-1"],
        vec!["metric", "--z", "0,0", "--x", "0,0"],
        vec!["limits", "--deltas", "0.1,0.2"],
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn guard_violation_exits_with_three() {
    let o = run(&["metric", "--domain", "bumped", "--degree", "6", "--z", "0.95,0"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn thread_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_szego-lab"))
        .args(["kernel", "--z", "0,0"])
        .env("SZEGO_LAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_szego-lab"))
        .args(["kernel", "--z", "0,0"])
        .env("SZEGO_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}
