use std::f64::consts::PI;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smallball")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Rows of a CSV table without its header.
fn rows(o: &Output) -> Vec<Vec<String>> {
    stdout(o).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn report_value(o: &Output, check: &str) -> (f64, String) {
    let row = rows(o).into_iter().find(|r| r[0] == check).unwrap_or_else(|| panic!("no row {check}"));
    (num(&row[1]), row.last().unwrap().clone())
}

#[test]
fn eigs_wiener_first_eigenvalue() {
    let o = run(&["eigs", "--process", "wiener", "--weight", "1", "-K", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().next(), Some("k,mu_shooting,mu_nystrom,rel_diff"));
    let r = rows(&o);
    assert_eq!(r.len(), 5);
    assert!((num(&r[0][1]) - PI * PI / 4.0).abs() < 1e-9);
}

#[test]
fn eigs_bridge_closed_form() {
    let o = run(&["eigs", "--process", "bridge", "-K", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for (k, r) in rows(&o).iter().enumerate() {
        let want = ((k + 1) as f64 * PI).powi(2);
        assert!((num(&r[1]) - want).abs() < 1e-9 * want, "{r:?}");
    }
}

#[test]
fn eigs_weighted_routes_agree() {
    let o = run(&["eigs", "--process", "wiener", "--weight", "(0.5+1.5*t)^(-4)", "-K", "20"]);
    assert!(o.status.success(), "{}", stderr(&o));
    for r in rows(&o) {
        assert!(num(&r[3]) < 1e-5, "{r:?}");
    }
}

#[test]
fn theta_reversed_weights() {
    let o = run(&["theta", "--process", "wiener", "--weight", "(0.5+1.5*t)^(-4)", "--weight", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (ratio, _) = report_value(&o, "ratio");
    let (product, _) = report_value(&o, "product");
    assert!((ratio - 2.0).abs() < 1e-12);
    assert!((product - 4.0).abs() < 1e-12);
}

#[test]
fn compare_ratio_two() {
    let o = run(&["compare", "--process", "wiener", "--weight", "(0.5+1.5*t)^(-4)", "--weight", "1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (ratio, _) = report_value(&o, "theta_ratio");
    let (product, status) = report_value(&o, "eigenvalue_product");
    assert!((ratio - 2.0).abs() < 1e-12);
    assert!((product - 4.0).abs() < 0.01);
    assert_eq!(status, "PASS");
}

#[test]
fn compare_identical_weights() {
    let o = run(&["compare", "--process", "wiener", "--weight", "exp(t)", "--weight", "exp(t)", "-K", "50"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (ratio, _) = report_value(&o, "theta_ratio");
    let (product, status) = report_value(&o, "eigenvalue_product");
    assert!((ratio - 1.0).abs() < 1e-12);
    assert!((product - 1.0).abs() < 1e-12);
    assert_eq!(status, "PASS");
}

#[test]
fn compare_normalization_mismatch_exits_4() {
    let o = run(&["compare", "--process", "wiener", "--weight", "1", "--weight", "16"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("different logarithmic asymptotics"), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
}

#[test]
fn asympt_wiener() {
    let o = run(&["asympt", "--process", "wiener", "-m", "0", "--eps", "0.1"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = num(&rows(&o)[0][1]);
    assert!((p / 8.41e-7 - 1.0).abs() < 1e-3, "{p}");
}

#[test]
fn prob_near_asympt() {
    let p = run(&["prob", "--process", "wiener", "--eps", "0.1", "-K", "500"]);
    let a = run(&["asympt", "--process", "wiener", "--eps", "0.1"]);
    assert!(p.status.success() && a.status.success());
    let (p, a) = (num(&rows(&p)[0][1]), num(&rows(&a)[0][1]));
    assert!((p / a - 1.0).abs() < 0.05, "{p} vs {a}");
}

#[test]
fn prob_marks_out_of_range_rows() {
    let o = run(&["prob", "--process", "wiener", "-K", "20", "--eps", "0.1,3e-4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = rows(&o);
    assert!(num(&r[0][1]) > 0.0);
    assert!(r[1][1..].iter().all(String::is_empty), "{r:?}");
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn validate_matern_one_is_ou() {
    let o = run(&["validate", "--process", "matern", "-n", "1", "-K", "60", "-N", "20000"]);
    let (_, status) = report_value(&o, "Matern(1) == OU spectrum");
    assert_eq!(status, "PASS");
}

#[test]
fn validate_wiener_passes() {
    let o = run(&["validate", "--process", "wiener", "-K", "100", "-N", "20000"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    assert!(rows(&o).iter().all(|r| r.last().unwrap() == "PASS"));
}

#[test]
fn validate_skips_weighted_centered_asymptotics() {
    let o = run(&["validate", "--process", "bridge", "--center-last", "--weight", "exp(t)", "--normalize", "-K", "40", "-N", "20000"]);
    let row = rows(&o).into_iter().find(|r| r[0] == "asymptotic formula").expect("asymptotic row");
    assert!(row.last().unwrap().starts_with("SKIP"));
}

#[test]
fn parse_errors_exit_2() {
    for args in [
        &["eigs", "--process", "brownian"][..],
        &["eigs"][..],
        &["asympt", "--process", "wiener", "--eps", "-0.1"][..],
        &["eigs", "--process", "wiener", "--weight", "1+"][..],
        &["eigs", "--process", "wiener", "-m", "2", "--betas", "1"][..],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn json_carries_provenance() {
    let o = run(&["eigs", "--process", "bridge", "-K", "3", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["command"], "eigs");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v["method"].is_string());
    assert!(v["tolerances"].is_object());
    assert_eq!(v["config"]["count"], 3);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["columns"][0], "k");
}

#[test]
fn output_is_deterministic() {
    let args = ["mc", "--process", "ou", "--eps", "0.3,0.2", "-N", "5000", "--seed", "7", "-K", "30", "--format", "json"];
    let (a, b) = (run(&args), run(&args));
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let other = run(&["mc", "--process", "ou", "--eps", "0.3,0.2", "-N", "5000", "--seed", "8", "-K", "30", "--format", "json"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn output_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("smallball-{}.csv", std::process::id()));
    let args = ["asympt", "--process", "ou", "--eps-start", "0.3", "--eps-stop", "0.05", "--eps-count", "4", "--log"];
    let to_file = run(&[&args[..], &["-o", path.to_str().unwrap()]].concat());
    assert!(to_file.status.success(), "{}", stderr(&to_file));
    assert!(to_file.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, run(&args).stdout);
    let eps: Vec<f64> = rows(&run(&args)).iter().map(|r| num(&r[0])).collect();
    assert_eq!(eps.len(), 4);
    assert!(eps.windows(2).all(|w| w[0] > w[1]));
}
