use std::path::Path;
use std::process::{Command, Output};

use hombridge_core::load_solution;

fn hombridge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hombridge")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn value_after<'a>(text: &'a str, key: &str) -> &'a str {
    let start = text.find(key).unwrap_or_else(|| panic!("`{key}` missing from {text}")) + key.len();
    text[start..].split_whitespace().next().unwrap()
}

#[test]
fn bound_examples() {
    let o = hombridge(&["bound", "--f", "max(u,-1)", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    let l: f64 = value_after(&stdout(&o), "L = ").parse().unwrap();
    assert!((l - 4.0).abs() < 1e-9);

    let o = hombridge(&["bound", "--builtin", "exponential", "--c", "1.0"]);
    let text = stdout(&o);
    let l: f64 = value_after(&text, "L = ").parse().unwrap();
    assert!((l - 3.9207).abs() < 1e-4);
    assert!(text.contains("threshold c^4/4 = 0.25") && text.contains("admissible = true"));
    assert!(text.contains("rho = 0.5 "));

    let o = hombridge(&["bound", "--f", "u", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("unbounded (Corollary regime: no nonzero homoclinic solutions expected)"));
}

#[test]
fn bound_errors() {
    let o = hombridge(&["bound", "--f", "u +", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("position 3"), "{}", stderr(&o));
    let o = hombridge(&["bound", "--f", "exp(u)-1", "--c", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hombridge(&["bound", "--f", "u", "--builtin", "piecewise", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hombridge(&["bound", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(hombridge(&["--help"]).status.code(), Some(0));
    assert_eq!(hombridge(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn solve_writes_a_verified_solution() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w13.json");
    let o = hombridge(&[
        "solve", "--f", "exp(u)-1", "--c", "1.3", "--T", "100", "--n", "4096", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let line = stdout(&o);
    assert!(line.starts_with("c=1.3 amplitude="), "{line}");
    assert!(line.contains("bound_ok=true") && line.contains("pass=true"));
    let file = load_solution(Path::new(&path)).unwrap();
    assert_eq!((file.c, file.half_length, file.n), (1.3, 100.0, 4096));
    assert!(file.diagnostics.overall_pass);
    let amp: f64 = value_after(&line, "amplitude=").parse().unwrap();
    assert_eq!(amp, file.amplitude);
}

#[test]
fn solve_outcomes() {
    let o = hombridge(&["solve", "--f", "u", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("collapsed to zero; consistent with Corollary"));
    let o = hombridge(&["solve", "--f", "exp(u)-1", "--c", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("inadmissible"));
    let o = hombridge(&["solve", "--f", "exp(u)-1", "--c", "1.3", "--n", "1000"]);
    assert_eq!(o.status.code(), Some(1));
    // Too short a domain for this speed: the wave converges but its tails
    // are cut off, so the diagnostics reject it.
    let o = hombridge(&["solve", "--f", "exp(u)-1", "--c", "1.3", "--T", "25", "--n", "1024"]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("pass=false"));
}

#[test]
fn sweep_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let o = hombridge(&[
        "sweep",
        "--f",
        "max(u,-1)",
        "--c-start",
        "1.3",
        "--c-end",
        "0.9",
        "--csv",
        csv.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "c,amplitude,lower_bound,residual_norm,sign_changes_left,sign_changes_right,bound_ok,overall_pass"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 17);
    for row in &rows {
        let c: f64 = row[0].parse().unwrap();
        let a: f64 = row[1].parse().unwrap();
        assert!(a >= 4.0 / c.powi(4));
        assert_eq!(row[6], "true");
        // 17 significant digits
        assert_eq!(row[1].split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
    }
    let plot = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(plot.matches("<polyline").count(), 2);
}

#[test]
fn sweep_to_stdout_and_errors() {
    let o = hombridge(&["sweep", "--f", "exp(u)-1", "--c-start", "1.35", "--c-end", "1.3", "--n", "4096"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);

    // default start 0.95·√2 ≈ 1.34, rounded down to 1.3
    let o = hombridge(&["sweep", "--builtin", "exponential", "--c-end", "1.25"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first_c: f64 = stdout(&o).lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(first_c, 1.3);

    let o = hombridge(&["sweep", "--f", "exp(u)-1", "--c-start", "0.8", "--c-end", "1.2"]);
    assert_eq!(o.status.code(), Some(1));
    let o = hombridge(&["sweep", "--f", "exp(u)-1", "--c-start", "1.5", "--c-end", "1.2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = hombridge(&["sweep", "--f", "u", "--c-start", "1.0", "--c-end", "0.9"]);
    assert_eq!(o.status.code(), Some(4));

    let o = Command::new(env!("CARGO_BIN_EXE_hombridge"))
        .args(["sweep", "--f", "exp(u)-1", "--c-start", "1.35", "--c-end", "1.3"])
        .env("HOMBRIDGE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn check_examples() {
    let o = hombridge(&["check", "--builtin", "piecewise", "--u-max", "100"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("heuristic"));
    let o = hombridge(&["check", "--f", "u - abs(u)*u", "--u-max", "10"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("FAIL (first violation at u = "));
    let o = hombridge(&["check", "--f", "u", "--c", "1.0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no nonzero homoclinic solutions expected"));
}
