use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn levelforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_levelforge"))
        .args(args)
        .env_remove("LEVELFORGE_SEED")
        .output()
        .expect("binary runs")
}

fn solve_in(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["solve", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    levelforge(&args)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn solve_writes_trace_and_summary() {
    let tmp = TempDir::new().unwrap();
    let out = solve_in(tmp.path(), &["--m", "20", "--n", "40", "--eps", "1e-4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("phase,iter,lb,ub,gap,fxu,oracle_calls,ns"));
    let s = summary(tmp.path());
    assert_eq!(s["status"], "converged");
    assert_eq!(s["solver"], "fapl");
    assert!(s["gap"].as_f64().unwrap() <= 1e-4);
    assert_eq!(s["iterations"].as_u64().unwrap() as usize, trace.lines().count() - 2);
}

#[test]
fn unknown_bound_loses_to_zero_bound() {
    let tmp = TempDir::new().unwrap();
    let iters = |lb: &str| {
        let dir = tmp.path().join(lb);
        let out = solve_in(&dir, &["--m", "100", "--n", "200", "--dist", "gaussian", "--lb", lb]);
        assert_eq!(out.status.code(), Some(0));
        summary(&dir)["iterations"].as_u64().unwrap()
    };
    let zero = iters("zero");
    let free = iters("minus-infinity");
    assert!(free > zero, "minus-infinity {free} vs zero {zero}");
}

#[test]
fn traces_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let read = |name: &str| {
        let dir = tmp.path().join(name);
        let out = solve_in(&dir, &["--m", "30", "--n", "60", "--eps", "1e-5", "--seed", "4"]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(dir.join("trace.csv")).unwrap()
    };
    assert_eq!(read("a"), read("b"));
}

#[test]
fn sequential_flag_reproduces_parallel_trace() {
    let tmp = TempDir::new().unwrap();
    let read = |name: &str, extra: &[&str]| {
        let dir = tmp.path().join(name);
        let mut args = vec!["--m", "30", "--n", "60", "--eps", "1e-5"];
        args.extend_from_slice(extra);
        assert_eq!(solve_in(&dir, &args).status.code(), Some(0));
        fs::read(dir.join("trace.csv")).unwrap()
    };
    assert_eq!(read("par", &[]), read("seq", &["--sequential"]));
}

#[test]
fn unknown_solver_is_a_usage_error() {
    let tmp = TempDir::new().unwrap();
    let out = solve_in(tmp.path(), &["--solver", "bundle"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn beta_outside_unit_interval_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let out = solve_in(tmp.path(), &["--beta", "1.5", "--m", "5", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn exhausted_budget_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let out = solve_in(tmp.path(), &["--m", "20", "--n", "40", "--eps", "1e-9", "--max-iter", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(tmp.path())["status"], "budget_exhausted");
}

#[test]
fn seed_environment_variable_wins() {
    let tmp = TempDir::new().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_levelforge"))
        .args(["solve", "--m", "10", "--n", "20", "--eps", "1e-3", "--seed", "3", "--out-dir"])
        .arg(tmp.path())
        .env("LEVELFORGE_SEED", "42")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(summary(tmp.path())["seed"], 42);
}

#[test]
fn tv_run_writes_images() {
    let tmp = TempDir::new().unwrap();
    let out = solve_in(tmp.path(), &["--problem", "tv", "--solver", "fusl", "--n", "8", "--eps", "1e-2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["truth.pgm", "reconstruction.pgm"] {
        let pgm = fs::read_to_string(tmp.path().join(name)).unwrap();
        let mut tokens = pgm.split_whitespace();
        assert_eq!(tokens.by_ref().take(4).collect::<Vec<_>>(), ["P2", "8", "8", "255"]);
        assert_eq!(tokens.filter(|t| t.parse::<u8>().is_ok()).count(), 64);
    }
    assert!(summary(tmp.path())["relative_error"].as_f64().unwrap() < 1.0);
}

#[test]
fn other_solvers_run_from_the_command_line() {
    let tmp = TempDir::new().unwrap();
    let cases: [&[&str]; 4] = [
        &["--problem", "quad", "--n", "10", "--solver", "fapl-sc", "--lb", "-5", "--eps", "1e-6"],
        &["--problem", "quad", "--n", "10", "--solver", "unconstrained", "--eps", "1e-4"],
        &["--m", "20", "--n", "40", "--solver", "nest", "--eps", "1e-3"],
        &["--problem", "tv", "--n", "8", "--solver", "fusl-sc", "--mu", "0.5", "--lb", "0", "--eps", "1e-2"],
    ];
    for (i, case) in cases.iter().enumerate() {
        let dir = tmp.path().join(i.to_string());
        let out = solve_in(&dir, case);
        assert_eq!(out.status.code(), Some(0), "{case:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(summary(&dir)["status"], "converged");
    }
}

#[test]
fn strongly_convex_solver_needs_a_finite_bound() {
    let tmp = TempDir::new().unwrap();
    let out = solve_in(tmp.path(), &["--problem", "quad", "--n", "5", "--solver", "fapl-sc"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_collects_a_grid() {
    let tmp = TempDir::new().unwrap();
    let out = levelforge(&[
        "sweep",
        "--m",
        "10",
        "--n",
        "20",
        "--eps",
        "1e-4",
        "--betas",
        "0.4,0.6",
        "--thetas",
        "0.5",
        "--memory-depths",
        "3,8",
        "--jobs",
        "2",
        "--out-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("beta,theta,memory_depth,status,iterations,phases,oracle_calls,ub,gap"));
    assert_eq!(lines.count(), 4);
    assert!(tmp.path().join("beta0.4_theta0.5_md3").join("trace.csv").exists());
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(levelforge(&["--help"]).status.code(), Some(0));
    assert_eq!(levelforge(&["--version"]).status.code(), Some(0));
}

#[test]
fn invariant_audit_passes() {
    let out = levelforge(&["audit", "--suite", "invariants"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ")).count(), 9);
    assert!(!stdout.contains("FAIL "));
}
