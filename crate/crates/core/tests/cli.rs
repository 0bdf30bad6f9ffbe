use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rkgs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rkgs"))
        .args(args)
        .output()
        .expect("spawn rkgs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_solve_and_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("sys");
    let out = rkgs(&[
        "gen",
        "--m",
        "40",
        "--n",
        "10",
        "--regime",
        "over-inconsistent",
        "--seed",
        "3",
        "--out",
        path(&sys),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "X.txt",
        "y.txt",
        "reference.txt",
        "residual.txt",
        "meta.txt",
    ] {
        assert!(sys.join(f).exists(), "{f}");
    }

    let out = rkgs(&[
        "solve",
        "--system",
        path(&sys),
        "--solver",
        "regs",
        "--record-every",
        "10",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("trial,iteration,solver,error_sq,residual_sq")
    );
    let last: Vec<&str> = text.lines().last().unwrap().split(',').collect();
    assert_eq!(last[2], "REGS");
    assert!(last[3].parse::<f64>().unwrap() < 1e-6);

    let out = rkgs(&[
        "bounds",
        "--system",
        path(&sys),
        "--solver",
        "RK",
        "--record-every",
        "5",
        "--max-iter",
        "20",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "iteration,bound_value");
    assert_eq!(rows.len(), 6);
}

#[test]
fn compare_writes_aggregate_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("agg.csv");
    let timing = dir.path().join("time.csv");
    let out = rkgs(&[
        "compare",
        "--m",
        "30",
        "--n",
        "60",
        "--regime",
        "underdetermined",
        "--trials",
        "3",
        "--record-every",
        "20",
        "--out",
        path(&csv),
        "--timing-out",
        path(&timing),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with(
        "iteration,solver,mean_err_sq,median_err_sq,min_err_sq,max_err_sq,bound_value\n"
    ));
    let solvers: std::collections::BTreeSet<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    // RGS has no limit at the least-norm solution and is left out by default
    assert_eq!(
        solvers.into_iter().collect::<Vec<_>>(),
        vec!["REGS", "REK", "RK"]
    );
    assert!(fs::read_to_string(&timing)
        .unwrap()
        .starts_with("iteration,solver,mean_seconds\n"));
}

#[test]
fn configuration_errors_exit_with_two() {
    let out = rkgs(&[
        "compare",
        "--m",
        "10",
        "--n",
        "20",
        "--regime",
        "underdetermined",
        "--solvers",
        "RGS",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("valid pairs"));

    let out = rkgs(&[
        "gen",
        "--m",
        "3",
        "--n",
        "5",
        "--regime",
        "over-consistent",
        "--out",
        "/nonexistent/x",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = rkgs(&["gen", "--m", "3", "--n", "5", "--regime", "sideways"]);
    assert_eq!(out.status.code(), Some(2));

    let out = rkgs(&["solve", "--system", "/nonexistent", "--solver", "RK"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("X.txt"), "2 2\n0 0\n0 0\n").unwrap();
    fs::write(d.join("y.txt"), "2\n0\n0\n").unwrap();
    fs::write(d.join("reference.txt"), "2\n0\n0\n").unwrap();
    fs::write(d.join("meta.txt"), "regime over-consistent\n").unwrap();
    let out = rkgs(&[
        "solve",
        "--system",
        path(d),
        "--solver",
        "RK",
        "--stop",
        "residual",
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn tomo_writes_underdetermined_system() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("tomo");
    let out = rkgs(&[
        "tomo",
        "--grid-n",
        "4",
        "--oversample",
        "2",
        "--seed",
        "5",
        "--out",
        path(&sys),
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(sys.join("X.txt"))
        .unwrap()
        .starts_with("16 32\n"));
    let out = rkgs(&[
        "tomo",
        "--grid-n",
        "4",
        "--oversample",
        "1",
        "--out",
        path(&sys),
    ]);
    assert_eq!(out.status.code(), Some(2));
}
