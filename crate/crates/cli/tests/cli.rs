use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn displace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_displace"))
        .args(args)
        .env_remove("DISPLACE_SEED")
        .output()
        .expect("binary runs")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    let prefix = format!("{key} = ");
    report
        .lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} in report:\n{report}"))
}

#[test]
fn auto_solve_of_identity_takes_fast_path() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.txt", "toeplitz 4\n1 0 0 0\n0 0 0\n");
    let b = file(&dir, "b.txt", "vector 4\n1 -2 3.5 0.25\n");
    let o = displace(&["solve", "--matrix", s(&t), "--rhs", s(&b)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout(&o);
    assert_eq!(value(&r, "fallback_used"), "false");
    assert_eq!(
        value(&r, "normalized_residual").parse::<f64>().unwrap(),
        0.0
    );
    assert!(r.contains("\n2 3.5000000000000000e0\n"));
}

#[test]
fn levinson_on_nonsymmetric_input_is_a_solver_error() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.txt", "toeplitz 3\n2 1 0\n0.5 0\n");
    let b = file(&dir, "b.txt", "vector 3\n1 1 1\n");
    let o = displace(&[
        "solve",
        "--matrix",
        s(&t),
        "--rhs",
        s(&b),
        "--method",
        "levinson",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error = NotPositiveDefinite"));
}

#[test]
fn verify_displacement_reports_small_residual() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.txt", "toeplitz 5\n3 -1 0.5 2 0.25\n1 4 -2 0.125\n");
    let o = displace(&["verify-displacement", "--matrix", s(&t)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout(&o);
    let res: f64 = value(&r, "residual").parse().unwrap();
    assert!(res <= 100.0 * 5.0 * f64::EPSILON);
    assert_eq!(value(&r, "within_tolerance"), "true");

    let dense = file(&dir, "d.txt", "dense 1 1\n2\n");
    assert_eq!(
        displace(&["verify-displacement", "--matrix", s(&dense)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn parse_and_usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad = file(&dir, "bad.txt", "toeplitz 3\n1 2 x\n3 4\n");
    let b = file(&dir, "b.txt", "vector 3\n1 1 1\n");
    let o = displace(&["solve", "--matrix", s(&bad), "--rhs", s(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error = ParseError"));
    assert!(stderr(&o).contains("line 2"));

    let missing = dir.path().join("missing.txt");
    let o = displace(&["solve", "--matrix", s(&missing), "--rhs", s(&b)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error = IoError"));

    assert_eq!(
        displace(&["solve", "--matrix", s(&b)]).status.code(),
        Some(2)
    );
    assert_eq!(
        displace(&["solve", "--matrix", s(&b), "--rhs", s(&b), "--tol=0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(displace(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn explicit_methods_and_complex_input() {
    let dir = TempDir::new().unwrap();
    let spd = file(&dir, "spd.txt", "toeplitz 4\n4 1 0.5 0.25\n1 0.5 0.25\n");
    let b = file(&dir, "b.txt", "vector 4\n1 0 -1 2\n");
    for m in ["gko", "bareiss", "levinson", "seminormal", "dense", "auto"] {
        let o = displace(&[
            "solve",
            "--matrix",
            s(&spd),
            "--rhs",
            s(&b),
            "--method",
            m,
            "--pivot",
            "stewart",
        ]);
        assert_eq!(o.status.code(), Some(0), "{m}: {}", stderr(&o));
    }
    let bc = file(&dir, "bc.txt", "vector 4 complex\n1 1 0 0 -1 0.5 2 0\n");
    let o = displace(&["solve", "--matrix", s(&spd), "--rhs", s(&bc)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(value(&stdout(&o), "complex"), "true");
    let o = displace(&[
        "solve",
        "--matrix",
        s(&spd),
        "--rhs",
        s(&bc),
        "--method",
        "bareiss",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("error = InvalidInput"));
}

#[test]
fn least_squares_through_seminormal_equations() {
    let dir = TempDir::new().unwrap();
    let a = file(&dir, "a.txt", "dense 4 2\n3 2\n1 3\n-1 1\n0.5 -1\n");
    let b = file(&dir, "b.txt", "vector 4\n1 2 0 -1\n");
    let o = displace(&[
        "solve",
        "--matrix",
        s(&a),
        "--rhs",
        s(&b),
        "--method",
        "seminormal",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let nr: f64 = value(&stdout(&o), "normal_residual").parse().unwrap();
    assert!(nr <= 100.0 * 4.0 * f64::EPSILON);
}

#[test]
fn factor_exports_dense_factors() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.txt", "toeplitz 3\n1 3 0\n2 0\n");
    let (l, u) = (dir.path().join("l.txt"), dir.path().join("u.txt"));
    let o = displace(&[
        "factor",
        "--matrix",
        s(&t),
        "--method",
        "dense",
        "--l-out",
        s(&l),
        "--u-out",
        s(&u),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = stdout(&o);
    assert!(value(&r, "factor_residual").parse::<f64>().unwrap() <= 1e-15);
    assert!(std::fs::read_to_string(&l)
        .unwrap()
        .starts_with("dense 3 3\n"));
    assert!(std::fs::read_to_string(&u)
        .unwrap()
        .starts_with("dense 3 3\n"));

    let o = displace(&[
        "factor",
        "--matrix",
        s(&t),
        "--method",
        "gko",
        "--u-out",
        s(&u),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(std::fs::read_to_string(&u)
        .unwrap()
        .starts_with("dense 3 3 complex\n"));
    assert_eq!(value(&stdout(&o), "method"), "gko/gu");

    assert_eq!(
        displace(&["factor", "--matrix", s(&t), "--method", "levinson"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn reports_are_byte_identical_and_seed_falls_back_to_env() {
    let args = [
        "stability-report",
        "--n",
        "12",
        "--trials",
        "1",
        "--probe-trials",
        "6",
        "--probe-n",
        "8",
    ];
    let a = displace(&[&args[..], &["--seed", "5"]].concat());
    let b = displace(&[&args[..], &["--seed", "5"]].concat());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let r = stdout(&a);
    assert_eq!(value(&r, "seed"), "5");
    assert!(value(&r, "note").contains("not available"));

    let env = Command::new(env!("CARGO_BIN_EXE_displace"))
        .args(args)
        .env("DISPLACE_SEED", "5")
        .output()
        .unwrap();
    assert_eq!(env.stdout, a.stdout);

    let bench = ["bench", "--n", "10", "--trials", "2"];
    assert_eq!(displace(&bench).stdout, displace(&bench).stdout);
}

#[test]
fn report_goes_to_out_file() {
    let dir = TempDir::new().unwrap();
    let t = file(&dir, "t.txt", "cauchy 2 1\n2 3\n0 1\n1 1\n1 1\n");
    let b = file(&dir, "b.txt", "vector 2\n1.5 0.8333333333333334\n");
    let out = dir.path().join("report.txt");
    let o = displace(&["solve", "--matrix", s(&t), "--rhs", s(&b), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let r = std::fs::read_to_string(&out).unwrap();
    assert_eq!(value(&r, "method"), "gko/gu");
    for x in r.lines().skip_while(|l| *l != "i x").skip(1).take(2) {
        let v: f64 = x.split(' ').nth(1).unwrap().parse().unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }
}
