use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_gaussmean"));
    c.env_remove("GAUSSMEAN_OUTPUT_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn gaussmean")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn without_timestamp(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["metadata"].as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn roots_prints_t0() {
    let o = run(&["roots", "--precision", "1e-12", "--alpha", "-1,-2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(first.starts_with("t0=1.79328"), "{first}");
    let value: f64 = first["t0=".len()..]
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 1.7933).abs() < 5e-5);
    assert!(out.contains("alpha=-2 x0=0.89664106645038"));
}

#[test]
fn means_csv_reference_row() {
    let o = run(&[
        "means", "--f", "mono:1", "--p", "2", "--alpha", "1", "--rmin", "0.5", "--rmax", "2",
        "--points", "3", "--format", "csv",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("r,x,M,h,phi,mean"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    let row = rows
        .iter()
        .find(|r| (r[0] - 1.0).abs() < 1e-15)
        .expect("r = 1 row");
    // 1 − 2/e over 1 − 1/e
    assert!((row[5] - 0.418_023_293_130_673_6).abs() < 1e-9);
    for cell in out.lines().nth(1).unwrap().split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{cell}");
    }
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        run(&["means", "--f", "mono:-1", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["means", "--f", "mono:1", "--alpha", "1", "--p", "-1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["means", "--f", "mono:1", "--alpha", "1", "--rmin", "2", "--rmax", "1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["means", "--f", "mono:1", "--alpha", "1", "--points", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["roots", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(
        run(&["verify", "--suite", "dchain", "--alpha", "-1", "--x", "1"])
            .status
            .code(),
        Some(2)
    );
    let o = run(&["means", "--f", "mono:-1", "--alpha", "1"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree must be nonnegative"));
}

#[test]
fn verify_exit_codes() {
    assert_eq!(run(&["verify", "--suite", "lemma4"]).status.code(), Some(0));
    assert_eq!(
        run(&["verify", "--suite", "dchain", "--alpha", "-1", "--x", "3"])
            .status
            .code(),
        Some(0)
    );
    let o = run(&[
        "verify", "--suite", "delta", "--f", "mono:1", "--alpha", "1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["payload"]["status"], "passed");
    let o = run(&[
        "verify",
        "--suite",
        "delta",
        "--f",
        "poly:1,1",
        "--alpha",
        "-1",
        "--magnitude-bound",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    let o = run(&[
        "verify",
        "--suite",
        "delta",
        "--unstable",
        "--probes",
        "0.1,0.00001",
        "--f",
        "mono:1",
        "--alpha",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("B-S"));
}

#[test]
fn analyze_reports_both_views() {
    let o = run(&[
        "analyze", "--f", "mono:2", "--alpha", "1", "--p", "3", "--points", "64",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["payload"]["criterion"]["verdict"], "holds");
    assert_eq!(v["payload"]["criterion"]["criterion"], "theorem3");
    assert!(
        v["payload"]["second_differences"]["tol_curv"]
            .as_f64()
            .unwrap()
            > 0.0
    );
    assert_eq!(v["tolerances"]["quadrature"], 1e-10);
    let o = run(&[
        "analyze",
        "--f",
        "exp:1",
        "--alpha",
        "-1",
        "--theorem",
        "c1",
        "--points",
        "64",
        "--format",
        "text",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict=Holds"));
}

#[test]
fn scan_region_map() {
    let o = run(&[
        "scan",
        "--f",
        "mono:1",
        "--alpha-min",
        "-1",
        "--alpha-max",
        "1",
        "--alpha-steps",
        "3",
        "--p",
        "2",
        "--points",
        "40",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "alpha,p,split,inner,outer");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].contains(",convex,"), "{}", lines[1]);
    assert!(lines[3].ends_with(",concave,"), "{}", lines[3]);
}

#[test]
fn reports_are_reproducible() {
    let args = [
        "means",
        "--f",
        "poly:1,0,2+1i",
        "--alpha",
        "-0.5",
        "--p",
        "1.5",
        "--points",
        "20",
        "--format",
        "json",
    ];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(without_timestamp(&a), without_timestamp(&b));
    let v = without_timestamp(&a);
    assert_eq!(v["metadata"]["command"][1], "means");
    assert_eq!(v["payload"]["function"], "poly:1,0,2+1i");
}

#[test]
fn output_file_and_env_dir() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sub").join("m.csv");
    let o = run(&[
        "means",
        "--f",
        "mono:0",
        "--alpha",
        "0",
        "--points",
        "5",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&path)
        .unwrap()
        .starts_with("r,x,M,h,phi,mean\n"));

    let o = bin()
        .env("GAUSSMEAN_OUTPUT_DIR", dir.path())
        .args(["roots", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.path().join("roots.json")).unwrap();
    assert!(text.contains("\"t0\": 1.79328"));
}

#[test]
fn failed_runs_leave_no_partial_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("never.csv");
    let o = run(&[
        "means",
        "--f",
        "mono:1",
        "--alpha",
        "1",
        "--rmin",
        "0",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_ne!(o.status.code(), Some(0));
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn taylor_file_spec() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("coef.txt");
    std::fs::write(&file, "# 1 + z\ntail: 0\n1\n1\n").unwrap();
    let spec = format!("taylor:@{}", file.display());
    let a = stdout(&run(&[
        "means", "--f", &spec, "--alpha", "-1", "--points", "4",
    ]));
    let b = stdout(&run(&[
        "means", "--f", "poly:1,1", "--alpha", "-1", "--points", "4",
    ]));
    assert_eq!(a, b);
    assert_eq!(
        run(&["means", "--f", "taylor:@/nonexistent/x", "--alpha", "1"])
            .status
            .code(),
        Some(2)
    );
    assert!(Path::new(&file).exists());
}
