use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn kdsum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdsum"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = kdsum(args);
    assert!(
        out.status.success(),
        "kdsum {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_toy(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let data = dir.join("toy.csv");
    let schema = dir.join("toy.json");
    let labels = dir.join("toy_labels.csv");
    fs::write(&data, "c,u,o\n1.5,1,3\n1.5,1,3\n1.5,0,0\n0,1,0\n0,0,3\n").unwrap();
    fs::write(
        &schema,
        r#"[{"name":"c","kind":"continuous"},{"name":"u","kind":"unordered","levels":2},{"name":"o","kind":"ordered","levels":4}]"#,
    )
    .unwrap();
    fs::write(&labels, "label\n0\n0\n0\n1\n1\n").unwrap();
    (data, schema, labels)
}

/// Data rows of a CSV output, without `#` comment lines.
fn data_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn matrix_value(path: &Path, i: usize, j: usize) -> f64 {
    let key = format!("{},{},", i.max(j), i.min(j));
    let row = data_lines(path)
        .into_iter()
        .find(|r| r.starts_with(&key))
        .unwrap();
    row.rsplit(',').next().unwrap().parse().unwrap()
}

#[test]
fn distance_reproduces_toy_matrices() {
    let dir = tempfile::tempdir().unwrap();
    let (data, schema, _) = write_toy(dir.path());
    type Entry = (usize, usize, f64);
    let cases: [(&str, [Entry; 2]); 3] = [
        ("0.01,0,0", [(0, 2, 4.000), (0, 3, 81.788)]),
        ("10,1,1", [(0, 3, 0.001), (0, 2, 0.0)]),
        ("1.027,0.591,4.94e-32", [(0, 3, 2.510), (0, 4, 1.328)]),
    ];
    for (n, (bw, expect)) in cases.iter().enumerate() {
        let out = dir.path().join(format!("case{n}"));
        ok(&[
            "distance",
            "--data",
            s(&data),
            "--schema",
            s(&schema),
            "--bandwidths",
            bw,
            "--out",
            s(&out),
        ]);
        let matrix = dir.path().join(format!("case{n}.matrix.csv"));
        for &(i, j, v) in expect {
            let got = matrix_value(&matrix, i, j);
            assert!(
                (got - v).abs() <= 5e-4,
                "case {n} d({i},{j}) = {got}, expected {v}"
            );
        }
        assert!(dir.path().join(format!("case{n}.manifest.json")).exists());
    }
}

#[test]
fn validation_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let (data, schema, _) = write_toy(dir.path());
    let out = dir.path().join("bad");
    // unordered bandwidth above 1
    let r = kdsum(&[
        "distance",
        "--data",
        s(&data),
        "--schema",
        s(&schema),
        "--bandwidths",
        "1,2,0.5",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));

    fs::write(dir.path().join("broken.csv"), "c,u,o\n1.5,1,3\nxyz,1,3\n").unwrap();
    let r = kdsum(&[
        "distance",
        "--data",
        s(&dir.path().join("broken.csv")),
        "--schema",
        s(&schema),
        "--bandwidths",
        "1,0.5,0.5",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("broken.csv:3:"));
}

#[test]
fn numerical_failure_exits_with_three() {
    // Epanechnikov similarities vanish for a far outlier at the starting
    // bandwidth, so every leave-one-out term for it is zero.
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("far.csv");
    let schema = dir.path().join("far.json");
    fs::write(&data, "x\n0\n1\n1000\n").unwrap();
    fs::write(&schema, r#"[{"name":"x","kind":"continuous"}]"#).unwrap();
    let r = kdsum(&[
        "bandwidth",
        "--data",
        s(&data),
        "--schema",
        s(&schema),
        "--kernel",
        "epanechnikov",
        "--restarts",
        "0",
        "--out",
        s(&dir.path().join("far")),
    ]);
    assert_eq!(
        r.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
}

#[test]
fn pipeline_report_names_a_best_algorithm() {
    let dir = tempfile::tempdir().unwrap();
    let (data, schema, labels) = write_toy(dir.path());
    let out = dir.path().join("p");
    ok(&[
        "pipeline",
        "--data",
        s(&data),
        "--schema",
        s(&schema),
        "--labels",
        s(&labels),
        "--bandwidths",
        "0.5,0.5,0.5",
        "--algo",
        "all",
        "--out",
        s(&out),
    ]);
    let report: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("p.report.json")).unwrap())
            .unwrap();
    let reports = report["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 7);
    let best = &report["best"];
    let top = reports
        .iter()
        .map(|r| r["ca"].as_f64().unwrap())
        .fold(0.0, f64::max);
    assert_eq!(best["ca"].as_f64().unwrap(), top);
    assert_eq!(report["k"], 2);
}

#[test]
fn simulate_and_gridsearch_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim5");
    ok(&["simulate", "--sim", "5", "--seed", "3", "--out", s(&sim)]);
    assert_eq!(data_lines(&dir.path().join("sim5.data.csv")).len(), 201);
    assert_eq!(data_lines(&dir.path().join("sim5.labels.csv")).len(), 201);

    let toy = dir.path().join("toy");
    fs::create_dir(&toy).unwrap();
    let (data, schema, labels) = write_toy(&toy);
    let grid = dir.path().join("g");
    ok(&[
        "gridsearch",
        "--data",
        s(&data),
        "--schema",
        s(&schema),
        "--labels",
        s(&labels),
        "--grid",
        "0.5:2:0.5",
        "--grid",
        "0:1:0.5",
        "--grid",
        "0:1:0.5",
        "--restarts",
        "1",
        "--out",
        s(&grid),
    ]);
    let rows = data_lines(&dir.path().join("g.grid.csv"));
    assert_eq!(rows[0], "lambda_c,lambda_u,lambda_o,ca,ari");
    assert_eq!(rows.len(), 1 + 4 * 3 * 3);
    assert!(dir.path().join("g.mscv.json").exists());
}

#[test]
fn montecarlo_records_runtimes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc");
    ok(&[
        "montecarlo",
        "--sim",
        "3",
        "--sizes",
        "20",
        "--reps",
        "3",
        "--restarts",
        "1",
        "--out",
        s(&out),
    ]);
    let rows = data_lines(&dir.path().join("mc.reps.csv"));
    assert_eq!(rows[0], "size,rep,seed,algorithm,ca,ari,runtime_seconds");
    assert_eq!(rows.len(), 4);
    for row in &rows[1..] {
        let runtime: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(runtime > 0.0);
    }
    assert!(dir.path().join("mc.summary.csv").exists());
}

fn rerun_from_manifest(manifest: &Path, new_out: &Path) {
    let m: Value = serde_json::from_str(&fs::read_to_string(manifest).unwrap()).unwrap();
    let mut argv: Vec<String> = m["argv"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    let pos = argv.iter().position(|a| a == "--out").unwrap();
    argv[pos + 1] = s(new_out).to_string();
    let refs: Vec<&str> = argv[1..].iter().map(String::as_str).collect();
    ok(&refs);
}

#[test]
fn rerun_from_manifest_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a/sim");
    ok(&[
        "simulate",
        "--sim",
        "1",
        "--seed",
        "11",
        "--sizes",
        "30,40",
        "--out",
        s(&first),
    ]);
    rerun_from_manifest(
        &dir.path().join("a/sim.manifest.json"),
        &dir.path().join("b/sim"),
    );
    for suffix in ["data.csv", "schema.json", "labels.csv"] {
        let a = fs::read(dir.path().join(format!("a/sim.{suffix}"))).unwrap();
        let b = fs::read(dir.path().join(format!("b/sim.{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix} differs");
    }

    let data = dir.path().join("a/sim.data.csv");
    let schema = dir.path().join("a/sim.schema.json");
    let d1 = dir.path().join("a/dist");
    ok(&[
        "distance",
        "--data",
        s(&data),
        "--schema",
        s(&schema),
        "--restarts",
        "2",
        "--seed",
        "5",
        "--out",
        s(&d1),
    ]);
    rerun_from_manifest(
        &dir.path().join("a/dist.manifest.json"),
        &dir.path().join("b/dist"),
    );
    let a = fs::read(dir.path().join("a/dist.matrix.csv")).unwrap();
    let b = fs::read(dir.path().join("b/dist.matrix.csv")).unwrap();
    assert_eq!(a, b, "matrix differs");
}
