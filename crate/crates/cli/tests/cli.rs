use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SPHERE: &str = "\
# unit 3-sphere
ambient flat q=2
dims d=2 l=1
domain u1 0.3 1.2
domain u2 0.3 1.2
domain u3 0.3 1.2
component cos(u1)
component sin(u1)*cos(u2)
component sin(u1)*sin(u2)*cos(u3)
component sin(u1)*sin(u2)*sin(u3)
";

fn crcurv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_crcurv"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(out: &Output) -> Vec<Value> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).expect("valid JSON line"))
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

#[test]
fn mixed_scalar_on_the_three_sphere() {
    let out = crcurv(&[
        "run",
        "--chart",
        "sphere_in_Cq:2,1,2",
        "--check",
        "mixed_scalar",
        "--points",
        "9",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let recs = records(&out);
    assert_eq!(recs.len(), 9);
    for r in recs {
        assert_eq!(r["theorem"], "mixed_scalar");
        assert_eq!(r["pass"], true);
        assert!((r["slack"].as_f64().unwrap() - 0.25).abs() < 1e-9);
        assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn flat_torus_invariant_is_zero() {
    let out = crcurv(&[
        "run",
        "--chart",
        "flat_torus:2",
        "--invariant",
        "delta_m:+:1,1",
        "--points",
        "4",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for r in records(&out) {
        assert_eq!(r["record"], "invariant");
        assert_eq!(r["value"].as_f64(), Some(0.0));
    }
}

#[test]
fn chart_file_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let chart = format!("file:{}", write(dir.path(), "s3.chart", SPHERE));
    let a = dir.path().join("a.jsonl");
    let b = dir.path().join("b.jsonl");
    for out in [&a, &b] {
        let o = crcurv(&[
            "run",
            "--chart",
            &chart,
            "--check",
            "all",
            "--seed",
            "7",
            "--points",
            "4",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn jobs_do_not_change_the_report() {
    let base = [
        "run",
        "--chart",
        "sphere_in_Cq:4,1,3",
        "--check",
        "theorem_V",
        "--points",
        "4",
    ];
    let serial = crcurv(&base);
    let mut parallel_args = base.to_vec();
    parallel_args.extend(["--jobs", "3"]);
    let parallel = crcurv(&parallel_args);
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(serial.stdout, parallel.stdout);
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "chart = \"flat_torus:2\"\nchecks = [\"all\"]\ncolour = 1\n",
    );
    assert_eq!(crcurv(&["run", "--config", &cfg]).status.code(), Some(2));
    assert_eq!(
        crcurv(&["run", "--chart", "nowhere:1", "--check", "all"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        crcurv(&["run", "--chart", "flat_torus:2", "--check", "bogus"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        crcurv(&["run", "--chart", "flat_torus:2"]).status.code(),
        Some(2)
    );
    let broken = write(
        dir.path(),
        "broken.chart",
        &SPHERE.replace("ambient flat q=2", "ambient flat"),
    );
    let out = crcurv(&[
        "run",
        "--chart",
        &format!("file:{broken}"),
        "--check",
        "all",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":2:"));
    assert_eq!(crcurv(&["explain", "no_such_check"]).status.code(), Some(2));
}

#[test]
fn toml_config_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "chart = \"sphere_in_Cq:2,2,3\"\nchecks = [\"mixed_scalar\"]\nseed = 3\n[sampling]\nmode = \"grid\"\nper_axis = 2\n",
    );
    let out = crcurv(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let recs = records(&out);
    assert_eq!(recs.len(), 16);
    for r in recs {
        assert_eq!(r["equality"], true);
        assert_eq!(r["seed"].as_u64(), Some(3));
    }
}

#[test]
fn computation_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // sqrt(u3)/sqrt(u3) is 1 where defined; half the box has u3 < 0
    let text = SPHERE
        .replace("domain u3 0.3 1.2", "domain u3 -0.5 1.2")
        .replace("component cos(u1)", "component cos(u1)*sqrt(u3)/sqrt(u3)");
    let chart = format!("file:{}", write(dir.path(), "partial.chart", &text));
    let out = crcurv(&[
        "run",
        "--chart",
        &chart,
        "--check",
        "mixed_scalar",
        "--points",
        "12",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let recs = records(&out);
    let errors: Vec<_> = recs.iter().filter(|r| r["record"] == "error").collect();
    assert!(!errors.is_empty());
    assert!(errors.iter().all(|r| r["point_index"].is_u64()));
}

#[test]
fn failed_equality_conditions_exit_with_one() {
    // a loose equality tolerance flags the strict 2 < 9/4 case as equality,
    // whose conditions then fail
    let out = crcurv(&[
        "run",
        "--chart",
        "sphere_in_Cq:2,1,2",
        "--check",
        "mixed_scalar",
        "--points",
        "2",
        "--tol-eq",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
    for r in records(&out) {
        assert_eq!(r["pass"], true);
        assert_eq!(r["diagnostics_pass"], false);
    }
}

#[test]
fn catalog_lists_and_emits_loadable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = crcurv(&["catalog", "--emit", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "sphere_in_Cq:2,1,2",
        "flat_torus:2",
        "totally_geodesic_plane:2,1,2",
        "product_sphere_chart:2,2,3",
        "holomorphic_product",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
    assert!(text.contains("|H|^2 = 9.000000"));
    let file = dir.path().join("sphere_in_Cq_2_2_3.chart");
    let out = crcurv(&[
        "run",
        "--chart",
        &format!("file:{}", file.display()),
        "--check",
        "mixed_scalar",
        "--points",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(0));
    for r in records(&out) {
        assert!(r["slack"].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn csv_output_has_a_header_and_one_row_per_record() {
    let out = crcurv(&[
        "run",
        "--chart",
        "sphere_in_Cq:2,1,2",
        "--check",
        "mixed_scalar",
        "--points",
        "3",
        "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("record,chart,seed,point_index"));
    assert!(lines[1].starts_with("check,\"sphere_in_Cq:2,1,2\",0,0,mixed_scalar"));
}

#[test]
fn explain_describes_every_check() {
    let list = crcurv(&["explain", "--list"]);
    let ids = String::from_utf8(list.stdout).unwrap();
    assert_eq!(ids.lines().count(), 8);
    for id in ids.lines() {
        let out = crcurv(&["explain", id]);
        assert_eq!(out.status.code(), Some(0));
        assert!(String::from_utf8(out.stdout).unwrap().starts_with(id));
    }
}
