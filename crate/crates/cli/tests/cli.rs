use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn jetconn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jetconn")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(args: &[&str]) -> (i32, Value) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let mut all = args.to_vec();
    let p = path.to_str().unwrap();
    all.extend(["--report", p]);
    let o = jetconn(&all);
    let json = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    (o.status.code().unwrap(), json)
}

/// CSV text into rows of numbers, skipping the header.
fn csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn flat_plane_passes_every_suite() {
    let (code, json) = report(&["verify", "--manifold", "euclidean_2", "--suite", "all"]);
    assert_eq!(code, 0);
    assert_eq!(json["schema"], 1);
    assert_eq!(json["config"]["seed"], 42);
    assert_eq!(json["summary"]["failed"], 0);
    assert_eq!(json["summary"]["skipped"], 0);
    let checks = json["checks"].as_array().unwrap();
    assert_eq!(checks.len(), json["summary"]["total"].as_u64().unwrap() as usize);
    for c in checks {
        // Exact up to integration roundoff and the finite-difference stencil.
        assert!(c["residual"].as_f64().unwrap() <= 1e-10, "{c}");
        assert_eq!(c["pass"], true);
        assert!(c.get("time_s").is_none());
    }
    let ids: Vec<&str> = checks.iter().map(|c| c["id"].as_str().unwrap()).collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
}

#[test]
fn sphere_curvature_suite_passes() {
    let (code, json) = report(&["verify", "--manifold", "sphere_stereo", "--suite", "curvature"]);
    assert_eq!(code, 0);
    let checks = json["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["id"].as_str().unwrap().starts_with("curvature.")));
    let commutator = checks.iter().find(|c| c["id"] == "curvature.commutator").unwrap();
    assert!(commutator["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn reports_are_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = jetconn(&["verify", "--manifold", "poly_random(2)", "--suite", "frames", "--report", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn seed_changes_the_samples() {
    let (_, a) = report(&["verify", "--manifold", "sphere_stereo", "--suite", "frames"]);
    let (_, b) = report(&["verify", "--manifold", "sphere_stereo", "--suite", "frames", "--seed", "7"]);
    assert_eq!(b["config"]["seed"], 7);
    assert_ne!(a["checks"], b["checks"]);
}

#[test]
fn zero_tolerance_fails_with_exit_one() {
    let (code, json) = report(&["verify", "--manifold", "sphere_stereo", "--suite", "flows", "--tol", "0"]);
    assert_eq!(code, 1);
    assert!(json["summary"]["failed"].as_u64().unwrap() > 0);
    for c in json["checks"].as_array().unwrap() {
        assert_eq!(c["tolerance"], 0.0);
        assert_eq!(c["pass"], c["residual"].as_f64().unwrap() <= 0.0);
    }
}

#[test]
fn torsion_specs_skip_torsion_free_checks() {
    let (code, json) = report(&["verify", "--manifold", "flat_torsion_c", "--suite", "all"]);
    assert_eq!(code, 0);
    let skipped: Vec<&str> = json["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["status"] == "skipped")
        .map(|c| c["id"].as_str().unwrap())
        .collect();
    assert_eq!(skipped, ["curvature.homothety", "curvature.levi_civita", "frames.holonomic_solve"]);
}

#[test]
fn timings_are_opt_in() {
    let (_, json) = report(&["verify", "--manifold", "euclidean_2", "--suite", "core", "--timings"]);
    assert!(json["checks"].as_array().unwrap().iter().all(|c| c["time_s"].as_f64().unwrap() >= 0.0));
}

#[test]
fn asymmetric_metric_is_a_load_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    fs::write(&path, "[manifold]\ndim = 2\nkind = \"metric\"\n[fields]\ng11 = \"1\"\ng12 = \"x1\"\ng21 = \"x2\"\ng22 = \"1\"\n").unwrap();
    let o = jetconn(&["verify", "--manifold", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("validation failed"), "{}", stderr(&o));
    assert!(stderr(&o).contains("asymmetric"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(jetconn(&["verify", "--manifold", "no_such_manifold"]).status.code(), Some(2));
    assert_eq!(jetconn(&["verify"]).status.code(), Some(2));
    assert_eq!(jetconn(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(jetconn(&["inspect", "--manifold", "euclidean_2", "--at", "1,2,3"]).status.code(), Some(2));
    assert_eq!(jetconn(&["inspect", "--manifold", "poincare_disk", "--at", "0.95,0"]).status.code(), Some(2));
    assert_eq!(
        jetconn(&["inspect", "--manifold", "euclidean_2", "--at", "0,0", "--xi", "1,2;2,4"]).status.code(),
        Some(2)
    );
}

#[test]
fn spec_files_load_like_builtins() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sphere.toml");
    fs::write(
        &path,
        "[manifold]\nname = \"s\"\ndim = 2\nkind = \"metric\"\n[fields]\ng11 = \"4/(1+x1^2+x2^2)^2\"\ng22 = \"4/(1+x1^2+x2^2)^2\"\n",
    )
    .unwrap();
    let a = jetconn(&["inspect", "--manifold", path.to_str().unwrap(), "--at", "0.3,0.1"]);
    let b = jetconn(&["inspect", "--manifold", "sphere_stereo", "--at", "0.3,0.1"]);
    let body = |o: &Output| stdout(o).lines().skip(1).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&a), body(&b));
}

#[test]
fn flat_geodesics_are_straight_lines() {
    let o = jetconn(&["geodesic", "--manifold", "euclidean_2", "--from", "0.5,-1", "--dir", "1,0", "--t", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = csv(&stdout(&o));
    assert_eq!(header, ["t", "x1", "x2", "v1", "v2"]);
    assert_eq!(rows.len(), 101);
    for r in &rows {
        assert!((r[1] - (0.5 + r[0])).abs() < 1e-12 && r[2] == -1.0);
        assert_eq!((r[3], r[4]), (1.0, 0.0));
    }
    assert_eq!(rows.last().unwrap()[0], 2.0);
}

#[test]
fn hyperbolic_radial_geodesics_stay_in_the_disk() {
    let o = jetconn(&["geodesic", "--manifold", "poincare_disk", "--from", "0,0", "--dir", "0.6,0.8", "--t", "1.2"]);
    assert_eq!(o.status.code(), Some(0));
    let (_, rows) = csv(&stdout(&o));
    let mut last = -1.0;
    for r in &rows {
        let radius = r[1].hypot(r[2]);
        assert!(radius < 1.0 && radius > last);
        // Euclidean unit speed at the origin has hyperbolic speed 2, so the radius is tanh(t).
        assert!((radius - r[0].tanh()).abs() < 1e-10, "{r:?}");
        last = radius;
    }
}

#[test]
fn leaving_the_domain_is_a_failure_with_the_last_time() {
    let o = jetconn(&["geodesic", "--manifold", "poincare_disk", "--from", "0,0", "--dir", "1,0", "--t", "10"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let t: f64 = err.rsplit("t = ").next().unwrap().trim().parse().unwrap();
    // The disk chart is cut at radius 0.9 = tanh(t).
    assert!(t > 0.0 && (t.tanh() - 0.9).abs() < 1e-2, "{err}");
}

#[test]
fn symmetry_samples_are_the_reversed_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let fwd = dir.path().join("fwd.csv");
    let rev = dir.path().join("rev.csv");
    let common = ["geodesic", "--manifold", "sphere_stereo", "--from", "0.2,-0.1", "--t", "0.6"];
    let mut a = common.to_vec();
    a.extend(["--dir", "0.5,0.3", "--symmetry", "--emit", fwd.to_str().unwrap()]);
    let mut b = common.to_vec();
    b.extend(["--dir", "-0.5,-0.3", "--emit", rev.to_str().unwrap()]);
    assert_eq!(jetconn(&a).status.code(), Some(0));
    assert_eq!(jetconn(&b).status.code(), Some(0));
    let (header, fwd_rows) = csv(&fs::read_to_string(&fwd).unwrap());
    let (_, rev_rows) = csv(&fs::read_to_string(&rev).unwrap());
    assert_eq!(header, ["t", "x1", "x2", "v1", "v2", "r1", "r2"]);
    for (f, r) in fwd_rows.iter().zip(&rev_rows) {
        assert!((f[5] - r[1]).abs() < 1e-8 && (f[6] - r[2]).abs() < 1e-8, "{f:?} {r:?}");
    }
}

#[test]
fn inspect_flat_origin_has_zero_blocks() {
    let o = jetconn(&["inspect", "--manifold", "euclidean_2", "--at", "0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let values: Vec<&str> = text.lines().filter(|l| l.contains(" = ")).collect();
    assert_eq!(values.len(), 4 + 4 + 1 + 2);
    assert!(values.iter().all(|l| l.ends_with("= [0, 0]")), "{text}");
    assert!(text.contains("symmetry jet: holonomic"));
}

#[test]
fn inspect_reports_torsion_and_semiholonomy() {
    let o = jetconn(&["inspect", "--manifold", "flat_torsion_c", "--at", "0.1,0.2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("T(e1,e2) = [1, 0]"), "{text}");
    assert!(text.contains("symmetry jet: semiholonomic"));
}

#[test]
fn rotations_of_the_sphere_are_integrable() {
    let (c, s) = (0.6f64.cos(), 0.6f64.sin());
    let xi = format!("{c},{};{s},{c}", -s);
    let o = jetconn(&["inspect", "--manifold", "sphere_stereo", "--at", "0,0", "--xi", &xi]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("verdict: in Int(D)"), "{text}");
    assert!(text.contains("|SS(xi) - kappa SS(xi)| = 0"), "{text}");

    let o = jetconn(&["inspect", "--manifold", "sphere_stereo", "--at", "0,0", "--xi", "1.3,0.2;0,0.8"]);
    assert!(stdout(&o).contains("verdict: not in Int(D)"));
}
