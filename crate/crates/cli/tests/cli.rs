use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn centerfocus(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_centerfocus"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn report(command: &str, name: &str) -> String {
    let path = fixture(name);
    let (code, stdout, stderr) = centerfocus(&[command, path.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    stdout
}

fn without_timestamp(report: &str) -> String {
    report
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn check_golden(command: &str, name: &str) {
    let got = without_timestamp(&report(command, name));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(format!("{command}_{}", name));
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&golden)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with UPDATE_GOLDEN=1", golden.display()));
    assert!(got == want, "report differs from {}", golden.display());
}

#[test]
fn golden_reports() {
    check_golden("lyapunov", "cubic_focus.json");
    check_golden("analyze", "siegel_xy.json");
    check_golden("analyze", "rotation_germ.json");
    check_golden("blowup", "siegel_round_trip.json");
}

#[test]
fn analyze_is_deterministic() {
    for name in ["hamiltonian_cubic.json", "siegel_round_trip.json", "rotation_germ.json"] {
        let a = report("analyze", name);
        let b = report("analyze", name);
        assert_eq!(without_timestamp(&a), without_timestamp(&b), "{name}");
        assert_ne!(a.len(), without_timestamp(&a).len());
    }
}

#[test]
fn exit_codes() {
    let bad = fixture("bad_exponent.json");
    let (code, _, stderr) = centerfocus(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(stderr.contains("dx[1]"), "{stderr}");

    let germ = fixture("rotation_germ.json");
    assert_eq!(centerfocus(&["returnmap", germ.to_str().unwrap()]).0, 1);
    assert_eq!(centerfocus(&["analyze", "/no/such/spec.json"]).0, 1);

    let focus = fixture("cubic_focus.json");
    let (code, _, _) = centerfocus(&["analyze", focus.to_str().unwrap(), "--radii", "0.05,0.1"]);
    assert_eq!(code, 1);
    let (code, _, _) = centerfocus(&["analyze", focus.to_str().unwrap(), "--tol=-1"]);
    assert_eq!(code, 1);
    assert_eq!(centerfocus(&["analyze", focus.to_str().unwrap(), "--bogus"]).0, 1);
    assert_eq!(centerfocus(&["--help"]).0, 0);

    // the cusp is not monodromic: no return is an answer, not a failure
    let cusp = fixture("cusp.json");
    assert_eq!(centerfocus(&["analyze", cusp.to_str().unwrap()]).0, 0);
}

#[test]
fn out_and_orbit_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let orbits = dir.path().join("orbits");
    let focus = fixture("cubic_focus.json");
    let (code, stdout, _) = centerfocus(&[
        "returnmap",
        focus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--dump-orbits",
        orbits.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r["sections"]["return_map"]["result"]["rows"].as_array().unwrap().len(), 2);
    for k in 0..2 {
        let csv = std::fs::read_to_string(orbits.join(format!("orbit_{k:02}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,x,y"));
        assert!(lines.count() > 10);
    }
}

#[test]
fn hamiltonian_cubic_agrees() {
    let r: Value = serde_json::from_str(&report("analyze", "hamiltonian_cubic.json")).unwrap();
    let c = &r["sections"]["combined"];
    assert_eq!(c["symbolic"], "CENTER_TO_ORDER_N");
    assert_eq!(c["numeric"], "PERIODIC_SEQUENCE");
    assert_eq!(c["agreement"], true);
    for row in r["sections"]["return_map"]["result"]["rows"].as_array().unwrap() {
        assert!(row["tol"].is_number() && row["periodicity_tol"].is_number());
    }
}

#[test]
fn focus_agrees() {
    let r: Value = serde_json::from_str(&report("analyze", "cubic_focus.json")).unwrap();
    let c = &r["sections"]["combined"];
    assert_eq!(c["symbolic"], "FOCUS");
    assert_eq!(c["numeric"], "NOT_PERIODIC");
    assert_eq!(c["agreement"], true);
    let v = &r["sections"]["verdict"];
    assert_eq!(v["eta"], "2/1");
    assert_eq!(v["degree"], 4);
}

#[test]
fn xy_form_round_trip() {
    let r: Value = serde_json::from_str(&report("analyze", "siegel_xy.json")).unwrap();
    let s = &r["sections"];
    let f = &s["first_integral"]["result"]["first_integral"]["terms"];
    assert_eq!(f, &serde_json::json!([[1, 1, "1/1"]]));
    let factor = &s["factor"]["result"];
    let mut branches = [factor["f"]["terms"].to_string(), factor["g"]["terms"].to_string()];
    branches.sort();
    assert_eq!(branches, [r#"[[0,1,"1/1"]]"#, r#"[[1,0,"1/1"]]"#]);
    assert_eq!(factor["reconstruction_exact"], true);
    assert_eq!(s["slice"]["result"]["passed"], true);
}
