use std::path::Path;
use std::process::{Command, Output};

fn nlsfv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsfv")).args(args).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_writes_report_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let stdout = ok(&nlsfv(&[
        "simulate", "--example", "II", "--scale", "reduced", "--cells", "100", "--T", "1", "--dt", "0.03125",
        "--record-every", "4", "--snapshot-every", "16", "--fit-window", "0.2,1", "--out", p(&out),
    ]));
    assert!(stdout.contains("decay fit on [0.2, 1]"));
    for f in ["series.csv", "fit.txt", "summary.json", "damping.csv", "snapshots/step_00000032.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let series = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 1 + 8);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["dt"], 0.03125);
    assert_eq!(summary["config"]["example"], "II");
}

#[test]
fn mesh_then_simulate_on_saved_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("m.json");
    let stdout = ok(&nlsfv(&["mesh", "--domain", "annulus:5,20", "--cells", "150", "--seed", "4", "--out", p(&mesh)]));
    assert!(stdout.starts_with("cells 150"));
    let out = dir.path().join("run");
    ok(&nlsfv(&[
        "simulate", "--example", "III", "--mesh-file", p(&mesh), "--T", "0.25", "--no-nonlinearity", "--out", p(&out),
    ]));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["mesh"]["n_cells"], 150);
    assert_eq!(summary["config"]["nonlinearity"], false);
}

#[test]
fn converge_prints_a_table() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = ok(&nlsfv(&[
        "converge", "--example", "I", "--levels", "(80,0.125);(80,0.0625)", "--T", "0.5", "--out", p(dir.path()),
    ]));
    assert!(stdout.starts_with("n_cells,dt,h,e0_error"));
    assert_eq!(stdout.lines().count(), 3);
    assert!(dir.path().join("convergence.csv").exists());
}

#[test]
fn validate_reports_ratio_and_geometry() {
    let stdout = ok(&nlsfv(&["validate", "--damping", "example2", "--resolution", "1001"]));
    assert!(stdout.contains("analytic 2.183926e2"), "{stdout}");
    assert!(stdout.contains("satisfied"));
    let stdout = ok(&nlsfv(&["validate", "--damping", "zero"]));
    assert!(stdout.contains("violated"));
}

#[test]
fn errors_exit_nonzero_with_message() {
    let out = nlsfv(&["simulate", "--dt", "-1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt must be positive"));
    let out = nlsfv(&["simulate", "--damping", "custom:/nonexistent.json"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent.json"));
    let out = nlsfv(&["mesh", "--domain", "triangle:3"]);
    assert!(!out.status.success());
    let out = nlsfv(&["converge", "--levels", "nonsense"]);
    assert!(!out.status.success());
}
