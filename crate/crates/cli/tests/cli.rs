use std::fs::File;
use std::io::BufReader;
use std::path::Path;
use std::process::{Command, Output};

use spinwalk::export::{read_table, Table};

fn spinwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinwalk"))
        .args(args)
        .env("SPINWALK_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all = args.to_vec();
    all.extend(["--output", dir.to_str().unwrap()]);
    let out = spinwalk(&all);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn table(path: &Path) -> Table {
    read_table(BufReader::new(File::open(path).unwrap())).unwrap()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

#[test]
fn bad_input_exits_with_two() {
    assert_eq!(spinwalk(&["density", "--alpha", "1"]).status.code(), Some(2));
    assert_eq!(spinwalk(&["qrw", "--steps", "0"]).status.code(), Some(2));
    assert_eq!(spinwalk(&["density", "--times", "1T"]).status.code(), Some(2));
    assert_eq!(spinwalk(&["density", "--alpha", "1", "--times", "2T,1T"]).status.code(), Some(2));
    assert_eq!(spinwalk(&["density", "--alpha", "1", "--times", "-1"]).status.code(), Some(2));
    assert_eq!(spinwalk(&["density", "--alpha", "0", "--times", "1T"]).status.code(), Some(2));
    let usage = spinwalk(&["density", "--alpha", "1"]);
    assert!(String::from_utf8_lossy(&usage.stderr).contains("Usage"));
}

#[test]
fn snapshots_are_normalised() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["density", "--alpha", "0.333", "--times", "2T,4T,6T,8T"]);
    for tag in ["2T", "4T", "6T", "8T"] {
        let t = table(&dir.path().join(format!("density_{tag}.csv")));
        assert_eq!(t.columns, ["x", "x_over_sigma", "P"]);
        assert_eq!(t.metadata["method"], "quadrature");
        let norm = trapezoid(&t.column("x").unwrap(), &t.column("P").unwrap());
        assert!((norm - 1.0).abs() < 1e-6, "{tag}: norm {norm}");
    }
}

#[test]
fn fast_precession_leaves_the_packet_in_place() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["density", "--alpha", "1e9", "--times", "1T"]);
    let t = table(&dir.path().join("density_1T.csv"));
    let x = t.column("x").unwrap();
    let p = t.column("P").unwrap();
    let gauss: Vec<f64> = x
        .iter()
        .map(|x| (-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt())
        .collect();
    let diff: Vec<f64> = p.iter().zip(&gauss).map(|(a, b)| (a - b).abs()).collect();
    let l1 = trapezoid(&x, &diff);
    assert!(l1 < 1e-3, "L1 distance {l1}");
}

#[test]
fn metadata_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &["density", "--alpha", "0.5", "--sigma", "2", "--times", "3F", "--method", "fft"],
    );
    let t = table(&dir.path().join("density_3F.csv"));
    let m = &t.metadata;
    assert_eq!(m["alpha"].as_f64(), Some(0.5));
    assert_eq!(m["sigma"].as_f64(), Some(2.0));
    assert_eq!(m["t"].as_f64(), Some(6.0));
    assert_eq!(m["method"], "fft");
    assert_eq!(m["spin"], "y_plus");
    assert_eq!(m["clipped"], false);
    let x = t.column("x").unwrap();
    let xs = t.column("x_over_sigma").unwrap();
    assert!(x.iter().zip(&xs).all(|(x, xs)| (x / 2.0 - xs).abs() < 1e-12));
}

#[test]
fn identical_runs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["density", "--alpha", "0.7", "--times", "1T,3T", "--spin", "z_plus"];
    run_in(a.path(), &args);
    run_in(b.path(), &args);
    for name in ["density_1T.csv", "density_3T.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(x == y, "{name} differs between runs");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nalpha = 3\ntimes = 1T\nmethod = fft\n").unwrap();
    run_in(dir.path(), &["density", "--config", cfg.to_str().unwrap(), "--alpha", "0.25"]);
    let t = table(&dir.path().join("density_1T.csv"));
    assert_eq!(t.metadata["alpha"].as_f64(), Some(0.25));
    assert_eq!(t.metadata["method"], "fft");
}

#[test]
fn alpha_sweep_table() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["observables", "--sweep-alpha", "0.01:10:log:40"]);
    let t = table(&dir.path().join("observables_sweep.csv"));
    assert_eq!(t.columns, ["alpha", "eta_bar", "V"]);
    assert_eq!(t.rows.len(), 40);
    let eta_bar = t.column("eta_bar").unwrap();
    assert!(eta_bar.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn eta_series_stays_in_its_band() {
    let dir = tempfile::tempdir().unwrap();
    run_in(
        dir.path(),
        &["observables", "--alpha", "0.1", "--tmax", "20T", "--dt", "0.05T", "--quantity", "eta"],
    );
    let t = table(&dir.path().join("observables.csv"));
    let eta = t.column("eta").unwrap();
    assert_eq!(eta.len(), 401);
    assert!((eta[0] - 1.0).abs() < 1e-12);
    let floor = 1.0 - 2.0 * t.metadata["eta_bar"].as_f64().unwrap() - 1e-6;
    assert!(eta.iter().all(|&e| e >= floor && e <= 1.0 + 1e-9));
}

fn spread_velocity_at_two() -> serde_json::Value {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(dir.path(), &["observables", "--alpha", "2", "--quantity", "V"]);
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn spread_velocity_report() {
    let report = spread_velocity_at_two();
    // Gaussian average of xi^4/(4 + xi^2)^2 with Var xi = 1/4, by mpmath.
    let exact = 0.042_454_237_964_820_77;
    let v = report["V"].as_f64().unwrap();
    assert!((v - exact).abs() < 1e-9, "V(2) = {v}");
    let law = 3f64.sqrt() / 32.0;
    assert!((report["large_alpha_law"].as_f64().unwrap() - law).abs() < 1e-15);
    assert!(v < law);
}

#[test]
fn spread_velocity_near_large_alpha_law() {
    let report = spread_velocity_at_two();
    let v = report["V"].as_f64().unwrap();
    let law = 3f64.sqrt() / 32.0;
    assert!((v / law - 1.0).abs() < 0.1, "V(2) = {v}, ratio to law {}", v / law);
}

#[test]
fn entropy_starts_at_the_gaussian_value() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["entropy", "--alpha", "1", "--times", "0,1T,4T"]);
    let t = table(&dir.path().join("entropy.csv"));
    assert_eq!(t.columns, ["t", "S", "S_over_ln_t"]);
    let s = t.column("S").unwrap();
    let gaussian = 0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E).ln();
    assert!((s[0] - gaussian).abs() < 1e-6, "S(0) = {}", s[0]);
    assert!(s[2] > s[0]);
}

#[test]
fn walk_is_symmetric_and_compares() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["qrw", "--steps", "100", "--coin", "y_plus"]);
    let t = table(&dir.path().join("qrw.csv"));
    assert_eq!(t.metadata["steps"], 100);
    let n = t.column("n").unwrap();
    let p = t.column("P").unwrap();
    for (k, &site) in n.iter().enumerate() {
        let mirror = n.iter().position(|&m| m == -site).unwrap();
        assert!((p[k] - p[mirror]).abs() < 1e-12);
    }
    assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    run_in(dir.path(), &["qrw", "--steps", "200", "--compare", "--alpha", "0.02"]);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("qrw_report.json")).unwrap()).unwrap();
    assert!(report["lattice_front_speed"].as_f64().unwrap() > 0.0);
    assert!(report["continuum_front_speed"].as_f64().unwrap() > 0.0);
}

#[test]
fn zero_tolerance_names_failing_criteria() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = spinwalk(&["validate", "--tolerance", "0", "--criteria", "15", "--report", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("criterion 15 [FAIL]"));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    assert_eq!(report["criteria"][0]["id"], 15);
    assert!(report["version"].is_string());
    assert!(report["grid"].is_object());
}
