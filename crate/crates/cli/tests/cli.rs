use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qspectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qspectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert_eq!(o.status.code(), Some(0), "{}", stderr(o));
    serde_json::from_str(&stdout(o)).unwrap()
}

const FIG3: [&str; 12] = [
    "--model", "qubit-qnmr", "--omega0", "2.1e9", "--omega-b", "2e9", "--g-q", "1e8", "--gamma-c", "3.3e7", "--grid",
    "1.8e9:2.3e9:4001",
];

/// (omega, T) rows of a spectrum CSV.
fn rows(text: &str) -> Vec<(f64, f64)> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let mut f = l.split(',').map(|v| v.parse::<f64>().unwrap());
            (f.next().unwrap(), f.next().unwrap())
        })
        .collect()
}

/// Local minima of T below 0.5.
fn minima(rows: &[(f64, f64)]) -> Vec<f64> {
    rows.windows(3)
        .filter(|w| w[1].1 < w[0].1 && w[1].1 <= w[2].1 && w[1].1 < 0.5)
        .map(|w| w[1].0)
        .collect()
}

#[test]
fn spectrum_minima_bracket_the_analytic_dips() {
    let mut args = vec!["spectrum"];
    args.extend(FIG3);
    let out = qspectra(&args);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("\n# config: {"));
    assert!(text.contains("\nomega,T,phase_rad,re_t,im_t\n"));
    let step = 5e8 / 4000.0;
    let dips = minima(&rows(&text));
    assert_eq!(dips.len(), 2);
    assert!((dips[0] - 1.9382e9).abs() <= step, "{}", dips[0]);
    assert!((dips[1] - 2.1618e9).abs() <= step, "{}", dips[1]);
}

#[test]
fn degenerate_grid_is_a_config_error() {
    let out = qspectra(&["spectrum", "--model", "qubit-only", "--omega0", "2.1e9", "--gamma-c", "3.3e7", "--grid", "2e9:2e9:100"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("grid"));
}

#[test]
fn missing_parameter_is_named() {
    let out = qspectra(&["spectrum", "--model", "qubit-qnmr", "--omega0", "2.1e9", "--omega-b", "2e9", "--gamma-c", "3.3e7", "--grid", "1e9:3e9:11"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("g_q"), "{}", stderr(&out));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(qspectra(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qspectra(&["spectrum", "--omega0", "abc"]).status.code(), Some(1));
    assert_eq!(qspectra(&["--help"]).status.code(), Some(0));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let mut args = vec!["spectrum"];
    args.extend(FIG3);
    args.extend(["-o", "/nonexistent-dir/out.csv"]);
    let out = qspectra(&args);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent-dir/out.csv"));
}

fn spectrum_file(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let mut all = vec!["spectrum"];
    all.extend(args);
    all.extend(["-o", path.to_str().unwrap()]);
    let out = qspectra(&all);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    path.to_str().unwrap().to_string()
}

#[test]
fn estimate_recovers_fig3_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let path = spectrum_file(dir.path(), "fig3.csv", &FIG3);
    let r = json(&qspectra(&["estimate", &path]));
    assert_eq!(r["schema_version"], "1.0");
    assert_eq!(r["model_class"], "quantum-nmr");
    assert_eq!(r["g_kind"], "g_q");
    let wb = r["omega_b_est"]["value"].as_f64().unwrap();
    assert!((wb - 2.0e9).abs() < 1.25e5, "{wb}");
    let g = &r["g_est"];
    let (gv, gs) = (g["value"].as_f64().unwrap(), g["sigma"].as_f64().unwrap());
    assert!((gv - 1e8).abs() < 1e6, "{gv}");
    assert!((gv - 1e8).abs() < gs);
}

#[test]
fn flat_spectrum_reports_absent_features() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("flat.csv");
    let mut text = String::from("omega,T,phase_rad\n");
    for i in 0..101 {
        text.push_str(&format!("{:e},1,0\n", 1.9e9 + 1e6 * i as f64));
    }
    std::fs::write(&path, text).unwrap();
    let r = json(&qspectra(&["estimate", path.to_str().unwrap()]));
    assert_eq!(r["model_class"], "absent-features");
}

#[test]
fn classical_spectrum_with_references_recovers_g_c() {
    let dir = tempfile::tempdir().unwrap();
    let path = spectrum_file(
        dir.path(),
        "fig5.csv",
        &["--model", "qubit-cnmr", "--omega0", "2.1e9", "--omega-b", "2e9", "--g-c", "1e8", "--gamma-c", "3.3e7", "--grid", "1.8e9:2.3e9:4001"],
    );
    let only_w0 = json(&qspectra(&["estimate", &path, "--ref-omega0", "2.1e9"]));
    assert_eq!(only_w0["model_class"], "classical-nmr");
    assert!(only_w0["g_est"].is_null());
    let r = json(&qspectra(&["estimate", &path, "--ref-omega0", "2.1e9", "--ref-omega-b", "2e9"]));
    assert_eq!(r["model_class"], "classical-nmr");
    assert_eq!(r["g_kind"], "g_c");
    let g = r["g_est"]["value"].as_f64().unwrap();
    let s = r["g_est"]["sigma"].as_f64().unwrap();
    assert!((g - 1e8).abs() < 3.0 * s && (g / 1e8 - 1.0).abs() < 0.05, "{g} ± {s}");
}

#[test]
fn malformed_csv_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "omega,T,phase_rad\n2e9,1,0\n1e9,1,0\n").unwrap();
    let out = qspectra(&["estimate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let out = qspectra(&["estimate", dir.path().join("absent.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn squid_defaults_and_lc_oracle() {
    let r = json(&qspectra(&["squid"]));
    let e0 = r["e0"].as_f64().unwrap();
    assert!((e0 / 2.7025e-23 - 1.0).abs() < 0.01, "{e0}");
    assert_eq!(r["schema_version"], "1.0");

    let r = json(&qspectra(&["squid", "--i-c", "0", "--n-states", "5"]));
    let (l, c, hbar) = (6e-9f64, 1.7e-14f64, 1.054_571_817e-34f64);
    let w = 1.0 / (l * c).sqrt();
    for (n, e) in r["energies"].as_array().unwrap().iter().enumerate() {
        let exact = hbar * w * (n as f64 + 0.5);
        assert!((e.as_f64().unwrap() / exact - 1.0).abs() < 1e-3);
    }
}

#[test]
fn squid_even_grid_is_a_config_error() {
    let out = qspectra(&["squid", "--grid-points", "200"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("grid_points"));
}

#[test]
fn squid_solver_failure_is_numerical() {
    let out = qspectra(&["squid", "--flux-window", "0.2"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).contains("leaks"));
}

#[test]
fn squid_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("q.json");
    let out = qspectra(&["squid", "-o", path.to_str().unwrap(), "--plot"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let table = std::fs::read_to_string(dir.path().join("q_wavefunctions.csv")).unwrap();
    assert!(table.lines().any(|l| l == "flux_over_phi0,U_joules,psi0,psi1"));
    assert!(std::fs::read_to_string(dir.path().join("q.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"model": "qubit-only", "params": {"omega0": 2.1e9, "gamma_c": 3.3e7},
            "grid": {"start": 1.9e9, "stop": 2.3e9, "n_points": 4001}}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let base = stdout(&qspectra(&["spectrum", "--config", cfg]));
    assert!((minima(&rows(&base))[0] - 2.1e9).abs() < 1e5);
    let moved = stdout(&qspectra(&["spectrum", "--config", cfg, "--omega0", "2.0e9"]));
    assert!((minima(&rows(&moved))[0] - 2.0e9).abs() < 1e5);
}

#[test]
fn seeded_noise_is_byte_identical() {
    let mut args = vec!["spectrum"];
    args.extend(FIG3);
    args.extend(["--noise-sigma", "0.01", "--seed", "42"]);
    let a = qspectra(&args);
    let b = qspectra(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let header = stdout(&a);
    assert!(header.contains("\nomega,T,phase_rad\n"));
}

#[test]
fn sweep_long_table() {
    let out = qspectra(&[
        "sweep", "--model", "dispersive", "--omega0", "2.1e9", "--omega-b", "2e9", "--g-q", "3e7", "--gamma-c", "3.3e6", "--grid",
        "2.09e9:2.15e9:601", "--sweep", "mean_n=0:3:4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(body[0], "mean_n,omega,T,phase_rad");
    assert_eq!(body.len(), 1 + 4 * 601);
}

#[test]
fn figures_fig3_embeds_caption() {
    let dir = tempfile::tempdir().unwrap();
    let out = qspectra(&["figures", "--which", "fig3", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("fig3.csv")).unwrap();
    assert!(text.starts_with("# figure: fig3, Fig. 3 caption: omega0=2.1e9, omega_b=2.0e9, gamma_c=3.3e7, g_q=1e8\n"));
    let dips = minima(&rows(&text));
    assert!((dips[0] - 1.9382e9).abs() < 1.25e5 && (dips[1] - 2.1618e9).abs() < 1.25e5);
    assert!(dir.path().join("fig3.svg").exists());
    let out = qspectra(&["figures", "--which", "fig1", "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
