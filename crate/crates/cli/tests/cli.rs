use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;
use qdelay_core::devices;
use qdelay_core::freq::reflection_powered;
use qdelay_core::units::dbm_to_rabi;
use serde_json::Value;

fn qdelay(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdelay")).args(args).env_remove("QDELAY_THREADS").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn param(v: &Value, name: &str) -> f64 {
    v["params"].as_array().unwrap().iter().find(|p| p["name"] == name).unwrap()["value"].as_f64().unwrap()
}

/// Data rows of a sweep CSV as (axis1, delta_p_mhz, re, im, tau_d_ns, singular).
fn sweep_rows(text: &str) -> Vec<(f64, f64, f64, f64, f64, bool)> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("axis1"))
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let n = |i: usize| f[i].parse::<f64>().unwrap();
            (n(0), n(1), n(2), n(3), n(6), f[7] == "1")
        })
        .collect()
}

fn header_value(text: &str, key: &str) -> String {
    let prefix = format!("# {key}: ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap().to_string()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn features_report() {
    let v = json(&qdelay(&["features"]));
    assert!((v["resonant_delay_ns"].as_f64().unwrap() - 275.0).abs() < 1.0);
    assert!((v["singular_control_dbm"].as_f64().unwrap() + 139.4).abs() < 0.2);
    assert!((v["ats_threshold_dbm"].as_f64().unwrap() + 136.0).abs() < 0.3);
    assert!(v["zero_delay_boundary_mhz"].is_null());
    let v = json(&qdelay(&["features", "--device", "device1a"]));
    let b = v["zero_delay_boundary_mhz"].as_array().unwrap();
    assert!((b[1].as_f64().unwrap() - 7.54).abs() < 0.05);
}

#[test]
fn spectrum_resonant_row() {
    let o = qdelay(&["spectrum", "--span-mhz", "10", "--points", "2001"]);
    assert!(o.status.success());
    let rows = sweep_rows(&stdout(&o));
    let mid = rows.iter().find(|r| r.1 == 0.0).unwrap();
    assert!(mid.4 > 274.0 && mid.4 < 275.5, "{}", mid.4);
}

#[test]
fn spectrum_decoupled_is_flat() {
    let o = qdelay(&["spectrum", "--device", "decoupled", "--points", "101"]);
    assert!(o.status.success());
    for r in sweep_rows(&stdout(&o)) {
        assert_eq!((r.2, r.3, r.4), (1.0, 0.0, 0.0));
    }
}

#[test]
fn spectrum_device1a_fast_light() {
    let o = qdelay(&["spectrum", "--device", "device1a", "--span-mhz", "20", "--points", "4001"]);
    let rows = sweep_rows(&stdout(&o));
    let mid = rows.iter().find(|r| r.1 == 0.0).unwrap();
    assert!((mid.4 + 19.5).abs() < 1.0);
    let crossing = rows.windows(2).find(|w| w[0].1 > 0.0 && w[0].4 < 0.0 && w[1].4 >= 0.0).unwrap();
    assert!((crossing[0].1 - 7.54).abs() < 0.05, "{}", crossing[0].1);
}

#[test]
fn delay_map_sign_flip_and_determinism() {
    let args = ["delay-map", "--pc-min-dbm", "-145", "--pc-max-dbm", "-134", "--pc-steps", "45", "--points", "301"];
    let one = qdelay(&[&args[..], &["--threads", "1"]].concat());
    let four = qdelay(&[&args[..], &["--threads", "4"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    let env = Command::new(env!("CARGO_BIN_EXE_qdelay")).args(args).env("QDELAY_THREADS", "3").output().unwrap();
    assert_eq!(one.stdout, env.stdout);

    let rows = sweep_rows(&stdout(&one));
    let centre: Vec<_> = rows.iter().filter(|r| r.1 == 0.0 && !r.5).collect();
    let flip = centre.windows(2).find(|w| w[0].4 > 0.0 && w[1].4 < 0.0).unwrap();
    assert!((flip[0].0 + 139.4).abs() < 0.5 && (flip[1].0 + 139.4).abs() < 0.5);
}

#[test]
fn single_cell_map_matches_spectrum() {
    let map = qdelay(&["delay-map", "--pc-min-dbm", "-141", "--pc-max-dbm", "-141", "--pc-steps", "1", "--points", "201"]);
    let spec = qdelay(&["spectrum", "--pc-dbm", "-141", "--points", "201"]);
    let a = sweep_rows(&stdout(&map));
    let b = sweep_rows(&stdout(&spec));
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x, y);
    }
}

#[test]
fn pulse_long_sigma() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let o = qdelay(&["pulse", "--sigma-ns", "1040", "-o", path_str(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let tau: f64 = header_value(&text, "tau_d_ns").parse().unwrap();
    assert!((tau - 273.0).abs() <= 5.0, "{tau}");
    assert!(text.contains("\nt_ns,re_in,im_in,re_out,im_out,abs_in,abs_out\n"));
}

#[test]
fn pulse_detuned() {
    let o = qdelay(&["pulse", "--sigma-ns", "1000", "--delta-p-mhz", "-5"]);
    assert!(o.status.success());
    let tau: f64 = header_value(&stdout(&o), "tau_d_ns").parse().unwrap();
    assert!((tau - 15.0).abs() <= 3.0, "{tau}");
}

#[test]
fn pulse_zero_amplitude_refuses_extraction() {
    let o = qdelay(&["pulse", "--sigma-ns", "100", "--pp-dbm=-inf"]);
    assert_eq!(o.status.code(), Some(4));
    let text = stdout(&o);
    assert!(text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('t')).all(|l| {
        l.split(',').skip(1).all(|f| f.parse::<f64>().unwrap() == 0.0)
    }));
}

#[test]
fn pulse_sweep_summary() {
    let o = qdelay(&["pulse-sweep", "--param", "delta-p-mhz", "--values", "-5,0", "--sigma-ns", "1000", "--narrowband"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "param,tau_d_ns,confidence,residual_ratio");
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("0.00000000e0,2.7"));
}

#[test]
fn fit_spectrum_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = qdelay(&["spectrum", "--span-mhz", "8", "--points", "401", "-o", path_str(&csv)]);
    assert!(o.status.success());
    let v = json(&qdelay(&["fit-spectrum", "--input", path_str(&csv)]));
    assert!((param(&v, "gamma_r_10_mhz") - 2.316).abs() < 1e-5);
    assert!((param(&v, "gamma_10_mhz") - 1.176).abs() < 1e-5);
    let c = json(&qdelay(&["fit-circle", "--input", path_str(&csv)]));
    assert!((c["diameter"].as_f64().unwrap() - 2.316 / 1.176).abs() < 1e-6);
}

#[test]
fn fit_two_tone_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("map.csv");
    let o = qdelay(&[
        "delay-map", "--pc-min-dbm", "-150", "--pc-max-dbm", "-137", "--pc-steps", "14", "--span-mhz", "10", "--points",
        "201", "-o", path_str(&csv),
    ]);
    assert!(o.status.success());
    let v = json(&qdelay(&["fit-two-tone", "--input", path_str(&csv)]));
    assert!((param(&v, "gamma_20_mhz") / 2.364 - 1.0).abs() < 5e-3);
    assert!((param(&v, "singular_control_dbm") + 139.4).abs() < 0.2);
}

#[test]
fn fit_power_round_trip() {
    let atom = devices::device2();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("p.csv");
    let mut text = String::from("p_dbm,re_r,im_r\n");
    for i in 0..25 {
        let p = -30.0 + i as f64;
        let r: Complex64 = reflection_powered(&atom, 0.0, dbm_to_rabi(p, atom.k_10(), 132.3));
        text.push_str(&format!("{p},{:.12e},{:.12e}\n", r.re, r.im));
    }
    std::fs::write(&csv, text).unwrap();
    let v = json(&qdelay(&["fit-power", "--input", path_str(&csv)]));
    assert!((param(&v, "k_10") / 6.8363e14 - 1.0).abs() < 5e-3);
    let v = json(&qdelay(&["fit-power", "--input", path_str(&csv), "--k10", "6.8363e14"]));
    assert!((param(&v, "attenuation_db") - 132.3).abs() < 1e-3);
}

#[test]
fn malformed_csv_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bad.csv");
    std::fs::write(&csv, "freq_mhz,re_r,im_r\n1,0.5,0\n2,oops,0\n3,0.5,0\n").unwrap();
    let o = qdelay(&["fit-spectrum", "--input", path_str(&csv)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(qdelay(&["spectrum", "--device", "missing.cfg"]).status.code(), Some(2));
    assert_eq!(qdelay(&["pulse", "--sigma-ns", "5"]).status.code(), Some(2));
    assert_eq!(qdelay(&["spectrum", "--bogus"]).status.code(), Some(2));
}

#[test]
fn every_command_has_dry_run() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("unused.csv");
    let p = path_str(&csv);
    let cases: Vec<Vec<&str>> = vec![
        vec!["spectrum"],
        vec!["delay-map"],
        vec!["pulse", "--pc-dbm", "-140"],
        vec!["pulse-sweep", "--param", "sigma-ns", "--values", "500,1000"],
        vec!["fit-circle", "--input", p],
        vec!["fit-spectrum", "--input", p],
        vec!["fit-power", "--input", p],
        vec!["fit-two-tone", "--input", p],
        vec!["features"],
    ];
    for mut args in cases {
        args.push("--dry-run");
        let o = qdelay(&args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains(" = "), "{args:?}");
    }
    let o = qdelay(&["pulse", "--pc-dbm", "-140", "--dry-run"]);
    assert!(stdout(&o).contains("omega_c_rad_s = "));
}
