use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dynscat::numerics::{Tolerances, C64};
use dynscat::potential::{parse_potential, truncate};
use dynscat::propagate::transfer_matrix;
use serde_json::Value;

const BARRIER: &str = r#"{"ell":1,"terms":[{"piecewise":[{"xlo":0,"xhi":1,"value":[2,0]}]}]}"#;
const DELTA: &str = r#"{"ell":0.5,"terms":[{"delta":{"strength":[-2,0.5],"center":0.3}}]}"#;

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn dynscat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynscat")).args(args).output().unwrap()
}

fn json_stdout(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn c(v: &Value) -> C64 {
    C64::new(v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn transfer_json_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "b.json", BARRIER);
    let v = json_stdout(&dynscat(&["transfer", "--potential", pot.to_str().unwrap(), "--k", "0.2:2:4:log"]));
    assert_eq!(v["command"], "transfer");
    let spec = parse_potential(BARRIER.as_bytes()).unwrap();
    let w = truncate(&spec, 1e-12, 3).unwrap();
    let rows = v["results"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let k = row["k"].as_f64().unwrap();
        let m = transfer_matrix(&spec, C64::from(k), &w, &Tolerances::default()).unwrap().m;
        let got: Vec<C64> = row["m"].as_array().unwrap().iter().map(c).collect();
        assert_eq!(got, m.entries().to_vec());
    }
}

#[test]
fn csv_has_settings_line_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "b.json", BARRIER);
    let out = dir.path().join("t.csv");
    let o = dynscat(&["transfer", "--potential", pot.to_str().unwrap(), "--k", "0.5:0.5:1", "--format", "csv", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# settings {"));
    assert_eq!(lines[1], "k,re_m11,im_m11,re_m12,im_m12,re_m21,im_m21,re_m22,im_m22,det_residual");
    assert_eq!(lines.len(), 3);
    let fields: Vec<f64> = lines[2].split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields.len(), 10);
    assert_eq!(fields[0], 0.5);
}

#[test]
fn amplitudes_and_halfline_csv_headers() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "d.json", DELTA);
    let p = pot.to_str().unwrap();
    let o = dynscat(&["amplitudes", "--potential", p, "--k", "0.1:1:3", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("k,re_rl,im_rl,re_rr,im_rr,re_t,im_t"));
    assert_eq!(text.lines().count(), 5);
    let o = dynscat(&["halfline", "--potential", p, "--k", "0.1:1:3", "--alpha", "1", "--beta", "0.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().nth(1), Some("k,re_r,im_r,abs_r"));
}

#[test]
fn zero_reports_coefficients_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "d.json", DELTA);
    let v = json_stdout(&dynscat(&["zero", "--potential", pot.to_str().unwrap()]));
    let co = &v["coefficients"];
    let det = c(&co["a1"]) * c(&co["b2"]) - c(&co["a2"]) * c(&co["b1"]);
    assert!((det - 1.0).norm() < 1e-10);
    assert_eq!(v["resonance"]["resonant"], false);
}

#[test]
fn lowenergy_series_for_delta() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "d.json", DELTA);
    let v = json_stdout(&dynscat(&["lowenergy", "--potential", pot.to_str().unwrap(), "--order", "3"]));
    let text = v.to_string();
    assert!(text.contains("\"generic\""), "{text}");
}

#[test]
fn ell_override_keeps_transfer_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "b.json", BARRIER);
    let p = pot.to_str().unwrap();
    let a = json_stdout(&dynscat(&["transfer", "--potential", p, "--k", "1:1:1"]));
    let b = json_stdout(&dynscat(&["transfer", "--potential", p, "--k", "1:1:1", "--ell", "3"]));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(b["ell"], 3.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let pot = write(dir.path(), "b.json", BARRIER);
    let bad = write(dir.path(), "bad.json", r#"{"ell":1,"terms":[{"piecewise":[{"xlo":1,"xhi":0,"value":[1,0]}]}]}"#);
    let p = pot.to_str().unwrap();
    assert_eq!(dynscat(&["--help"]).status.code(), Some(0));
    assert_eq!(dynscat(&["bogus"]).status.code(), Some(2));
    assert_eq!(dynscat(&["transfer", "--potential", p]).status.code(), Some(2));
    assert_eq!(dynscat(&["transfer", "--potential", "/nonexistent/p.json", "--k", "1:1:1"]).status.code(), Some(2));
    let o = dynscat(&["transfer", "--potential", bad.to_str().unwrap(), "--k", "1:1:1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("terms[0]"));
    assert_eq!(dynscat(&["transfer", "--potential", p, "--k", "1:1:1", "--order", "0"]).status.code(), Some(2));
    assert_eq!(dynscat(&["transfer", "--potential", p, "--k", "1:1:1", "--threads", "0"]).status.code(), Some(2));
    let unwritable = dir.path().join("missing").join("out.json");
    assert_eq!(dynscat(&["transfer", "--potential", p, "--k", "1:1:1", "--out", unwritable.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn validate_passes() {
    let o = dynscat(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}
