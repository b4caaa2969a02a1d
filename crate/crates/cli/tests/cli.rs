use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use dirac_virial::clifford::{build_dirac_matrices, matrix_to_json};
use dirac_virial::{PotentialSpec, Rep};
use serde_json::{json, Value};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str], config: Option<&Value>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_dirac-virial"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(c) = config {
        let p = dir.join("config.json");
        std::fs::write(&p, serde_json::to_string(c).unwrap()).unwrap();
        cmd.arg("--config").arg(p);
    }
    cmd.output().expect("binary runs")
}

fn read(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

fn electrostatic(nu: f64) -> Value {
    json!({
        "schema_version": 1,
        "grid": {"d": 3, "n": 8, "half_length": 8.0},
        "mass": 0.0,
        "potential": serde_json::to_value(PotentialSpec::electrostatic(nu)).unwrap(),
    })
}

#[test]
fn certify_below_threshold_is_absent() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["certify"], Some(&electrostatic(0.2)));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(t.path(), "certificate.json")["verdict"], "ABSENT");
}

#[test]
fn certify_above_threshold_is_inconclusive() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["certify"], Some(&electrostatic(0.3)));
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(read(t.path(), "certificate.json")["verdict"], "INCONCLUSIVE");
}

#[test]
fn malformed_config_exits_one() {
    let t = TempDir::new().unwrap();
    let p = t.path().join("bad.json");
    std::fs::write(&p, "{\"schema_version\": 1, \"potential\": {\"name\": ").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dirac-virial")).args(["certify", "--config"]).arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("schema"));
}

#[test]
fn unknown_keys_are_rejected() {
    let t = TempDir::new().unwrap();
    let mut c = electrostatic(0.2);
    c["potential"]["strength"] = json!(1.0);
    assert_eq!(run(t.path(), &["certify"], Some(&c)).status.code(), Some(1));
    let c = json!({"schema_version": 1, "grid": {"d": 3, "n": 8, "half_length": 8.0, "spacing": 1}});
    assert_eq!(run(t.path(), &["norms"], Some(&c)).status.code(), Some(1));
    let c = json!({"schema_version": 2});
    assert_eq!(run(t.path(), &["norms"], Some(&c)).status.code(), Some(1));
}

#[test]
fn corrupted_beta_fails_clifford() {
    let t = TempDir::new().unwrap();
    let rep: Rep = build_dirac_matrices(3).unwrap();
    let mut j = rep.to_json();
    j.beta = matrix_to_json(&rep.alphas[0]);
    let c = json!({"schema_version": 1, "grid": {"d": 3, "n": 16, "half_length": 8.0}, "clifford": j});
    let o = run(t.path(), &["identities", "--quick"], Some(&c));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("identity failed: clifford"));
    assert_eq!(read(t.path(), "identities.json")["all_pass"], false);
}

#[test]
fn one_dimensional_quick_identities_pass() {
    let t = TempDir::new().unwrap();
    let c = json!({"schema_version": 1, "grid": {"d": 1, "n": 256, "half_length": 8.0}});
    let start = Instant::now();
    let o = run(t.path(), &["identities", "--quick"], Some(&c));
    assert!(start.elapsed().as_secs_f64() < 5.0);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = read(t.path(), "identities.json");
    assert_eq!(r["n"], 64);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn three_dimensional_quick_identities_pass() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["identities", "--quick"], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let names: Vec<String> =
        read(t.path(), "identities.json")["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert!(names.contains(&"kinetic_lower_bound".to_string()));
}

#[test]
fn dry_run_prints_resolved_config_only() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["evolve", "--dry-run", "--quick", "--seed", "42"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["seed"], 42);
    assert_eq!(v["grid"]["n"], 32);
    assert_eq!(v["evolve"]["mode"], "packet");
    assert!(!t.path().join("out").exists());
}

#[test]
fn free_evolution_conserves() {
    let t = TempDir::new().unwrap();
    let c = json!({
        "schema_version": 1,
        "grid": {"d": 3, "n": 16, "half_length": 8.0},
        "evolve": {"dt": 0.1, "t_max": 1.0, "packet": {"width": 1.5, "momentum": [0.3, 0.0, 0.2]}},
    });
    let o = run(t.path(), &["evolve"], Some(&c));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(t.path(), "summary.json");
    assert!(s["mass_drift"].as_f64().unwrap() <= 1e-12);
    assert!(s["hamiltonian_drift"].as_f64().unwrap() <= 1e-12);
    assert_eq!(s["t_term_holds"], true);
    let csv = std::fs::read_to_string(t.path().join("out/diagnostics.csv")).unwrap();
    assert!(csv.starts_with("t,M,H,"));
    assert_eq!(csv.lines().count(), 12);
}

#[test]
fn zitterbewegung_mode_reports_frequency() {
    let t = TempDir::new().unwrap();
    let c = json!({
        "schema_version": 1,
        "grid": {"d": 3, "n": 8, "half_length": std::f64::consts::PI},
        "evolve": {"mode": "zitterbewegung", "dt": 0.05, "t_max": 20.0, "zitter_modes": [1]},
    });
    let o = run(t.path(), &["evolve"], Some(&c));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(t.path(), "summary.json");
    let w = s["fit"]["omega"].as_f64().unwrap();
    assert!((w - 2.0 * 2f64.sqrt()).abs() < 1e-3, "{w}");
}

#[test]
fn family_mode_reports_max_ratio() {
    let t = TempDir::new().unwrap();
    let c = json!({
        "schema_version": 1,
        "grid": {"d": 3, "n": 16, "half_length": 8.0},
        "mass": 0.0,
        "potential": serde_json::to_value(PotentialSpec::smooth_electrostatic(0.05, 0.5)).unwrap(),
        "evolve": {"mode": "family", "dt": 0.25, "t_max": 1.0, "family_size": 2, "report_times": [0.5, 1.0]},
    });
    let o = run(t.path(), &["evolve"], Some(&c));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read(t.path(), "summary.json");
    assert_eq!(s["size"], 2);
    assert_eq!(s["all_finite"], true);
    let max = s["max_ratio"].as_f64().unwrap();
    assert!(max > 0.0 && max == s["max_ratio_at"][1].as_f64().unwrap());
}

#[test]
fn free_massive_spectrum_has_empty_gap() {
    let t = TempDir::new().unwrap();
    let c = json!({"schema_version": 1, "grid": {"d": 3, "n": 8, "half_length": 4.0}});
    let o = run(t.path(), &["spectrum"], Some(&c));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(t.path(), "spectrum.json")["entries"].as_array().unwrap().len(), 0);

    let c = json!({"schema_version": 1, "grid": {"d": 3, "n": 8, "half_length": 4.0}, "spectrum": {"window": [100.0, 101.0]}});
    let o = run(t.path(), &["spectrum"], Some(&c));
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(read(t.path(), "spectrum.json")["entries"].as_array().unwrap().len(), 0);
}

#[test]
fn massless_spectrum_needs_a_window() {
    let t = TempDir::new().unwrap();
    let c = json!({"schema_version": 1, "grid": {"d": 3, "n": 8, "half_length": 4.0}, "mass": 0.0});
    assert_eq!(run(t.path(), &["spectrum"], Some(&c)).status.code(), Some(1));
}

#[test]
fn norms_are_reproducible() {
    let t = TempDir::new().unwrap();
    let c = json!({"schema_version": 1, "grid": {"d": 3, "n": 16, "half_length": 8.0}, "norms": {"fields": 5}});
    assert_eq!(run(t.path(), &["norms"], Some(&c)).status.code(), Some(0));
    let a = std::fs::read(t.path().join("out/norms.json")).unwrap();
    assert_eq!(run(t.path(), &["norms"], Some(&c)).status.code(), Some(0));
    let b = std::fs::read(t.path().join("out/norms.json")).unwrap();
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["hardy_holds"], true);
    assert_eq!(v["weighted_holds"], true);
}

#[test]
fn help_exits_zero_and_bad_flags_exit_one() {
    let bin = env!("CARGO_BIN_EXE_dirac-virial");
    assert_eq!(Command::new(bin).arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(Command::new(bin).args(["certify", "--bogus"]).output().unwrap().status.code(), Some(1));
}
