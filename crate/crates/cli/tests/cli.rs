use std::fs;
use std::process::{Command, Output};

fn nonrecip(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonrecip"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

#[test]
fn evolve_with_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("ev");
    let o = nonrecip(&["evolve", "--n", "3", "--k0", "0.003", "--t-end", "1", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert!(csv.starts_with("tau,R_1,R_2,R_3,R_tot,delta_1N"));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn config_file_and_metadata_reuse() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(
        &cfg,
        r#"{"mode": "two-qubit", "two_qubit": {"gamma0": 1, "gs": 0.5, "Ja": 0.9},
            "integrator": {"t_end": 2}}"#,
    )
    .unwrap();
    let out = tmp.path().join("tq");
    let o = nonrecip(&["two-qubit", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["two_qubit"]["Ja"], 0.9);

    let again = tmp.path().join("again.json");
    fs::write(&again, meta["config"].to_string()).unwrap();
    let out2 = tmp.path().join("tq2");
    let o = nonrecip(&["two-qubit", "--config", again.to_str().unwrap(), "--out", out2.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(fs::read(out.join("two_qubit.csv")).unwrap(), fs::read(out2.join("two_qubit.csv")).unwrap());
}

#[test]
fn mode_conflict_and_bad_values_fail() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    fs::write(&cfg, r#"{"mode": "modes", "bath": {"ferromagnet": {"N": 2}}}"#).unwrap();
    let o = nonrecip(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("`mode`"));

    let o = nonrecip(&["evolve", "--n", "40", "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("N"));

    let o = nonrecip(&["two-qubit", "--gs", "2", "--out", tmp.path().to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("two_qubit"));

    let o = nonrecip(&["sweep", "--variable", "x"]);
    assert!(!o.status.success());
}

#[test]
fn sweep_writes_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nonrecip(&[
        "sweep", "--variable", "N", "--values", "2,3", "--t-end", "1", "--workers", "2", "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = fs::read_to_string(tmp.path().join("summary.csv")).unwrap();
    assert_eq!(s.lines().count(), 3);
    assert!(String::from_utf8_lossy(&o.stdout).contains("max asymmetry at"));
}
