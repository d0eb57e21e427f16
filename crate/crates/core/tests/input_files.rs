//! Checked-in fuzz seeds double as parser fixtures.

use std::fs;
use std::path::PathBuf;

use nonrecip::config::RunConfig;
use nonrecip::coupling::{validate, CouplingMatrices};
use nonrecip::ferro::MaterialFile;
use proptest::prelude::*;

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn coupling_seeds() {
    for (name, text) in seeds("couplings_json") {
        let m = CouplingMatrices::from_json(&text);
        match name.as_str() {
            "not_psd.json" => assert!(m.is_err() || !validate(&m.unwrap()).passed),
            _ => {
                let m = m.unwrap();
                assert!(validate(&m).passed, "{name}");
                assert_eq!(CouplingMatrices::from_json(&m.to_json()).unwrap(), m);
            }
        }
    }
}

#[test]
fn material_seeds() {
    for (name, text) in seeds("material_json") {
        let m = MaterialFile::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        m.resolve().unwrap();
    }
}

#[test]
fn run_config_seeds() {
    for (name, text) in seeds("run_config") {
        let c = RunConfig::from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }
}

proptest! {
    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,200}") {
        let _ = RunConfig::from_json(&s);
        let _ = MaterialFile::from_json(&s);
        let _ = CouplingMatrices::from_json(&s);
    }

    #[test]
    fn material_values_round_trip(k0 in 0.0f64..1.0, n in 1usize..=12, aq in 1.0f64..100.0) {
        let m = MaterialFile { k0, n, a_q_nm: aq, ..MaterialFile::default() };
        let text = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(MaterialFile::from_json(&text).unwrap(), m);
    }
}
