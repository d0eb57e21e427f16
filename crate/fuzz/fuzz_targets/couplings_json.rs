#![no_main]

use libfuzzer_sys::fuzz_target;
use nonrecip::coupling::{validate, CouplingMatrices};
use nonrecip::modes::diagonalize_decoherence;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(m) = CouplingMatrices::from_json(text) {
        let _ = validate(&m);
        let _ = diagonalize_decoherence(&m);
        let again = CouplingMatrices::from_json(&m.to_json()).expect("serialized couplings parse");
        assert_eq!(again.n(), m.n());
    }
});
