#![no_main]

use libfuzzer_sys::fuzz_target;
use nonrecip::ferro::{characteristic_scales, coupling_matrices, MaterialFile};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(material) = MaterialFile::from_json(text) else {
        return;
    };
    if let Ok((p, arr)) = material.resolve() {
        let _ = characteristic_scales(&p, arr.omega_qi_ghz() * 1e9);
        if arr.n_qubits() <= 12 {
            let _ = coupling_matrices(&arr, &p);
        }
    }
});
