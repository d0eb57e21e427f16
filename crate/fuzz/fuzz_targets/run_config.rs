#![no_main]

use libfuzzer_sys::fuzz_target;
use nonrecip::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = RunConfig::from_json(text) {
        let again = RunConfig::from_json(&c.to_json()).expect("serialized config parses");
        assert_eq!(again, c);
        if c.bath.is_some() {
            let _ = c.couplings();
        }
    }
});
