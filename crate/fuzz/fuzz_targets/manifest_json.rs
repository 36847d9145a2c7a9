#![no_main]

use libfuzzer_sys::fuzz_target;
use stochwave::harness::RunManifest;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(m) = RunManifest::from_json(text) else { return };
    let _ = m.config.validate();
    let json = m.to_json().expect("parsed manifest serializes");
    RunManifest::from_json(&json).expect("serialized manifest parses");
});
