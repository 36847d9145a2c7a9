#![no_main]

use libfuzzer_sys::fuzz_target;
use stochwave::harness::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_toml_str(text) else { return };
    let _ = cfg.validate();
    if let Ok(again) = cfg.to_toml_string() {
        let back = ExperimentConfig::from_toml_str(&again).expect("re-serialized config parses");
        assert_eq!(back.to_toml_string().ok(), Some(again));
    }
});
