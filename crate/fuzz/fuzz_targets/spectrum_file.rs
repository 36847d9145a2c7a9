#![no_main]

use libfuzzer_sys::fuzz_target;
use stochwave::qwiener::{trace_truncated, NoiseSpectrum};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = NoiseSpectrum::parse_table(text) {
        // Accepted tables hold finite non-negative variances.
        assert!(trace_truncated(&s, 8) >= 0.0);
        assert!(s.eta_table(4).iter().all(|&e| e >= 0.0 && e.is_finite()));
    }
});
