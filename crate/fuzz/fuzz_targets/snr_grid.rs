#![no_main]

use leakbf_sim::parse_snr_grid;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(grid) = parse_snr_grid(s) {
            assert!(!grid.is_empty() && grid.len() <= 10_000);
            assert!(grid.iter().all(|x| x.is_finite()));
        }
    }
});
