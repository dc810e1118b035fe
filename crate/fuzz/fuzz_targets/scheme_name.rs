#![no_main]

use leakbf::beamforming::Scheme;
use leakbf_sim::parse_schemes;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(scheme) = s.parse::<Scheme>() {
        assert_eq!(scheme.name().parse::<Scheme>().ok(), Some(scheme));
    }
    if let Ok(list) = parse_schemes(s) {
        assert!(!list.is_empty() && list.len() <= Scheme::ALL.len());
    }
});
