#![no_main]

use leakbf_sim::spec::extract_config;
use leakbf_sim::{Assignments, ExperimentSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(config) = extract_config(text) else {
        return;
    };
    if let Ok(spec) = ExperimentSpec::parse(&config, &Assignments::default()) {
        // resolved text reads back to the same spec
        let again = ExperimentSpec::parse(&spec.to_config_text(), &Assignments::default()).expect("round trip");
        assert_eq!(again.to_config_text(), spec.to_config_text());
    }
});
