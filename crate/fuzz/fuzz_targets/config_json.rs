//! Config files and replayed reports must never panic the loader, and an
//! accepted config must survive a serialize/parse round trip.

#![no_main]

use libfuzzer_sys::fuzz_target;
use waveheat::cli::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(cfg) = ExperimentConfig::from_json(text) else {
        return;
    };
    let _ = cfg.validate();
    let _ = cfg.zone();
    let _ = cfg.samples();
    if let Ok(back) = ExperimentConfig::from_json(&cfg.to_json()) {
        assert_eq!(back, cfg);
    }
});
