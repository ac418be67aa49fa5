#![no_main]

use cfrank::experiment::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(cfg) = ExperimentConfig::from_json(s) else { return };
    let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(back.hash(), cfg.hash());
});
