#![no_main]

use cfrank::contfrac::{Theta, ThetaSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(spec) = serde_json::from_slice::<ThetaSpec>(data) else { return };
    let spec = spec.with_budget(64);
    let json = serde_json::to_string(&spec).unwrap();
    let back: ThetaSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);
    let _ = Theta::new(spec);
});
