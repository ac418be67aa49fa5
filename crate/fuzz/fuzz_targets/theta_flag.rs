#![no_main]

use cfrank::contfrac::{Theta, ThetaSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ThetaSpec::parse_flag(s) else { return };
    if let Ok(t) = Theta::new(spec.with_budget(64)) {
        // A constructed theta hands out its certified prefix without panicking.
        let _ = t.coefficients(t.available().min(64));
        let _ = t.bracket(64);
    }
});
