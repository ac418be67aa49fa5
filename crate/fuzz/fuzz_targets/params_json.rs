#![no_main]

use cfrank::cf_params::{validate, CFParams};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    let Ok(p) = CFParams::from_json(s) else { return };
    // Parsed files must survive a round trip unchanged.
    let back = CFParams::from_json(&p.to_json()).unwrap();
    assert_eq!(back, p);
    let _ = p.content_hash();
    if p.check_shape().is_ok() && p.levels() <= 6 && p.c.iter().all(|c| c.len() <= 64) {
        let _ = validate(&p);
    }
});
