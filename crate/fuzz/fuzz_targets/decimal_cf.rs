#![no_main]

use cfrank::certified::parse_decimal;
use cfrank::contfrac::{certified_prefix, Theta, ThetaSpec};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else { return };
    if s.len() > 512 {
        return;
    }
    if let Ok(x) = parse_decimal(s) {
        let _ = certified_prefix(&x, &x, 64);
    }
    if let Ok(t) = Theta::new(ThetaSpec::decimal(s)) {
        // Every certified coefficient past a_0 is positive.
        let a = t.coefficients(t.available()).unwrap();
        assert!(a.iter().skip(1).all(|x| *x > num_bigint::BigInt::from(0)));
    }
});
