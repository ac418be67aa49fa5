#![no_main]

use cfrank::certified::CertifiedAngle;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(a) = serde_json::from_slice::<CertifiedAngle>(data) {
        assert!(a.lo() <= a.hi());
        let json = serde_json::to_string(&a).unwrap();
        let back: CertifiedAngle = serde_json::from_str(&json).unwrap();
        assert!(back.lo() <= a.lo() && a.hi() <= back.hi());
    }
    if let Ok(s) = std::str::from_utf8(data) {
        if let Some((c, r)) = s.split_once('±') {
            let _ = CertifiedAngle::from_decimal_ball(c, r);
        }
    }
});
