#![no_main]

use cfrank::constructions::CertificateTrace;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(trace) = serde_json::from_slice::<CertificateTrace>(data) else { return };
    let _ = trace.all_hold();
    let json = serde_json::to_string(&trace).unwrap();
    let back: CertificateTrace = serde_json::from_str(&json).unwrap();
    assert_eq!(back.certificates.len(), trace.certificates.len());
});
