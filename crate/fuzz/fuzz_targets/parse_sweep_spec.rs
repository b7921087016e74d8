#![no_main]

use libfuzzer_sys::fuzz_target;

use hawkmass::config::parse_sweep_spec;

// The range parser must be total, and every accepted range must consist of
// at least one finite value.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(spec) = parse_sweep_spec(text) {
        assert!(!spec.values.is_empty());
        assert!(spec.values.iter().all(|v| v.is_finite()));
    }
});
