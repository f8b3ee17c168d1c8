#![no_main]

use libfuzzer_sys::fuzz_target;
use sourcecount::parse::parse_angles_deg;

fuzz_target!(|data: &str| {
    if let Ok(angles) = parse_angles_deg(data) {
        assert!(angles.iter().all(|a| a.is_finite()));
    }
});
