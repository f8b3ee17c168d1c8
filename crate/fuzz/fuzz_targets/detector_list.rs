#![no_main]

use libfuzzer_sys::fuzz_target;
use sourcecount::parse::parse_detector_list;

fuzz_target!(|data: &str| {
    if let Ok(kinds) = parse_detector_list(data) {
        assert!(!kinds.is_empty() && kinds.len() <= 5);
        for (i, k) in kinds.iter().enumerate() {
            assert!(!kinds[..i].contains(k));
            assert_eq!(
                k.as_str()
                    .parse::<sourcecount::detectors::DetectorKind>()
                    .ok(),
                Some(*k)
            );
        }
    }
});
