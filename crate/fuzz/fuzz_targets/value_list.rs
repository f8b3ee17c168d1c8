#![no_main]

use libfuzzer_sys::fuzz_target;
use sourcecount::parse::{parse_value_list, MAX_LIST_LEN};

fuzz_target!(|data: &str| {
    if let Ok(values) = parse_value_list(data) {
        assert!(!values.is_empty() && values.len() <= MAX_LIST_LEN);
        assert!(values.iter().all(|v| !v.is_nan()));
    }
});
