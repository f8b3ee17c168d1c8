#![no_main]

use libfuzzer_sys::fuzz_target;
use sourcecount::report::{read_stats_csv, write_stats_csv};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_stats_csv(data) {
        assert!(rows.iter().all(|r| r.index >= 1));
        let mut buf = Vec::new();
        write_stats_csv(&rows, &mut buf).expect("accepted rows serialize");
        let again = read_stats_csv(buf.as_slice()).expect("written rows parse");
        assert_eq!(again.len(), rows.len());
    }
});
