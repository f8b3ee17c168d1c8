#![no_main]

use libfuzzer_sys::fuzz_target;
use sourcecount::report::ErrorRateReport;

// Anything accepted must survive a write/read cycle unchanged.
fuzz_target!(|data: &[u8]| {
    if let Ok(report) = ErrorRateReport::read_csv(data) {
        let text = report.to_csv_string().expect("accepted report serializes");
        let again = ErrorRateReport::read_csv(text.as_bytes()).expect("written report parses");
        assert_eq!(again.rows.len(), report.rows.len());
        for (a, b) in again.rows.iter().zip(&report.rows) {
            assert_eq!(
                (a.detector, a.axis, a.trials, a.errors),
                (b.detector, b.axis, b.trials, b.errors)
            );
            assert!(a.axis_value.to_bits() == b.axis_value.to_bits() || a.axis_value.is_nan());
        }
    }
});
