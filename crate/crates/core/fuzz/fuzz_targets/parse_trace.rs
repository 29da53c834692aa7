#![no_main]

use libfuzzer_sys::fuzz_target;
use mtcache::workload::trace::{parse_trace, write_trace};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(events) = parse_trace(text) {
        let mut out = Vec::new();
        write_trace(&events, &mut out).unwrap();
        let again = parse_trace(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(events, again);
    }
});
