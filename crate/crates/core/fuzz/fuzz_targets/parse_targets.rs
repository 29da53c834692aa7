#![no_main]

use libfuzzer_sys::fuzz_target;
use mtcache::harness::{parse_policy_list, parse_targets};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(targets) = parse_targets(text) {
        assert!(!targets.is_empty());
        assert!(targets.iter().all(|x| (0.0..1.0).contains(x)));
    }
    let _ = parse_policy_list(text);
});
