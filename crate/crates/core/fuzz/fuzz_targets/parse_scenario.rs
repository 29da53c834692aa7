#![no_main]

use libfuzzer_sys::fuzz_target;
use mtcache::harness::{PolicyKind, Scenario};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(s) = Scenario::from_json(text) {
        let back = Scenario::from_json(&s.to_json()).expect("valid scenario re-parses");
        assert_eq!(s, back);
        for p in PolicyKind::ALL {
            let _ = s.layout_for(p);
        }
    }
});
