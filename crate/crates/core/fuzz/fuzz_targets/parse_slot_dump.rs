#![no_main]

use libfuzzer_sys::fuzz_target;
use mtcache::cache::dump::parse_dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_dump(text);
    }
});
