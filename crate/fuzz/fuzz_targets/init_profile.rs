#![no_main]

use faaslight_core::InitProfile;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let profile = InitProfile::parse(text);
        assert_eq!(InitProfile::parse(&profile.to_string()), profile);
    }
});
