#![no_main]

use faaslight_core::bench::HandlerRef;
use faaslight_core::entry_recognizer::handler_to_qualname;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Some(h) = HandlerRef::parse(text) {
            assert_eq!(HandlerRef::parse(&h.to_string()), Some(h));
        }
        let _ = handler_to_qualname(text);
    }
});
