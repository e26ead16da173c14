#![no_main]

use faaslight_core::FunctionStore;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(store) = FunctionStore::from_gzip(data) {
        assert_eq!(FunctionStore::from_gzip(&store.to_gzip()).unwrap(), store);
    }
});
