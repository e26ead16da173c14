#![no_main]

use faaslight_core::{CallGraph, GraphDocument};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(doc) = serde_json::from_slice::<GraphDocument>(data) else {
        return;
    };
    if let Ok(cg) = CallGraph::from_document(&doc) {
        assert_eq!(CallGraph::from_document(&cg.to_document()).unwrap(), cg);
    }
});
