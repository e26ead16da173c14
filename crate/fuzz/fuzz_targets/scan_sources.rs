#![no_main]
//! Whole analysis over arbitrary module texts; NUL bytes split the input
//! into up to four files.

use faaslight_core::python::parse_module;
use faaslight_core::{
    build_call_graph, build_entry_set, compute_reachability, plan_rewrites, rewrite_source,
    PackageModel,
};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let names = ["app.py", "lib/__init__.py", "lib/a.py", "lib/b.py"];
    let sources: Vec<(&str, &str)> = names.iter().copied().zip(text.split('\0')).collect();
    let pkg = PackageModel::from_sources(&sources);
    let cg = build_call_graph(&pkg);
    let Ok(entries) = build_entry_set(&pkg, None, &[], None) else {
        return;
    };
    let reach = compute_reachability(&cg, &entries).expect("entries come from the same package");
    assert_eq!(
        reach.indispensable.len() + reach.optional.len(),
        cg.nodes.len()
    );
    let plan = plan_rewrites(&pkg, &reach.optional);
    let out = rewrite_source(&pkg, &plan).expect("rewrite of a parsed package");
    for (path, module) in &out.modules {
        assert!(
            parse_module(module, &path.to_string_lossy()).is_ok(),
            "{module}"
        );
    }
});
