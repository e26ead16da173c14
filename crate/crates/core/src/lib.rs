//! Reachability-driven debloating for serverless Python deployment packages.
//!
//! The pipeline scans a deployment directory into a [`PackageModel`], prunes
//! optional files, recognizes application entries, builds a conservative
//! function-level call graph, and rewrites every unreachable function into a
//! two-statement stub backed by a gzip-compressed function store. The
//! [`bench`] module spawns fresh interpreter processes to measure the
//! resulting cold-start code-loading latency.

pub mod bench;
pub mod callgraph;
pub mod diagnostics;
pub mod entry_recognizer;
pub mod file_pruner;
pub mod package_model;
pub mod pipeline;
pub mod python;
pub mod rewriter;

pub use callgraph::{
    build_call_graph, compute_reachability, CallGraph, GraphDocument, ReachabilityResult,
};
pub use diagnostics::{Diagnostic, Severity};
pub use entry_recognizer::{build_entry_set, EntryError, EntrySet, InitProfile, Provenance};
pub use file_pruner::{prune, PruneOptions, PruneReport, PruneRule, RuleId};
pub use package_model::{
    compute_metrics, scan_package, FunctionId, FunctionRecord, PackageMetrics, PackageModel,
    ScanOptions,
};
pub use rewriter::{
    emit_package, plan_rewrites, rewrite_source, FunctionStore, RewritePlan, SkipReason,
    StoreRecord,
};

/// Name of the loader module injected into every optimized package.
pub const RUNTIME_MODULE: &str = "faaslight_runtime";

/// File name of the function store at the optimized package root.
pub const STORE_FILE: &str = "faaslight_store.json.gz";
