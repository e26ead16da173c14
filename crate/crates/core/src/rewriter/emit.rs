use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::FunctionStore;
use crate::file_pruner::{copy_tree, PruneError};
use crate::package_model::{scan_package, PackageMetrics, ScanError};
use crate::{RUNTIME_MODULE, STORE_FILE};

/// Reference loader copied into every optimized package.
pub const RUNTIME_SOURCE: &str = include_str!("../../assets/faaslight_runtime.py");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmitReport {
    pub before: PackageMetrics,
    pub after: PackageMetrics,
    pub rewritten_modules: usize,
    pub store_records: usize,
    pub store_bytes: u64,
    pub loader_bytes: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum EmitError {
    #[error("output directory {0} exists and is not empty")]
    OutDirNotEmpty(PathBuf),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write function store {path}: {source}")]
    StoreWriteFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Copy(#[from] PruneError),
    #[error(transparent)]
    Scan(#[from] ScanError),
}

/// Writes the optimized package: the pruned tree with rewritten modules
/// substituted, the function store and the loader at the package root.
/// Both files are written even when the store is empty.
pub fn emit_package(
    pruned_dir: &Path,
    rewritten: &BTreeMap<PathBuf, String>,
    store: &FunctionStore,
    out_dir: &Path,
) -> Result<EmitReport, EmitError> {
    let before = copy_fresh(pruned_dir, out_dir)?;
    for (rel, text) in rewritten {
        let path = out_dir.join(rel);
        fs::write(&path, text).map_err(|e| EmitError::Io { path, source: e })?;
    }
    let gz = store.to_gzip();
    let store_path = out_dir.join(STORE_FILE);
    fs::write(&store_path, &gz).map_err(|e| EmitError::StoreWriteFailure {
        path: store_path,
        source: e,
    })?;
    let loader = out_dir.join(format!("{RUNTIME_MODULE}.py"));
    fs::write(&loader, RUNTIME_SOURCE).map_err(|e| EmitError::Io {
        path: loader,
        source: e,
    })?;
    let after = scan_package(out_dir)?.metrics;
    Ok(EmitReport {
        before,
        after,
        rewritten_modules: rewritten.len(),
        store_records: store.functions.len(),
        store_bytes: gz.len() as u64,
        loader_bytes: RUNTIME_SOURCE.len() as u64,
    })
}

/// Emits the pruned tree as is, for a plan with nothing to stub: no store,
/// no loader, and after-metrics equal to the pruned metrics.
pub fn emit_unchanged(pruned_dir: &Path, out_dir: &Path) -> Result<EmitReport, EmitError> {
    let before = copy_fresh(pruned_dir, out_dir)?;
    Ok(EmitReport {
        before,
        after: scan_package(out_dir)?.metrics,
        rewritten_modules: 0,
        store_records: 0,
        store_bytes: 0,
        loader_bytes: 0,
    })
}

fn copy_fresh(pruned_dir: &Path, out_dir: &Path) -> Result<PackageMetrics, EmitError> {
    if fs::read_dir(out_dir).is_ok_and(|mut it| it.next().is_some()) {
        return Err(EmitError::OutDirNotEmpty(out_dir.to_path_buf()));
    }
    let before = scan_package(pruned_dir)?.metrics;
    copy_tree(pruned_dir, out_dir)?;
    Ok(before)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::package_model::{compute_metrics, PackageModel};

    fn pruned() -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        fs::write(
            dir.path().join("app.py"),
            "def h(event, context):\n    return event\n",
        )
        .unwrap();
        dir
    }

    #[test]
    fn zero_target_plan_still_ships_loader_and_empty_store() {
        let src = pruned();
        let out = tempfile::tempdir().unwrap();
        let dst = out.path().join("pkg");
        let r = emit_package(
            src.path(),
            &BTreeMap::new(),
            &FunctionStore::default(),
            &dst,
        )
        .unwrap();
        let store = FunctionStore::from_gzip(&fs::read(dst.join(STORE_FILE)).unwrap()).unwrap();
        assert!(store.functions.is_empty());
        assert_eq!(
            fs::read_to_string(dst.join("faaslight_runtime.py")).unwrap(),
            RUNTIME_SOURCE
        );
        let loader = compute_metrics(&PackageModel::from_sources(&[(
            "faaslight_runtime.py",
            RUNTIME_SOURCE,
        )]));
        assert_eq!(
            r.after.size_bytes,
            r.before.size_bytes + r.loader_bytes + r.store_bytes
        );
        assert_eq!(
            r.after.function_count,
            r.before.function_count + loader.function_count
        );
        assert_eq!(
            r.after.lines_of_code,
            r.before.lines_of_code + loader.lines_of_code
        );
    }

    #[test]
    fn unchanged_emission_is_the_pruned_tree() {
        let src = pruned();
        let out = tempfile::tempdir().unwrap();
        let dst = out.path().join("pkg");
        let r = emit_unchanged(src.path(), &dst).unwrap();
        assert_eq!(r.before, r.after);
        assert!(!dst.join(STORE_FILE).exists());
        assert_eq!(
            fs::read(dst.join("app.py")).unwrap(),
            fs::read(src.path().join("app.py")).unwrap()
        );
    }

    #[test]
    fn refuses_non_empty_out_dir() {
        let src = pruned();
        let out = tempfile::tempdir().unwrap();
        fs::write(out.path().join("stale"), "x").unwrap();
        let err = emit_package(
            src.path(),
            &BTreeMap::new(),
            &FunctionStore::default(),
            out.path(),
        )
        .unwrap_err();
        assert!(matches!(err, EmitError::OutDirNotEmpty(_)));
    }
}
