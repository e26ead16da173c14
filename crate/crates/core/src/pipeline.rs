//! End-to-end optimization: scan, prune, entries, graph, rewrite, emit.
//!
//! All work happens on a private working copy. The optimized package is
//! assembled in a staging directory next to `out_dir` and renamed into place
//! only after every stage succeeded, so a failed run never leaves a partial
//! `out_dir` behind.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Component, Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::callgraph::{
    build_call_graph, compute_reachability, CallGraph, GraphDocument, ReachabilityResult,
};
use crate::diagnostics::Diagnostic;
use crate::entry_recognizer::{
    build_entry_set, detect_config, EntryError, EntrySet, InitProfile, Provenance,
};
use crate::file_pruner::{copy_tree, prune, PruneError, PruneOptions, PruneReport, RuleId};
use crate::package_model::{
    scan_package_with, FunctionId, PackageMetrics, PackageModel, ScanError, ScanOptions,
};
use crate::rewriter::{
    emit_package, emit_unchanged, plan_rewrites, rewrite_source, RewritePlan, SkipReason,
};

pub const SCHEMA: &str = "pipeline/1";

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub in_dir: PathBuf,
    pub out_dir: PathBuf,
    pub config_path: Option<PathBuf>,
    pub init_profile: Option<PathBuf>,
    /// Qualnames added to the entry set.
    pub entries: Vec<String>,
    pub disabled_prune_rules: Vec<RuleId>,
    pub keep_patterns: Vec<String>,
    pub library_dirs: Vec<PathBuf>,
    pub report_path: Option<PathBuf>,
    pub graph_path: Option<PathBuf>,
    /// Qualnames moved from indispensable to optional regardless of the graph.
    /// Exists to exercise the on-demand fallback.
    pub force_optional: Vec<String>,
    /// Parent directory for the working copy; the system temp dir otherwise.
    pub workdir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Validate,
    Scan,
    Prune,
    Entries,
    Graph,
    Rewrite,
    Emit,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Validate => "validate",
            Stage::Scan => "scan",
            Stage::Prune => "prune",
            Stage::Entries => "entries",
            Stage::Graph => "graph",
            Stage::Rewrite => "rewrite",
            Stage::Emit => "emit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Analysis,
    Emission,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Analysis => 3,
            ErrorClass::Emission => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage} stage failed: {cause}")]
pub struct PipelineError {
    pub stage: Stage,
    pub class: ErrorClass,
    pub cause: Box<dyn std::error::Error + Send + Sync>,
}

impl PipelineError {
    fn new(
        stage: Stage,
        class: ErrorClass,
        source: impl Into<Box<dyn std::error::Error + Send + Sync>>,
    ) -> Self {
        PipelineError {
            stage,
            class,
            cause: source.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class.exit_code()
    }
}

fn scan_error(stage: Stage, e: ScanError) -> PipelineError {
    let class = match e {
        ScanError::RootNotFound(_) | ScanError::NotADirectory(_) => ErrorClass::Config,
        ScanError::Io { .. } => ErrorClass::Analysis,
    };
    PipelineError::new(stage, class, e)
}

fn entry_error(e: EntryError) -> PipelineError {
    let class = match e {
        EntryError::NoEntriesFound => ErrorClass::Analysis,
        _ => ErrorClass::Config,
    };
    PipelineError::new(Stage::Entries, class, e)
}

fn prune_error(e: PruneError) -> PipelineError {
    let class = match e {
        PruneError::RuleConflict { .. } | PruneError::InvalidPattern { .. } => ErrorClass::Config,
        PruneError::WorkdirCreateFailed { .. } | PruneError::Io { .. } => ErrorClass::Emission,
    };
    PipelineError::new(Stage::Prune, class, e)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub unresolved: usize,
    pub indispensable: usize,
    pub optional: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteSummary {
    /// Rewritten qualnames with their store keys.
    pub targets: BTreeMap<String, String>,
    pub skipped: BTreeMap<String, SkipReason>,
    pub skipped_by_reason: BTreeMap<SkipReason, usize>,
    pub store_records: usize,
    pub store_bytes: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageMetrics {
    pub before: PackageMetrics,
    pub after1: PackageMetrics,
    pub after2: PackageMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema: String,
    pub prune: PruneReport,
    pub entry_set: EntrySet,
    pub graph_stats: GraphStats,
    pub forced_optional: BTreeSet<String>,
    pub rewrite: RewriteSummary,
    pub metrics: StageMetrics,
    pub diagnostics: Vec<Diagnostic>,
}

impl PipelineReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Everything the pipeline derived, for callers that want more than the report.
#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub report: PipelineReport,
    pub graph: CallGraph,
    pub reachability: ReachabilityResult,
    pub plan: RewritePlan,
}

/// Lexically resolves `.` and `..` against the current directory.
pub fn normalize(path: &Path) -> std::io::Result<PathBuf> {
    let abs = if path.is_absolute() {
        path.to_path_buf()
    } else {
        std::env::current_dir()?.join(path)
    };
    let mut out = PathBuf::new();
    for c in abs.components() {
        match c {
            Component::ParentDir => {
                out.pop();
            }
            Component::CurDir => {}
            other => out.push(other.as_os_str()),
        }
    }
    Ok(out)
}

/// Like [`normalize`], then resolves symbolic links in the longest existing prefix.
fn resolve(path: &Path) -> std::io::Result<PathBuf> {
    let lexical = normalize(path)?;
    let mut existing = lexical.as_path();
    let mut tail = Vec::new();
    loop {
        if let Ok(real) = fs::canonicalize(existing) {
            let mut p = real;
            for t in tail.iter().rev() {
                p.push(t);
            }
            return Ok(p);
        }
        match (existing.parent(), existing.file_name()) {
            (Some(parent), Some(name)) => {
                tail.push(name.to_os_string());
                existing = parent;
            }
            _ => return Ok(lexical),
        }
    }
}

impl RunConfig {
    /// Normalizes every path and checks the directory constraints.
    pub fn validated(&self) -> Result<RunConfig, PipelineError> {
        let err = |m: String| PipelineError::new(Stage::Validate, ErrorClass::Config, m);
        let io = |p: &Path, e: std::io::Error| err(format!("{}: {e}", p.display()));
        let norm = |p: &Path| resolve(p).map_err(|e| io(p, e));
        let opt = |p: &Option<PathBuf>| p.as_deref().map(norm).transpose();
        let mut cfg = self.clone();
        cfg.in_dir = norm(&self.in_dir)?;
        cfg.out_dir = norm(&self.out_dir)?;
        cfg.config_path = opt(&self.config_path)?;
        cfg.init_profile = opt(&self.init_profile)?;
        cfg.report_path = opt(&self.report_path)?;
        cfg.graph_path = opt(&self.graph_path)?;
        cfg.workdir = opt(&self.workdir)?;
        if !cfg.in_dir.is_dir() {
            return Err(err(format!(
                "input directory {} does not exist",
                cfg.in_dir.display()
            )));
        }
        if cfg.in_dir == cfg.out_dir {
            return Err(err("input and output directories must differ".into()));
        }
        if cfg.out_dir.starts_with(&cfg.in_dir) || cfg.in_dir.starts_with(&cfg.out_dir) {
            return Err(err(
                "input and output directories must not contain each other".into(),
            ));
        }
        if fs::read_dir(&cfg.out_dir).is_ok_and(|mut it| it.next().is_some()) {
            return Err(err(format!(
                "output directory {} exists and is not empty",
                cfg.out_dir.display()
            )));
        }
        if cfg.out_dir.exists() && !cfg.out_dir.is_dir() {
            return Err(err(format!(
                "output path {} is not a directory",
                cfg.out_dir.display()
            )));
        }
        for p in cfg.config_path.iter().chain(&cfg.init_profile) {
            if !p.is_file() {
                return Err(err(format!("{} does not exist", p.display())));
            }
        }
        Ok(cfg)
    }

    fn scan_options(&self) -> ScanOptions {
        ScanOptions {
            library_dirs: self.library_dirs.clone(),
        }
    }
}

fn relocate(diags: &mut [Diagnostic], from: &Path, to: &Path) {
    let from = crate::package_model::display(from);
    let to = crate::package_model::display(to);
    for d in diags {
        if let Some(rest) = d.path.strip_prefix(&from) {
            d.path = format!("{to}{rest}");
        }
    }
}

fn entry_files(pkg: &PackageModel, entries: &EntrySet) -> BTreeSet<PathBuf> {
    entries
        .handlers
        .iter()
        .chain(&entries.user_declared)
        .filter_map(|q| pkg.lookup(q))
        .map(|id| pkg.path_of(id).to_path_buf())
        .collect()
}

fn entries_for(
    pkg: &PackageModel,
    cfg: &RunConfig,
    config_path: Option<&Path>,
) -> Result<EntrySet, EntryError> {
    let profile = cfg
        .init_profile
        .as_deref()
        .map(InitProfile::load)
        .transpose()?;
    build_entry_set(pkg, config_path, &cfg.entries, profile.as_ref())
}

/// Runs every stage and writes the optimized package to `cfg.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<PipelineOutput, PipelineError> {
    let cfg = cfg.validated()?;
    let emit_err =
        |stage: Stage, e: std::io::Error| PipelineError::new(stage, ErrorClass::Emission, e);
    let config_path = cfg
        .config_path
        .clone()
        .or_else(|| detect_config(&cfg.in_dir));

    let work_parent = cfg.workdir.clone().unwrap_or_else(std::env::temp_dir);
    fs::create_dir_all(&work_parent).map_err(|e| emit_err(Stage::Scan, e))?;
    let work = tempfile::Builder::new()
        .prefix("faaslight-work-")
        .tempdir_in(&work_parent)
        .map_err(|e| emit_err(Stage::Scan, e))?;
    let pruned_dir = work.path().join("pkg");
    copy_tree(&cfg.in_dir, &pruned_dir).map_err(prune_error)?;

    let original = scan_package_with(&pruned_dir, &cfg.scan_options())
        .map_err(|e| scan_error(Stage::Scan, e))?;
    let before = original.metrics;
    let protected = match entries_for(&original, &cfg, config_path.as_deref()) {
        Ok(set) => entry_files(&original, &set),
        Err(EntryError::NoEntriesFound) => BTreeSet::new(),
        Err(e) => return Err(entry_error(e)),
    };

    let mut options = PruneOptions {
        keep: cfg.keep_patterns.clone(),
        protected,
        ..PruneOptions::default()
    };
    for r in &cfg.disabled_prune_rules {
        options.disable(*r);
    }
    let prune_report = prune(&original, &options).map_err(prune_error)?;
    drop(original);

    let pkg = scan_package_with(&pruned_dir, &cfg.scan_options())
        .map_err(|e| scan_error(Stage::Prune, e))?;
    let after1 = pkg.metrics;
    let mut entry_set = entries_for(&pkg, &cfg, config_path.as_deref()).map_err(entry_error)?;
    relocate(&mut entry_set.diagnostics, &pruned_dir, &cfg.in_dir);

    let graph = build_call_graph(&pkg);
    let mut reach = compute_reachability(&graph, &entry_set)
        .map_err(|e| PipelineError::new(Stage::Graph, ErrorClass::Analysis, e))?;
    let mut forced = BTreeSet::new();
    for q in &cfg.force_optional {
        if pkg.lookup(q).is_none() {
            return Err(PipelineError::new(
                Stage::Graph,
                ErrorClass::Config,
                format!("--force-optional {q} does not match any function"),
            ));
        }
        if reach.indispensable.remove(q) {
            reach.optional.insert(q.clone());
        }
        forced.insert(q.clone());
    }

    let plan = plan_rewrites(&pkg, &reach.optional);
    let rewritten = rewrite_source(&pkg, &plan)
        .map_err(|e| PipelineError::new(Stage::Rewrite, ErrorClass::Emission, e))?;

    let out_parent = cfg
        .out_dir
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("/"));
    fs::create_dir_all(&out_parent).map_err(|e| emit_err(Stage::Emit, e))?;
    let staging = tempfile::Builder::new()
        .prefix(".faaslight-staging-")
        .tempdir_in(&out_parent)
        .map_err(|e| emit_err(Stage::Emit, e))?;
    let staged = staging.path().join("pkg");
    let emitted = if rewritten.store.functions.is_empty() {
        emit_unchanged(&pruned_dir, &staged)
    } else {
        emit_package(&pruned_dir, &rewritten.modules, &rewritten.store, &staged)
    }
    .map_err(|e| PipelineError::new(Stage::Emit, ErrorClass::Emission, e))?;

    let mut diagnostics = pkg.diagnostics.clone();
    relocate(&mut diagnostics, &pruned_dir, &cfg.in_dir);
    let report = PipelineReport {
        schema: SCHEMA.into(),
        prune: prune_report,
        graph_stats: GraphStats {
            nodes: graph.nodes.len(),
            edges: graph.edges.len(),
            unresolved: graph.unresolved.len(),
            indispensable: reach.indispensable.len(),
            optional: reach.optional.len(),
        },
        entry_set,
        forced_optional: forced,
        rewrite: RewriteSummary {
            targets: plan
                .targets
                .iter()
                .map(|t| (t.qualname.clone(), t.store_key.clone()))
                .collect(),
            skipped: plan.skipped.iter().cloned().collect(),
            skipped_by_reason: plan.skipped_by_reason(),
            store_records: emitted.store_records,
            store_bytes: emitted.store_bytes,
        },
        metrics: StageMetrics {
            before,
            after1,
            after2: emitted.after,
        },
        diagnostics,
    };

    if cfg.out_dir.exists() {
        fs::remove_dir(&cfg.out_dir).map_err(|e| emit_err(Stage::Emit, e))?;
    }
    fs::rename(&staged, &cfg.out_dir).map_err(|e| emit_err(Stage::Emit, e))?;
    if let Some(p) = &cfg.report_path {
        fs::write(p, report.to_json()).map_err(|e| emit_err(Stage::Emit, e))?;
    }
    if let Some(p) = &cfg.graph_path {
        let text = serde_json::to_string_pretty(&graph.to_document()).expect("graph serializes");
        fs::write(p, text + "\n").map_err(|e| emit_err(Stage::Emit, e))?;
    }
    Ok(PipelineOutput {
        report,
        graph,
        reachability: reach,
        plan,
    })
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExplainError {
    #[error("{0} is not a function in the analyzed package")]
    UnknownQualname(String),
    #[error(transparent)]
    Graph(#[from] crate::callgraph::GraphError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "status")]
pub enum Disposition {
    Kept,
    Rewritten { store_key: String },
    Skipped { reason: SkipReason },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Explanation {
    pub qualname: String,
    pub indispensable: bool,
    pub entry: Option<Provenance>,
    pub forced_optional: bool,
    /// Shortest entry-to-function path, both ends included.
    pub path: Option<Vec<String>>,
    pub disposition: Disposition,
}

impl Explanation {
    /// Number of call edges on the path.
    pub fn hops(&self) -> Option<usize> {
        self.path.as_ref().map(|p| p.len() - 1)
    }
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.entry, &self.path) {
            (Some(p), _) if !self.forced_optional => {
                write!(f, "entry (provenance: {})", p.as_str())?
            }
            (_, Some(path)) if !self.forced_optional => write!(
                f,
                "indispensable; path ({} hops): {}",
                path.len() - 1,
                path.join(" -> ")
            )?,
            _ if self.forced_optional => write!(f, "optional (forced)")?,
            _ => write!(f, "optional; no path from any entry")?,
        }
        match &self.disposition {
            Disposition::Kept => Ok(()),
            Disposition::Rewritten { store_key } => {
                write!(f, "; rewritten to stub (key: {store_key})")
            }
            Disposition::Skipped { reason } => write!(f, "; skipped: {}", reason.as_str()),
        }
    }
}

/// Why `qualname` was classified as it was, from a pipeline report and the
/// exported call graph.
pub fn explain(
    qualname: &str,
    report: &PipelineReport,
    graph: &GraphDocument,
) -> Result<Explanation, ExplainError> {
    let cg = CallGraph::from_document(graph)?;
    let target = cg
        .id_of(qualname)
        .ok_or_else(|| ExplainError::UnknownQualname(qualname.to_string()))?;
    let roots: Vec<FunctionId> = report.entry_set.all().filter_map(|q| cg.id_of(q)).collect();
    let path = cg.shortest_path(&roots, target).map(|p| {
        p.into_iter()
            .map(|id| cg.nodes[id.0].clone())
            .collect::<Vec<_>>()
    });
    let forced = report.forced_optional.contains(qualname);
    let disposition = if let Some(key) = report.rewrite.targets.get(qualname) {
        Disposition::Rewritten {
            store_key: key.clone(),
        }
    } else if let Some(reason) = report.rewrite.skipped.get(qualname) {
        Disposition::Skipped { reason: *reason }
    } else {
        Disposition::Kept
    };
    Ok(Explanation {
        qualname: qualname.to_string(),
        indispensable: path.is_some() && !forced,
        entry: report.entry_set.provenance.get(qualname).copied(),
        forced_optional: forced,
        path,
        disposition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(root: &Path, rel: &str, text: &str) {
        let p = root.join(rel);
        fs::create_dir_all(p.parent().unwrap()).unwrap();
        fs::write(p, text).unwrap();
    }

    fn app(root: &Path) {
        write(
            root,
            "handler.py",
            "import util\n\ndef handle(event, context):\n    return util.used(event)\n",
        );
        write(
            root,
            "util.py",
            "def used(x):\n    return helper(x)\n\ndef helper(x):\n    return x\n\ndef unused(x):\n    y = x * 2\n    z = y + 1\n    return [y, z]\n\n@staticmethod\ndef deco():\n    pass\n",
        );
        write(
            root,
            "tests/test_util.py",
            "def test_one():\n    assert True\n",
        );
        write(root, "dep/__init__.py", "def api():\n    return 1\n");
        write(
            root,
            "dep/tests/test_api.py",
            "def test_api():\n    assert True\n",
        );
        write(root, "dep-1.0.dist-info/top_level.txt", "dep\n");
        write(root, "util.pyc", "junk");
    }

    fn config(tmp: &Path) -> RunConfig {
        let input = tmp.join("in");
        app(&input);
        RunConfig {
            in_dir: input,
            out_dir: tmp.join("out"),
            workdir: Some(tmp.join("work")),
            ..RunConfig::default()
        }
    }

    #[test]
    fn end_to_end() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = config(tmp.path());
        let out = run_pipeline(&cfg).unwrap();
        let r = &out.report;
        assert_eq!(r.schema, SCHEMA);
        let removed: Vec<String> = r
            .prune
            .removed
            .iter()
            .map(|f| f.relative_path.display().to_string())
            .collect();
        assert_eq!(
            removed,
            [
                "dep/tests/test_api.py",
                "dep-1.0.dist-info/top_level.txt",
                "util.pyc"
            ]
        );
        assert!(r.rewrite.targets.contains_key("util.unused"));
        assert!(!r.rewrite.targets.contains_key("util.helper"));
        let m = r.metrics;
        assert!(m.after1.size_bytes < m.before.size_bytes);
        assert!(m.after1.function_count < m.before.function_count);
        let loader = PackageModel::from_sources(&[(
            "faaslight_runtime.py",
            crate::rewriter::RUNTIME_SOURCE,
        )]);
        assert_eq!(
            m.after2.function_count,
            m.after1.function_count - r.rewrite.targets.len() as u64
                + loader.metrics.function_count
        );
        let out_dir = tmp.path().join("out");
        assert!(out_dir.join(crate::STORE_FILE).is_file());
        assert!(out_dir.join("faaslight_runtime.py").is_file());
        assert!(out_dir.join("tests/test_util.py").exists());
        assert!(!out_dir.join("dep/tests").exists());
        assert!(fs::read_dir(tmp.path().join("work"))
            .unwrap()
            .next()
            .is_none());
        let leftovers: Vec<_> = fs::read_dir(tmp.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(".faaslight"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn failure_leaves_no_output() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config(tmp.path());
        cfg.entries = vec!["util.missing".into()];
        let err = run_pipeline(&cfg).unwrap_err();
        assert_eq!(err.stage, Stage::Entries);
        assert_eq!(err.exit_code(), 2);
        assert!(!tmp.path().join("out").exists());

        let mut cfg = config(tmp.path());
        cfg.force_optional = vec!["nope.f".into()];
        assert_eq!(run_pipeline(&cfg).unwrap_err().exit_code(), 2);
        assert!(!tmp.path().join("out").exists());
    }

    #[test]
    fn validation() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config(tmp.path());
        cfg.out_dir = cfg.in_dir.join("..").join("in");
        let err = cfg.validated().unwrap_err();
        assert_eq!((err.stage, err.exit_code()), (Stage::Validate, 2));
        cfg.out_dir = cfg.in_dir.join("sub");
        assert!(cfg.validated().is_err());
        cfg.out_dir = tmp.path().join("./x/../out");
        let v = cfg.validated().unwrap();
        assert_eq!(v.out_dir, fs::canonicalize(tmp.path()).unwrap().join("out"));
    }

    #[test]
    fn reproducible() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config(tmp.path());
        let a = run_pipeline(&cfg).unwrap().report;
        cfg.out_dir = tmp.path().join("out2");
        let b = run_pipeline(&cfg).unwrap().report;
        assert_eq!(a.to_json(), b.to_json());
        for rel in [
            "util.py",
            "handler.py",
            crate::STORE_FILE,
            "faaslight_runtime.py",
        ] {
            assert_eq!(
                fs::read(tmp.path().join("out").join(rel)).unwrap(),
                fs::read(tmp.path().join("out2").join(rel)).unwrap(),
                "{rel}"
            );
        }
    }

    #[test]
    fn forced_optional_and_explain() {
        let tmp = tempfile::tempdir().unwrap();
        let mut cfg = config(tmp.path());
        cfg.force_optional = vec!["util.helper".into()];
        let out = run_pipeline(&cfg).unwrap();
        let doc = out.graph.to_document();
        let r = &out.report;
        assert!(r.rewrite.targets.contains_key("util.helper"));

        let e = explain("handler.handle", r, &doc).unwrap();
        assert_eq!(e.to_string(), "entry (provenance: signature-match)");
        let e = explain("util.used", r, &doc).unwrap();
        assert_eq!(e.hops(), Some(1));
        assert_eq!(
            e.to_string(),
            "indispensable; path (1 hops): handler.handle -> util.used"
        );
        let e = explain("util.helper", r, &doc).unwrap();
        assert!(e.forced_optional && !e.indispensable);
        assert_eq!(
            e.to_string(),
            "optional (forced); rewritten to stub (key: util.helper)"
        );
        let e = explain("util.unused", r, &doc).unwrap();
        assert!(e
            .to_string()
            .starts_with("optional; no path from any entry; rewritten"));
        assert_eq!(
            explain("x.y", r, &doc).unwrap_err(),
            ExplainError::UnknownQualname("x.y".into())
        );
    }
}
