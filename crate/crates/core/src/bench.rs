//! Fresh-process cold-start measurement of a handler, and before/after
//! comparison of two packages.
//!
//! Every run spawns a new interpreter with bytecode caching disabled and an
//! empty cache prefix, so loading time covers parsing and executing the
//! imported modules. The preparation phase is approximated by the time from
//! spawn to the harness's first statement (`preparation_proxy`).

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::package_model::{scan_package, PackageMetrics, ScanError};

pub const SCHEMA: &str = "bench/1";
pub const DEFAULT_RUNS: usize = 20;
pub const ONDEMAND_PREFIX: &str = "FAASLIGHT_ONDEMAND ";
const HARNESS: &str = include_str!("../assets/bench_harness.py");

pub const PHASES: [&str; 4] = ["preparation_proxy", "loading", "execution", "total"];

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub runs: usize,
    pub timeout: Duration,
    /// Concurrent runs; values above 1 are flagged in reports.
    pub parallel: usize,
    pub python: PathBuf,
    /// Record every package function entered during the run.
    pub trace: bool,
    /// Record handler failures in the samples instead of failing the bench.
    pub allow_errors: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            runs: DEFAULT_RUNS,
            timeout: Duration::from_secs(60),
            parallel: 1,
            python: PathBuf::from("python3"),
            trace: false,
            allow_errors: false,
        }
    }
}

/// `module:function` or `module.function`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandlerRef {
    pub module: String,
    pub function: String,
}

impl HandlerRef {
    pub fn parse(s: &str) -> Option<HandlerRef> {
        let (m, f) = s.rsplit_once(':').or_else(|| s.rsplit_once('.'))?;
        (!m.is_empty() && !f.is_empty()).then(|| HandlerRef {
            module: m.to_string(),
            function: f.to_string(),
        })
    }
}

impl std::fmt::Display for HandlerRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.module, self.function)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunError {
    pub phase: String,
    #[serde(rename = "type")]
    pub type_name: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSample {
    pub run: usize,
    pub pid: u32,
    pub spawn_ms: f64,
    pub loading_ms: f64,
    pub execution_ms: f64,
    pub total_ms: f64,
    pub ondemand_keys: Vec<String>,
    /// Handler result as canonical JSON text.
    pub output: Option<String>,
    pub stdout: String,
    pub error: Option<RunError>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<(String, u32, String)>>,
}

impl RunSample {
    /// What must match between equivalent packages.
    pub fn observable(&self) -> (Option<&str>, &str, Option<&str>) {
        (
            self.output.as_deref(),
            self.stdout.as_str(),
            self.error.as_ref().map(|e| e.type_name.as_str()),
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseSummary {
    pub mean: f64,
    pub median: f64,
    pub min: f64,
    pub max: f64,
}

impl PhaseSummary {
    pub fn of(values: &[f64]) -> PhaseSummary {
        if values.is_empty() {
            return PhaseSummary::default();
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        PhaseSummary {
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            min: v[0],
            max: v[n - 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub schema: String,
    pub kind: String,
    pub package: PathBuf,
    pub handler: String,
    pub parallel: usize,
    pub runs: Vec<RunSample>,
    pub summary: BTreeMap<String, PhaseSummary>,
}

impl LatencyReport {
    pub fn mean(&self, phase: &str) -> f64 {
        self.summary.get(phase).map_or(0.0, |s| s.mean)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnDemandKey {
    pub key: String,
    pub runs: usize,
    /// Mean execution time of runs that materialized the key, minus the
    /// before package's mean execution time.
    pub execution_overhead_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReduction {
    pub size_pct: f64,
    pub function_count_pct: f64,
    pub lines_of_code_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub schema: String,
    pub kind: String,
    pub before: LatencyReport,
    pub after: LatencyReport,
    pub reduction_pct: BTreeMap<String, f64>,
    pub metrics_before: PackageMetrics,
    pub metrics_after: PackageMetrics,
    pub metrics_reduction: MetricsReduction,
    pub ondemand: Vec<OnDemandKey>,
    pub outputs_match: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("run {run}: importing the handler failed after {loading_ms:.2} ms: {message}")]
    HandlerImportError {
        run: usize,
        loading_ms: f64,
        message: String,
    },
    #[error("run {run}: handler raised {message}")]
    HandlerRaised { run: usize, message: String },
    #[error("run {run} exceeded the {limit:?} time limit")]
    Timeout { run: usize, limit: Duration },
    #[error("run {run}: interpreter exited without a result ({status}): {stderr}")]
    NoResult {
        run: usize,
        status: String,
        stderr: String,
    },
    #[error("cannot read event file {path}: {source}")]
    EventRead {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid handler reference `{0}` (expected module:function)")]
    BadHandler(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed harness result: {0}")]
    Protocol(String),
    #[error(transparent)]
    Scan(#[from] ScanError),
}

#[derive(Deserialize)]
struct HarnessResult {
    pid: u32,
    spawn_ms: f64,
    loading_ms: f64,
    execution_ms: f64,
    output: Option<String>,
    stdout: String,
    error: Option<RunError>,
    #[serde(default)]
    trace: Option<Vec<(String, u32, String)>>,
}

fn epoch_ns() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos())
}

struct RunContext<'a> {
    pkg_dir: &'a Path,
    handler: &'a HandlerRef,
    event_file: &'a Path,
    harness: &'a Path,
    options: &'a BenchOptions,
}

fn one_run(cx: &RunContext<'_>, run: usize) -> Result<RunSample, BenchError> {
    let scratch = tempfile::tempdir()?;
    let result_path = scratch.path().join("result.json");
    let cache_prefix = scratch.path().join("pycache");
    fs::create_dir(&cache_prefix)?;
    let mut cmd = Command::new(&cx.options.python);
    cmd.arg("-B")
        .arg("-s")
        .arg(cx.harness)
        .arg(cx.pkg_dir)
        .arg(&cx.handler.module)
        .arg(&cx.handler.function)
        .arg(cx.event_file)
        .arg(&result_path)
        .current_dir(cx.pkg_dir)
        .env("PYTHONDONTWRITEBYTECODE", "1")
        .env("PYTHONPYCACHEPREFIX", &cache_prefix)
        .env("PYTHONHASHSEED", "0")
        .env_remove("PYTHONPATH")
        .env_remove("PYTHONSTARTUP")
        .env_remove("FAASLIGHT_STORE")
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::piped());
    if cx.options.trace {
        cmd.env("FAASLIGHT_TRACE", "1");
    }
    let start = Instant::now();
    cmd.env("FAASLIGHT_SPAWN_EPOCH_NS", epoch_ns().to_string());
    let mut child = cmd.spawn()?;
    let stderr = child.stderr.take();
    let reader = std::thread::spawn(move || {
        let mut buf = String::new();
        if let Some(mut s) = stderr {
            use std::io::Read;
            let _ = s.read_to_string(&mut buf);
        }
        buf
    });
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if start.elapsed() > cx.options.timeout {
            let _ = child.kill();
            let _ = child.wait();
            return Err(BenchError::Timeout {
                run,
                limit: cx.options.timeout,
            });
        }
        std::thread::sleep(Duration::from_millis(1));
    };
    let total_ms = start.elapsed().as_secs_f64() * 1000.0;
    let stderr = reader.join().unwrap_or_default();
    let text = match fs::read_to_string(&result_path) {
        Ok(t) => t,
        Err(_) => {
            return Err(BenchError::NoResult {
                run,
                status: status.to_string(),
                stderr: stderr.chars().take(2000).collect(),
            })
        }
    };
    let r: HarnessResult =
        serde_json::from_str(&text).map_err(|e| BenchError::Protocol(e.to_string()))?;
    let ondemand_keys = stderr
        .lines()
        .filter_map(|l| l.strip_prefix(ONDEMAND_PREFIX))
        .map(|k| k.trim().to_string())
        .collect();
    if let (Some(err), false) = (&r.error, cx.options.allow_errors) {
        let message = format!("{}: {}", err.type_name, err.message);
        return Err(if err.phase == "import" {
            BenchError::HandlerImportError {
                run,
                loading_ms: r.loading_ms,
                message,
            }
        } else {
            BenchError::HandlerRaised { run, message }
        });
    }
    Ok(RunSample {
        run,
        pid: r.pid,
        spawn_ms: r.spawn_ms,
        loading_ms: r.loading_ms,
        execution_ms: r.execution_ms,
        total_ms,
        ondemand_keys,
        output: r.output,
        stdout: r.stdout,
        error: r.error,
        trace: r.trace,
    })
}

/// Measures `runs` cold starts of `handler` in `pkg_dir`.
pub fn cold_load(
    pkg_dir: &Path,
    handler: &HandlerRef,
    event_file: &Path,
    options: &BenchOptions,
) -> Result<LatencyReport, BenchError> {
    fs::metadata(event_file).map_err(|e| BenchError::EventRead {
        path: event_file.to_path_buf(),
        source: e,
    })?;
    let pkg_dir = fs::canonicalize(pkg_dir)?;
    let event_file = fs::canonicalize(event_file)?;
    let harness_dir = tempfile::tempdir()?;
    let harness = harness_dir.path().join("faaslight_bench_harness.py");
    fs::write(&harness, HARNESS)?;
    let cx = RunContext {
        pkg_dir: &pkg_dir,
        handler,
        event_file: &event_file,
        harness: &harness,
        options,
    };
    let runs = options.runs.max(1);
    let parallel = options.parallel.max(1);
    let mut samples: Vec<RunSample> = Vec::with_capacity(runs);
    let ids: Vec<usize> = (0..runs).collect();
    for batch in ids.chunks(parallel) {
        if parallel == 1 {
            samples.push(one_run(&cx, batch[0])?);
            continue;
        }
        let results: Vec<Result<RunSample, BenchError>> = std::thread::scope(|s| {
            let cx = &cx;
            let handles: Vec<_> = batch
                .iter()
                .map(|&i| s.spawn(move || one_run(cx, i)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join()
                        .unwrap_or_else(|_| Err(BenchError::Protocol("run thread panicked".into())))
                })
                .collect()
        });
        for r in results {
            samples.push(r?);
        }
    }
    Ok(latency_report(pkg_dir, handler, parallel, samples))
}

fn latency_report(
    package: PathBuf,
    handler: &HandlerRef,
    parallel: usize,
    runs: Vec<RunSample>,
) -> LatencyReport {
    let pick = |f: fn(&RunSample) -> f64| runs.iter().map(f).collect::<Vec<_>>();
    let mut summary = BTreeMap::new();
    summary.insert(
        "preparation_proxy".to_string(),
        PhaseSummary::of(&pick(|s| s.spawn_ms)),
    );
    summary.insert(
        "loading".to_string(),
        PhaseSummary::of(&pick(|s| s.loading_ms)),
    );
    summary.insert(
        "execution".to_string(),
        PhaseSummary::of(&pick(|s| s.execution_ms)),
    );
    summary.insert("total".to_string(), PhaseSummary::of(&pick(|s| s.total_ms)));
    LatencyReport {
        schema: SCHEMA.into(),
        kind: "latency".into(),
        package,
        handler: handler.to_string(),
        parallel,
        runs,
        summary,
    }
}

/// `(before - after) / before` in percent; zero when `before` is zero.
pub fn reduction(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        (before - after) / before * 100.0
    }
}

pub fn metrics_reduction(before: &PackageMetrics, after: &PackageMetrics) -> MetricsReduction {
    MetricsReduction {
        size_pct: reduction(before.size_bytes as f64, after.size_bytes as f64),
        function_count_pct: reduction(before.function_count as f64, after.function_count as f64),
        lines_of_code_pct: reduction(before.lines_of_code as f64, after.lines_of_code as f64),
    }
}

pub fn compare_reports(
    before: LatencyReport,
    after: LatencyReport,
    metrics_before: PackageMetrics,
    metrics_after: PackageMetrics,
) -> ComparisonReport {
    let reduction_pct = PHASES
        .iter()
        .map(|p| (p.to_string(), reduction(before.mean(p), after.mean(p))))
        .collect();
    let mut mismatch = None;
    if let Some(reference) = before.runs.first() {
        for s in before.runs.iter().chain(&after.runs) {
            if s.observable() != reference.observable() {
                mismatch = Some(format!(
                    "run {} differs: expected {:?}, got {:?}",
                    s.run,
                    reference.observable(),
                    s.observable()
                ));
                break;
            }
        }
    }
    let keys: BTreeSet<&String> = after.runs.iter().flat_map(|s| &s.ondemand_keys).collect();
    let base_exec = before.mean("execution");
    let ondemand = keys
        .into_iter()
        .map(|k| {
            let with: Vec<f64> = after
                .runs
                .iter()
                .filter(|s| s.ondemand_keys.contains(k))
                .map(|s| s.execution_ms)
                .collect();
            OnDemandKey {
                key: k.clone(),
                runs: with.len(),
                execution_overhead_ms: PhaseSummary::of(&with).mean - base_exec,
            }
        })
        .collect();
    ComparisonReport {
        schema: SCHEMA.into(),
        kind: "comparison".into(),
        reduction_pct,
        metrics_reduction: metrics_reduction(&metrics_before, &metrics_after),
        metrics_before,
        metrics_after,
        ondemand,
        outputs_match: mismatch.is_none(),
        mismatch,
        before,
        after,
    }
}

/// Benchmarks both packages with the same handler and event and compares them.
/// Runs alternate between the two packages to spread machine noise evenly.
pub fn compare(
    before_dir: &Path,
    after_dir: &Path,
    handler: &HandlerRef,
    event_file: &Path,
    options: &BenchOptions,
) -> Result<ComparisonReport, BenchError> {
    let single = BenchOptions {
        runs: 1,
        ..options.clone()
    };
    let mut before: Option<LatencyReport> = None;
    let mut after: Option<LatencyReport> = None;
    for i in 0..options.runs.max(1) {
        for (dir, slot) in [(before_dir, &mut before), (after_dir, &mut after)] {
            let mut r = cold_load(dir, handler, event_file, &single)?;
            let mut sample = r.runs.remove(0);
            sample.run = i;
            match slot {
                Some(rep) => rep.runs.push(sample),
                None => {
                    r.runs.push(sample);
                    *slot = Some(r);
                }
            }
        }
    }
    let finish =
        |r: LatencyReport| latency_report(r.package, handler, options.parallel.max(1), r.runs);
    let before = finish(before.expect("at least one run"));
    let after = finish(after.expect("at least one run"));
    let mb = scan_package(before_dir)?.metrics;
    let ma = scan_package(after_dir)?.metrics;
    Ok(compare_reports(before, after, mb, ma))
}
