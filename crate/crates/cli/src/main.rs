use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use faaslight_core::bench::{self, BenchOptions, HandlerRef};
use faaslight_core::callgraph::GraphDocument;
use faaslight_core::file_pruner::copy_tree;
use faaslight_core::package_model::scan_package_with;
use faaslight_core::pipeline::{self, PipelineReport, RunConfig};
use faaslight_core::{build_call_graph, prune, PruneOptions, RuleId, ScanOptions};

#[derive(Parser)]
#[command(
    name = "faaslight",
    version,
    about = "Debloat serverless Python deployment packages"
)]
struct Cli {
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Suppress human-readable output and diagnostics.
    #[arg(long, global = true)]
    quiet: bool,
    /// Parent directory for working copies.
    #[arg(long, global = true, value_name = "DIR")]
    workdir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PruneArgs {
    /// Disable a prune rule (venv-tooling, compiled-artifact, dist-metadata, library-tests).
    #[arg(long = "disable", visible_alias = "disable-rule", value_name = "RULE")]
    disabled: Vec<RuleId>,
    /// Glob of files that must never be removed.
    #[arg(long = "keep", value_name = "GLOB")]
    keep: Vec<String>,
    /// Extra library directories, relative to the package root.
    #[arg(
        long = "library-dirs",
        visible_alias = "library-dir",
        value_name = "DIR",
        value_delimiter = ','
    )]
    library_dirs: Vec<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_name = "FILE", default_value = "event.json")]
    event: PathBuf,
    /// module:function
    #[arg(long)]
    handler: String,
    #[arg(long, default_value_t = bench::DEFAULT_RUNS)]
    runs: usize,
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    #[arg(long, default_value_t = 60)]
    timeout_secs: u64,
    #[arg(long, default_value = "python3")]
    python: PathBuf,
    /// Record every package function entered during each run.
    #[arg(long)]
    trace: bool,
    /// Record handler exceptions as outputs instead of failing.
    #[arg(long)]
    allow_errors: bool,
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn options(&self) -> BenchOptions {
        BenchOptions {
            runs: self.runs,
            timeout: Duration::from_secs(self.timeout_secs),
            parallel: self.parallel,
            python: self.python.clone(),
            trace: self.trace,
            allow_errors: self.allow_errors,
        }
    }

    fn handler(&self) -> Result<HandlerRef, Failure> {
        HandlerRef::parse(&self.handler)
            .ok_or_else(|| Failure::config(anyhow!("invalid --handler `{}`", self.handler)))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GraphFormat {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and emit an optimized package.
    Optimize {
        #[arg(long = "in", value_name = "DIR")]
        in_dir: PathBuf,
        #[arg(long = "out", value_name = "DIR")]
        out_dir: PathBuf,
        /// serverless.yml; detected at the package root when omitted.
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
        /// Extra entry qualname.
        #[arg(long = "entry", value_name = "QUALNAME")]
        entries: Vec<String>,
        #[arg(long, value_name = "FILE")]
        init_profile: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        /// Write the call graph as JSON (input for `explain`).
        #[arg(long, value_name = "FILE")]
        graph_out: Option<PathBuf>,
        /// Treat a function as optional regardless of the graph (testing hook).
        #[arg(long = "force-optional", value_name = "QUALNAME")]
        force_optional: Vec<String>,
        #[command(flatten)]
        prune: PruneArgs,
    },
    /// Remove optional files from a copy of the package.
    Prune {
        #[arg(long = "in", value_name = "DIR")]
        in_dir: PathBuf,
        /// Destination of the pruned copy; not needed with --dry-run.
        #[arg(long = "out", value_name = "DIR", required_unless_present = "dry_run")]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        dry_run: bool,
        #[arg(long, value_name = "FILE")]
        report: Option<PathBuf>,
        #[command(flatten)]
        prune: PruneArgs,
    },
    /// Export the function-level call graph.
    Graph {
        #[arg(long = "in", value_name = "DIR")]
        in_dir: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: GraphFormat,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(
            long = "library-dirs",
            visible_alias = "library-dir",
            value_name = "DIR",
            value_delimiter = ','
        )]
        library_dirs: Vec<PathBuf>,
    },
    /// Measure cold-start latency of a handler in fresh processes.
    Bench {
        #[arg(long, value_name = "DIR")]
        pkg: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Benchmark two packages and check their outputs match.
    Compare {
        #[arg(long, value_name = "DIR")]
        before: PathBuf,
        #[arg(long, value_name = "DIR")]
        after: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Explain why a function was classified as it was.
    Explain {
        qualname: String,
        #[arg(long, value_name = "FILE")]
        report: PathBuf,
        #[arg(long, value_name = "FILE")]
        graph: PathBuf,
    },
    /// Print Size, FC and LoC of a package.
    Metrics {
        #[arg(long = "in", value_name = "DIR")]
        in_dir: PathBuf,
        #[arg(
            long = "library-dirs",
            visible_alias = "library-dir",
            value_name = "DIR",
            value_delimiter = ','
        )]
        library_dirs: Vec<PathBuf>,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }

    fn config(error: impl Into<anyhow::Error>) -> Self {
        Failure::new(2, error)
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure::new(1, error)
    }
}

struct Out {
    json: bool,
    quiet: bool,
}

impl Out {
    fn emit(&self, value: &impl serde::Serialize, human: impl FnOnce() -> String) {
        if self.json {
            println!(
                "{}",
                serde_json::to_string_pretty(value).expect("serializable")
            );
        } else if !self.quiet {
            print!("{}", human());
        }
    }

    fn diag(&self, d: &faaslight_core::Diagnostic) {
        if !self.quiet {
            eprintln!("{d}");
        }
    }
}

/// Report body tagged with its schema version.
#[derive(serde::Serialize)]
struct Tagged<'a, T: serde::Serialize> {
    schema: &'static str,
    #[serde(flatten)]
    body: &'a T,
}

const PRUNE_SCHEMA: &str = "prune/1";
const METRICS_SCHEMA: &str = "metrics/1";
const EXPLAIN_SCHEMA: &str = "explain/1";

fn tagged<'a, T: serde::Serialize>(schema: &'static str, body: &'a T) -> Tagged<'a, T> {
    Tagged { schema, body }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(Failure::config)?;
    serde_json::from_str(&text)
        .with_context(|| format!("malformed {}", path.display()))
        .map_err(Failure::config)
}

fn metrics_line(label: &str, m: &faaslight_core::PackageMetrics) -> String {
    format!(
        "{label:<8} size {:>12} B  functions {:>8}  loc {:>9}\n",
        m.size_bytes, m.function_count, m.lines_of_code
    )
}

fn pipeline_summary(r: &PipelineReport) -> String {
    let mut s = String::new();
    s += &metrics_line("before", &r.metrics.before);
    s += &metrics_line("after1", &r.metrics.after1);
    s += &metrics_line("after2", &r.metrics.after2);
    s += &format!(
        "pruned {} files; {} entries; graph {} nodes, {} edges, {} unresolved\n",
        r.prune.removed.len(),
        r.entry_set.len(),
        r.graph_stats.nodes,
        r.graph_stats.edges,
        r.graph_stats.unresolved
    );
    s += &format!(
        "optional {} / indispensable {}; rewritten {}",
        r.graph_stats.optional,
        r.graph_stats.indispensable,
        r.rewrite.targets.len()
    );
    for (reason, n) in &r.rewrite.skipped_by_reason {
        s += &format!(", skipped {} {}", n, reason.as_str());
    }
    s.push('\n');
    s
}

fn scan_options(library_dirs: &[PathBuf]) -> ScanOptions {
    ScanOptions {
        library_dirs: library_dirs.to_vec(),
    }
}

fn prune_options(a: &PruneArgs, dry_run: bool) -> PruneOptions {
    let mut o = PruneOptions {
        keep: a.keep.clone(),
        dry_run,
        ..PruneOptions::default()
    };
    for r in &a.disabled {
        o.disable(*r);
    }
    o
}

fn bench_code(e: &bench::BenchError) -> u8 {
    match e {
        bench::BenchError::BadHandler(_) | bench::BenchError::EventRead { .. } => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let out = Out {
        json: cli.json,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Optimize {
            in_dir,
            out_dir,
            config,
            entries,
            init_profile,
            report,
            graph_out,
            force_optional,
            prune,
        } => {
            let cfg = RunConfig {
                in_dir,
                out_dir,
                config_path: config,
                init_profile,
                entries,
                disabled_prune_rules: prune.disabled,
                keep_patterns: prune.keep,
                library_dirs: prune.library_dirs,
                report_path: report,
                graph_path: graph_out,
                force_optional,
                workdir: cli.workdir,
            };
            let result = pipeline::run_pipeline(&cfg)
                .map_err(|e| Failure::new(e.exit_code() as u8, anyhow::Error::new(e)))?;
            let r = &result.report;
            for d in r
                .diagnostics
                .iter()
                .chain(&r.entry_set.diagnostics)
                .chain(&r.prune.diagnostics)
            {
                out.diag(d);
            }
            out.emit(r, || pipeline_summary(r));
        }
        Command::Prune {
            in_dir,
            out_dir,
            dry_run,
            report,
            prune: args,
        } => {
            let root = match (&out_dir, dry_run) {
                (Some(dst), false) => {
                    if fs::read_dir(dst).is_ok_and(|mut it| it.next().is_some()) {
                        return Err(Failure::config(anyhow!(
                            "{} exists and is not empty",
                            dst.display()
                        )));
                    }
                    copy_tree(&in_dir, dst).map_err(|e| Failure::new(4, e))?;
                    dst.clone()
                }
                _ => in_dir.clone(),
            };
            let pkg = scan_package_with(&root, &scan_options(&args.library_dirs))
                .map_err(Failure::config)?;
            let r = prune(&pkg, &prune_options(&args, dry_run)).map_err(|e| match e {
                faaslight_core::file_pruner::PruneError::RuleConflict { .. }
                | faaslight_core::file_pruner::PruneError::InvalidPattern { .. } => {
                    Failure::config(e)
                }
                e => Failure::new(4, e),
            })?;
            if let Some(p) = report {
                write_json(&p, &tagged(PRUNE_SCHEMA, &r))?;
            }
            for d in &r.diagnostics {
                out.diag(d);
            }
            out.emit(&tagged(PRUNE_SCHEMA, &r), || {
                let mut s = String::new();
                for f in &r.removed {
                    s += &format!(
                        "{}\t{}\t{}\n",
                        f.rule_id,
                        f.size_bytes,
                        f.relative_path.display()
                    );
                }
                s += &metrics_line("before", &r.before);
                s += &metrics_line("after1", &r.after);
                s
            });
        }
        Command::Graph {
            in_dir,
            format,
            out: dest,
            library_dirs,
        } => {
            let pkg = scan_package_with(&in_dir, &scan_options(&library_dirs))
                .map_err(Failure::config)?;
            for d in &pkg.diagnostics {
                out.diag(d);
            }
            let cg = build_call_graph(&pkg);
            let text = match format {
                GraphFormat::Dot => cg.to_dot(),
                GraphFormat::Json => {
                    serde_json::to_string_pretty(&cg.to_document()).map_err(anyhow::Error::new)?
                        + "\n"
                }
            };
            match dest {
                Some(p) => {
                    fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?
                }
                None if !cli.quiet => print!("{text}"),
                None => {}
            }
        }
        Command::Bench { pkg, run } => {
            let handler = run.handler()?;
            let report = bench::cold_load(&pkg, &handler, &run.event, &run.options())
                .map_err(|e| Failure::new(bench_code(&e), e))?;
            if let Some(p) = &run.out {
                write_json(p, &report)?;
            }
            out.emit(&report, || {
                let mut s = format!(
                    "{} runs of {} (parallel {})\n",
                    report.runs.len(),
                    report.handler,
                    report.parallel
                );
                for (phase, v) in &report.summary {
                    s += &format!(
                        "{phase:<18} mean {:>10.2} ms  median {:>10.2} ms\n",
                        v.mean, v.median
                    );
                }
                s
            });
        }
        Command::Compare { before, after, run } => {
            let handler = run.handler()?;
            let report = bench::compare(&before, &after, &handler, &run.event, &run.options())
                .map_err(|e| Failure::new(bench_code(&e), e))?;
            if let Some(p) = &run.out {
                write_json(p, &report)?;
            }
            out.emit(&report, || {
                let mut s = String::new();
                for (phase, pct) in &report.reduction_pct {
                    s += &format!(
                        "{phase:<18} {:>10.2} -> {:>10.2} ms  ({pct:+.2}%)\n",
                        report.before.mean(phase),
                        report.after.mean(phase)
                    );
                }
                let m = &report.metrics_reduction;
                s += &format!(
                    "size {:+.2}%  functions {:+.2}%  loc {:+.2}%\n",
                    m.size_pct, m.function_count_pct, m.lines_of_code_pct
                );
                for k in &report.ondemand {
                    s += &format!(
                        "on-demand {} in {} runs ({:+.2} ms)\n",
                        k.key, k.runs, k.execution_overhead_ms
                    );
                }
                s += if report.outputs_match {
                    "outputs match\n"
                } else {
                    "OUTPUTS DIFFER\n"
                };
                s
            });
            if let Some(m) = &report.mismatch {
                return Err(Failure::new(5, anyhow!("output mismatch: {m}")));
            }
        }
        Command::Explain {
            qualname,
            report,
            graph,
        } => {
            let r: PipelineReport = read_json(&report)?;
            let g: GraphDocument = read_json(&graph)?;
            let e = pipeline::explain(&qualname, &r, &g).map_err(Failure::config)?;
            out.emit(&tagged(EXPLAIN_SCHEMA, &e), || format!("{qualname}: {e}\n"));
        }
        Command::Metrics {
            in_dir,
            library_dirs,
        } => {
            let pkg = scan_package_with(&in_dir, &scan_options(&library_dirs))
                .map_err(Failure::config)?;
            out.emit(&tagged(METRICS_SCHEMA, &pkg.metrics), || {
                metrics_line("package", &pkg.metrics)
            });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let quiet = cli.quiet;
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !quiet {
                eprintln!("error: {:#}", f.error);
            }
            ExitCode::from(f.code)
        }
    }
}
