//! Acceptance gate. Runs every criterion in-process, prints one
//! `PASS`/`FAIL` line per criterion and exits nonzero if any failed.
//!
//! Tolerances are the constants below; they are not configurable.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use common::{generate_fat, invoke, load_fixture, optimize, random_package, FatFixture, Fixture};
use faaslight_core::bench::{compare, BenchOptions, HandlerRef, RunSample};
use faaslight_core::callgraph::{build_call_graph, compute_reachability};
use faaslight_core::entry_recognizer::build_entry_set;
use faaslight_core::pipeline::PipelineOutput;
use faaslight_core::rewriter::FunctionStore;
use faaslight_core::{PackageMetrics, PackageModel, STORE_FILE};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(120);
const MIN_FIXTURES: usize = 5;
const PROPERTY_PACKAGES: u64 = 256;
const PROPERTY_SEED: u64 = 0x00AC_CE97;
const LATENCY_RUNS: usize = 20;
const LATENCY_MIN_REDUCTION_PCT: f64 = 30.0;
const LATENCY_BUDGET: Duration = Duration::from_secs(300);
const STORE_MIN_RECORDS: usize = 4500;
const STORE_MAX_BYTES: u64 = 2 * 1024 * 1024;
const FAT_MIN_FC_REDUCTION_PCT: f64 = 50.0;
/// Fixtures whose every indispensable function is forced optional in turn.
const FALLBACK_FIXTURES: [&str; 3] = ["app-golden", "app-cha", "app-nested"];
/// Reachable fat-fixture functions forced optional, chosen by seeded sampling.
const FALLBACK_FAT_SAMPLES: usize = 3;

const FAILURES_SHOWN: usize = 50;

type Outcome = Result<String, String>;

struct Optimized {
    fixture: Fixture,
    out: PathBuf,
    result: PipelineOutput,
}

struct Context {
    _tmp: tempfile::TempDir,
    scratch: PathBuf,
    apps: Vec<Optimized>,
    fat: FatFixture,
    prepare_time: Duration,
}

impl Context {
    fn prepare() -> Context {
        let start = Instant::now();
        let tmp = tempfile::tempdir().unwrap();
        let fat = generate_fat(&tmp.path().join("fat"), common::FAT_SEED);
        let mut fixtures: Vec<Fixture> = common::STATIC_FIXTURES
            .iter()
            .map(|n| load_fixture(n))
            .collect();
        fixtures.push(fat.fixture.clone());
        let apps = fixtures
            .into_iter()
            .map(|fixture| {
                let out = tmp.path().join("out").join(&fixture.name);
                let result = optimize(&fixture.pkg, &out, &[]);
                Optimized {
                    fixture,
                    out,
                    result,
                }
            })
            .collect();
        let scratch = tmp.path().join("scratch");
        fs::create_dir_all(&scratch).unwrap();
        Context {
            scratch,
            _tmp: tmp,
            apps,
            fat,
            prepare_time: start.elapsed(),
        }
    }

    fn app(&self, name: &str) -> &Optimized {
        self.apps.iter().find(|a| a.fixture.name == name).unwrap()
    }

    fn fat_app(&self) -> &Optimized {
        self.app(&self.fat.fixture.name)
    }
}

/// What a caller can observe from one invocation: the JSON result, printed
/// output, and the exception type and message.
fn observed(s: &RunSample) -> (Option<String>, String, Option<(String, String)>) {
    (
        s.output.clone(),
        s.stdout.clone(),
        s.error
            .as_ref()
            .map(|e| (e.type_name.clone(), e.message.clone())),
    )
}

fn check(cond: bool, failures: &mut Vec<String>, msg: impl FnOnce() -> String) {
    if !cond {
        failures.push(msg());
    }
}

fn verdict(failures: Vec<String>, detail: String) -> Outcome {
    if failures.is_empty() {
        Ok(detail)
    } else {
        let shown: Vec<&str> = failures
            .iter()
            .take(FAILURES_SHOWN)
            .map(String::as_str)
            .collect();
        Err(format!(
            "{} violation(s): {}",
            failures.len(),
            shown.join("; ")
        ))
    }
}

fn functional_equivalence(cx: &Context) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut cases = 0;
    check(cx.apps.len() >= MIN_FIXTURES, &mut failures, || {
        format!("only {} fixtures", cx.apps.len())
    });
    for app in &cx.apps {
        for case in &app.fixture.cases {
            cases += 1;
            let before = invoke(&app.fixture.pkg, &app.fixture, case);
            let after = invoke(&app.out, &app.fixture, case);
            check(observed(&before) == observed(&after), &mut failures, || {
                format!(
                    "{} {} {}: {:?} != {:?}",
                    app.fixture.name,
                    case.handler,
                    case.event.display(),
                    observed(&before),
                    observed(&after)
                )
            });
        }
    }
    let elapsed = start.elapsed() + cx.prepare_time;
    check(elapsed <= EQUIVALENCE_BUDGET, &mut failures, || {
        format!("took {elapsed:.1?}, budget {EQUIVALENCE_BUDGET:?}")
    });
    verdict(
        failures,
        format!(
            "{} fixtures, {cases} cases identical in {elapsed:.1?}",
            cx.apps.len()
        ),
    )
}

/// Forces `forced` optional and checks every case against the original and
/// the unforced optimized package. A forced function the rewriter declines
/// must stay in place; one it stubs must add exactly its own key to the
/// keys the unforced package already materializes on demand.
fn fallback_for(cx: &Context, app: &Optimized, forced: &str, failures: &mut Vec<String>) -> Kind {
    let out = cx
        .scratch
        .join(format!("{}-{}", app.fixture.name, forced.replace('.', "_")));
    let result = optimize(&app.fixture.pkg, &out, &[forced]);
    let key = result.report.rewrite.targets.get(forced).cloned();
    let skipped = result.report.rewrite.skipped.get(forced).copied();
    check(key.is_some() != skipped.is_some(), failures, || {
        format!(
            "{}: forced {forced} is neither rewritten nor skipped",
            app.fixture.name
        )
    });
    let mut baseline = BTreeSet::new();
    let mut keys = BTreeSet::new();
    for case in &app.fixture.cases {
        let before = invoke(&app.fixture.pkg, &app.fixture, case);
        let unforced = invoke(&app.out, &app.fixture, case);
        let after = invoke(&out, &app.fixture, case);
        check(observed(&before) == observed(&after), failures, || {
            format!(
                "{} {forced} {}: outputs differ",
                app.fixture.name,
                case.event.display()
            )
        });
        baseline.extend(unforced.ondemand_keys.iter().cloned());
        keys.extend(after.ondemand_keys.iter().cloned());
    }
    let mut expected = baseline;
    expected.extend(key.iter().cloned());
    check(keys == expected, failures, || {
        format!(
            "{} {forced}: on-demand keys {keys:?}, expected {expected:?}",
            app.fixture.name
        )
    });
    let _ = fs::remove_dir_all(&out);
    if key.is_some() {
        Kind::Stubbed
    } else {
        Kind::Declined
    }
}

enum Kind {
    Stubbed,
    Declined,
}

fn fallback_soundness(cx: &Context) -> Outcome {
    let mut failures = Vec::new();
    let (mut stubbed, mut declined) = (0, 0);
    let mut tally = |k: Kind| match k {
        Kind::Stubbed => stubbed += 1,
        Kind::Declined => declined += 1,
    };
    for name in FALLBACK_FIXTURES {
        let app = cx.app(name);
        for f in &app.result.reachability.indispensable {
            tally(fallback_for(cx, app, f, &mut failures));
        }
    }
    let fat = cx.fat_app();
    let mut rng = ChaCha8Rng::seed_from_u64(common::FAT_SEED);
    let pool: Vec<&String> = cx.fat.reachable.iter().collect();
    for f in pool.choose_multiple(&mut rng, FALLBACK_FAT_SAMPLES) {
        tally(fallback_for(cx, fat, f, &mut failures));
    }
    verdict(
        failures,
        format!("{stubbed} forced stubs each identical with exactly one added on-demand key; {declined} declined by the rewriter and left intact"),
    )
}

/// Reflexive transitive closure by repeated boolean matrix squaring.
#[allow(clippy::needless_range_loop)]
fn closure_by_squaring(nodes: &[String], edges: &BTreeSet<(String, String)>) -> Vec<Vec<bool>> {
    let idx: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = nodes.len();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in edges {
        m[idx[a.as_str()]][idx[b.as_str()]] = true;
    }
    loop {
        let mut next = m.clone();
        for i in 0..n {
            for k in 0..n {
                if m[i][k] {
                    for j in 0..n {
                        next[i][j] |= m[k][j];
                    }
                }
            }
        }
        if next == m {
            return m;
        }
        m = next;
    }
}

fn reachability_oracle(cx: &Context) -> Outcome {
    let app = cx.app("app-golden");
    let golden = |n: &str| -> BTreeSet<String> { app.fixture.golden(n).into_iter().collect() };
    let mut failures = Vec::new();
    let golden_edges: BTreeSet<(String, String)> = golden("edges.txt")
        .into_iter()
        .map(|l| {
            let (a, b) = l
                .split_once(" -> ")
                .expect("edge line is `caller -> callee`");
            (a.to_string(), b.to_string())
        })
        .collect();
    let golden_entries = golden("entries.txt");
    let golden_indispensable = golden("indispensable.txt");

    let pkg = faaslight_core::scan_package(&app.fixture.pkg).unwrap();
    let cg = build_call_graph(&pkg);
    let entries = build_entry_set(&pkg, None, &[], None).unwrap();
    let reach = compute_reachability(&cg, &entries).unwrap();
    let tool_entries: BTreeSet<String> = entries.all().map(str::to_string).collect();

    check(cg.edge_names() == golden_edges, &mut failures, || {
        let extra: Vec<_> = cg.edge_names().difference(&golden_edges).cloned().collect();
        let missing: Vec<_> = golden_edges.difference(&cg.edge_names()).cloned().collect();
        format!("edges differ: extra {extra:?}, missing {missing:?}")
    });
    check(tool_entries == golden_entries, &mut failures, || {
        format!("entries {tool_entries:?} != {golden_entries:?}")
    });
    check(
        reach.indispensable == golden_indispensable,
        &mut failures,
        || {
            format!(
                "indispensable {:?} != {golden_indispensable:?}",
                reach.indispensable
            )
        },
    );

    let m = closure_by_squaring(&cg.nodes, &golden_edges);
    let oracle: BTreeSet<String> = cg
        .nodes
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            golden_entries
                .iter()
                .any(|e| m[cg.nodes.iter().position(|n| n == e).unwrap()][*j])
        })
        .map(|(_, n)| n.clone())
        .collect();
    check(reach.indispensable == oracle, &mut failures, || {
        format!(
            "indispensable {:?} != closure oracle {oracle:?}",
            reach.indispensable
        )
    });
    check(
        app.result.report.graph_stats.nodes == 12,
        &mut failures,
        || {
            format!(
                "golden app has {} functions, expected 12",
                app.result.report.graph_stats.nodes
            )
        },
    );
    verdict(
        failures,
        format!(
            "{} edges, {} indispensable, matches golden files and closure oracle",
            golden_edges.len(),
            oracle.len()
        ),
    )
}

fn partition_properties(_cx: &Context) -> Outcome {
    let mut failures = Vec::new();
    let mut functions = 0;
    for seed in 0..PROPERTY_PACKAGES {
        let mut rng = ChaCha8Rng::seed_from_u64(PROPERTY_SEED ^ seed);
        let sources = random_package(&mut rng);
        let pkg = PackageModel::from_sources(&sources);
        let cg = build_call_graph(&pkg);
        functions += cg.nodes.len();
        let entries = match build_entry_set(&pkg, None, &[], None) {
            Ok(e) => e,
            Err(e) => {
                failures.push(format!("seed {seed}: no entries: {e}"));
                continue;
            }
        };
        let reach = compute_reachability(&cg, &entries).unwrap();
        let all: BTreeSet<String> = cg.nodes.iter().cloned().collect();
        let union: BTreeSet<String> = reach
            .indispensable
            .union(&reach.optional)
            .cloned()
            .collect();
        check(union == all, &mut failures, || {
            format!("seed {seed}: union is not all functions")
        });
        check(
            reach.indispensable.is_disjoint(&reach.optional),
            &mut failures,
            || format!("seed {seed}: indispensable and optional overlap"),
        );
        check(
            entries.all().all(|e| reach.indispensable.contains(e)),
            &mut failures,
            || format!("seed {seed}: an entry is not indispensable"),
        );
        for _ in 0..3 {
            let extra = cg.nodes[rng.gen_range(0..cg.nodes.len())].clone();
            let mut grown = entries.clone();
            grown.add_override(&pkg, &extra).unwrap();
            let reach2 = compute_reachability(&cg, &grown).unwrap();
            check(
                reach2.indispensable.is_superset(&reach.indispensable),
                &mut failures,
                || format!("seed {seed}: adding {extra} shrank the indispensable set"),
            );
            check(reach2.indispensable.contains(&extra), &mut failures, || {
                format!("seed {seed}: added entry {extra} is not indispensable")
            });
        }
    }
    verdict(
        failures,
        format!("{PROPERTY_PACKAGES} generated packages, {functions} functions, zero violations"),
    )
}

fn scaled_latency(cx: &Context) -> Outcome {
    let start = Instant::now();
    let fat = cx.fat_app();
    let case = &fat.fixture.cases[0];
    let opts = BenchOptions {
        runs: LATENCY_RUNS,
        python: common::python(),
        ..BenchOptions::default()
    };
    let handler = HandlerRef::parse(&case.handler).unwrap();
    let report = compare(
        &fat.fixture.pkg,
        &fat.out,
        &handler,
        &fat.fixture.event_path(case),
        &opts,
    )
    .map_err(|e| format!("compare failed: {e}"))?;
    let pct = report
        .reduction_pct
        .get("loading")
        .copied()
        .unwrap_or(f64::NAN);
    let elapsed = start.elapsed();
    let mut failures = Vec::new();
    check(
        report.before.runs.len() == LATENCY_RUNS && report.after.runs.len() == LATENCY_RUNS,
        &mut failures,
        || "wrong number of runs".to_string(),
    );
    check(report.outputs_match, &mut failures, || {
        format!("outputs differ: {:?}", report.mismatch)
    });
    check(pct >= LATENCY_MIN_REDUCTION_PCT, &mut failures, || {
        format!("loading reduction {pct:.1}% < {LATENCY_MIN_REDUCTION_PCT}%")
    });
    check(elapsed <= LATENCY_BUDGET, &mut failures, || {
        format!("took {elapsed:.1?}, budget {LATENCY_BUDGET:?}")
    });
    verdict(
        failures,
        format!(
            "loading mean {:.1} -> {:.1} ms ({pct:.1}% reduction, floor {LATENCY_MIN_REDUCTION_PCT}%) over {LATENCY_RUNS} runs in {elapsed:.1?}",
            report.before.mean("loading"),
            report.after.mean("loading"),
        ),
    )
}

fn store_format(cx: &Context) -> Outcome {
    let schema_text = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas/function_store.schema.json"),
    )
    .unwrap();
    let schema_json: serde_json::Value = serde_json::from_str(&schema_text).unwrap();
    let schema = jsonschema::JSONSchema::compile(&schema_json)
        .map_err(|e| format!("schema does not compile: {e}"))?;
    let mut failures = Vec::new();
    let mut stores = 0;
    for app in &cx.apps {
        let path = app.out.join(STORE_FILE);
        if !path.exists() {
            check(
                app.result.report.rewrite.targets.is_empty(),
                &mut failures,
                || format!("{}: rewritten functions but no store", app.fixture.name),
            );
            continue;
        }
        stores += 1;
        let bytes = fs::read(&path).unwrap();
        let store = match FunctionStore::from_gzip(&bytes) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{}: {e}", app.fixture.name));
                continue;
            }
        };
        check(store.to_gzip() == bytes, &mut failures, || {
            format!(
                "{}: gzip round trip is not byte-identical",
                app.fixture.name
            )
        });
        let json = FunctionStore::decompress(&bytes).unwrap();
        check(store.to_json() == json, &mut failures, || {
            format!(
                "{}: JSON round trip is not byte-identical",
                app.fixture.name
            )
        });
        let value: serde_json::Value = serde_json::from_slice(&json).unwrap();
        if let Err(errors) = schema.validate(&value) {
            let msgs: Vec<String> = errors.take(3).map(|e| e.to_string()).collect();
            failures.push(format!(
                "{}: schema violations: {}",
                app.fixture.name,
                msgs.join(", ")
            ));
        }
        let keys: BTreeSet<&String> = app.result.report.rewrite.targets.values().collect();
        check(
            store.functions.keys().collect::<BTreeSet<_>>() == keys,
            &mut failures,
            || {
                format!(
                    "{}: store keys differ from rewrite targets",
                    app.fixture.name
                )
            },
        );
    }
    let fat_path = cx.fat_app().out.join(STORE_FILE);
    let fat_bytes = fs::metadata(&fat_path).map(|m| m.len()).unwrap_or(u64::MAX);
    let fat_records = fs::read(&fat_path)
        .ok()
        .and_then(|b| FunctionStore::from_gzip(&b).ok())
        .map_or(0, |s| s.functions.len());
    check(fat_records >= STORE_MIN_RECORDS, &mut failures, || {
        format!("fat store has {fat_records} records, expected >= {STORE_MIN_RECORDS}")
    });
    check(fat_bytes < STORE_MAX_BYTES, &mut failures, || {
        format!("fat store is {fat_bytes} bytes, limit {STORE_MAX_BYTES}")
    });
    verdict(
        failures,
        format!("{stores} stores round-trip and validate; fat store {fat_records} records in {fat_bytes} bytes"),
    )
}

fn le(a: &PackageMetrics, b: &PackageMetrics) -> bool {
    a.size_bytes <= b.size_bytes
        && a.function_count <= b.function_count
        && a.lines_of_code <= b.lines_of_code
}

fn metrics(cx: &Context) -> Outcome {
    let mut failures = Vec::new();
    for app in &cx.apps {
        let m = &app.result.report.metrics;
        check(le(&m.after1, &m.before), &mut failures, || {
            format!(
                "{}: after1 {:?} exceeds before {:?}",
                app.fixture.name, m.after1, m.before
            )
        });
        check(le(&m.after2, &m.after1), &mut failures, || {
            format!(
                "{}: after2 {:?} exceeds after1 {:?}",
                app.fixture.name, m.after2, m.after1
            )
        });
        let measured =
            faaslight_core::compute_metrics(&faaslight_core::scan_package(&app.out).unwrap());
        check(measured == m.after2, &mut failures, || {
            format!(
                "{}: emitted package measures {measured:?}, report says {:?}",
                app.fixture.name, m.after2
            )
        });
    }
    let m = &cx.fat_app().result.report.metrics;
    let fc = faaslight_core::bench::reduction(
        m.before.function_count as f64,
        m.after2.function_count as f64,
    );
    check(fc >= FAT_MIN_FC_REDUCTION_PCT, &mut failures, || {
        format!("fat FC reduction {fc:.1}% < {FAT_MIN_FC_REDUCTION_PCT}%")
    });
    verdict(
        failures,
        format!(
            "{} fixtures monotone; fat FC {} -> {} ({fc:.1}% reduction)",
            cx.apps.len(),
            m.before.function_count,
            m.after2.function_count
        ),
    )
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into());
        Err(format!("panicked: {msg}"))
    });
    match outcome {
        Ok(detail) => {
            println!("PASS {name}: {detail}");
            true
        }
        Err(detail) => {
            println!("FAIL {name}: {detail}");
            false
        }
    }
}

type Criterion = fn(&Context) -> Outcome;

const CRITERIA: [(&str, Criterion); 7] = [
    ("functional-equivalence", functional_equivalence),
    ("fallback-soundness", fallback_soundness),
    ("reachability-oracle", reachability_oracle),
    ("partition-monotonicity", partition_properties),
    ("scaled-latency", scaled_latency),
    ("store-format", store_format),
    ("metrics", metrics),
];

fn main() {
    // Honor `cargo test -- <filter>` by criterion name.
    let filters: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let selected: Vec<_> = CRITERIA
        .iter()
        .filter(|(n, _)| filters.is_empty() || filters.iter().any(|f| n.contains(f.as_str())))
        .collect();
    if selected.is_empty() {
        return;
    }
    let cx = match catch_unwind(Context::prepare) {
        Ok(cx) => cx,
        Err(_) => {
            for (name, _) in &selected {
                println!("FAIL {name}: fixture preparation panicked");
            }
            std::process::exit(1);
        }
    };
    let total = selected.len();
    let mut failed = 0;
    for (name, f) in selected {
        if !run(name, || f(&cx)) {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", total - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
