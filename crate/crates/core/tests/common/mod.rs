//! Shared helpers for integration tests: checked-in fixture apps, the
//! generated fat fixture, and single-run handler invocation.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use faaslight_core::bench::{cold_load, BenchOptions, HandlerRef, RunSample};
use faaslight_core::pipeline::{run_pipeline, PipelineOutput, RunConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

pub const STATIC_FIXTURES: [&str; 5] = [
    "app2-mini",
    "app-golden",
    "app-cha",
    "app-nested",
    "lib-init",
];
pub const FAT_SEED: u64 = 0x05EE_DFA7;
pub const FAT_MODULES: usize = 50;
pub const FAT_PER_MODULE: usize = 100;
pub const FAT_REACHABLE: usize = 50;

#[derive(Debug, Clone, Deserialize)]
pub struct Case {
    pub handler: String,
    pub event: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub root: PathBuf,
    pub pkg: PathBuf,
    pub cases: Vec<Case>,
}

pub struct FatFixture {
    pub fixture: Fixture,
    /// Qualnames the generator made reachable, the handler included.
    pub reachable: BTreeSet<String>,
}

#[derive(Deserialize)]
struct CaseFile {
    cases: Vec<Case>,
}

impl Fixture {
    pub fn event_path(&self, case: &Case) -> PathBuf {
        self.root.join(&case.event)
    }

    pub fn golden(&self, name: &str) -> Vec<String> {
        let text = fs::read_to_string(self.root.join("golden").join(name)).unwrap();
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect()
    }
}

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn oracle(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/oracles")
        .join(name)
}

pub fn load_fixture(name: &str) -> Fixture {
    let root = fs::canonicalize(fixtures_dir().join(name)).unwrap();
    let cases: CaseFile =
        serde_json::from_str(&fs::read_to_string(root.join("cases.json")).unwrap()).unwrap();
    Fixture {
        name: name.to_string(),
        pkg: root.join("pkg"),
        root,
        cases: cases.cases,
    }
}

pub fn python() -> PathBuf {
    PathBuf::from(std::env::var("FAASLIGHT_TEST_PYTHON").unwrap_or_else(|_| "python3".into()))
}

pub fn run_python(args: &[&std::ffi::OsStr]) -> String {
    let out = Command::new(python())
        .args(args)
        .output()
        .expect("python3 runs");
    assert!(
        out.status.success(),
        "python failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Runs the whole pipeline into `out`, which must not exist yet.
pub fn optimize(pkg: &Path, out: &Path, force_optional: &[&str]) -> PipelineOutput {
    let cfg = RunConfig {
        in_dir: pkg.to_path_buf(),
        out_dir: out.to_path_buf(),
        force_optional: force_optional.iter().map(|s| s.to_string()).collect(),
        ..RunConfig::default()
    };
    run_pipeline(&cfg).unwrap_or_else(|e| panic!("pipeline failed on {}: {e}", pkg.display()))
}

pub fn single_run() -> BenchOptions {
    BenchOptions {
        runs: 1,
        allow_errors: true,
        timeout: Duration::from_secs(120),
        python: python(),
        ..BenchOptions::default()
    }
}

/// One fresh-process invocation of a fixture case against `pkg`.
pub fn invoke(pkg: &Path, fixture: &Fixture, case: &Case) -> RunSample {
    let h = HandlerRef::parse(&case.handler).unwrap();
    let mut r = cold_load(pkg, &h, &fixture.event_path(case), &single_run())
        .unwrap_or_else(|e| panic!("{} {}: {e}", fixture.name, case.handler));
    r.runs.remove(0)
}

fn fat_body(rng: &mut ChaCha8Rng, out: &mut String, calls: &[String]) {
    let a: u32 = rng.gen_range(2..97);
    let b: u32 = rng.gen_range(1..1000);
    let n: u32 = rng.gen_range(3..9);
    let _ = writeln!(out, "    acc = x * {a} + {b}");
    let _ = writeln!(out, "    for i in range({n}):");
    let _ = writeln!(
        out,
        "        acc = (acc * 31 + TABLE[(i + {b}) % len(TABLE)]) % 1000003"
    );
    let _ = writeln!(out, "        if acc % {} == 0:", rng.gen_range(2..7));
    let _ = writeln!(out, "            acc += i * {}", rng.gen_range(1..50));
    let _ = writeln!(
        out,
        "    label = \"v%d-%d\" % (acc, {})",
        rng.gen_range(0..10_000)
    );
    let _ = writeln!(out, "    acc += len(label) * {}", rng.gen_range(1..13));
    let _ = writeln!(
        out,
        "    parts = [acc % {}, acc // {}, acc ^ {}]",
        rng.gen_range(7..100),
        rng.gen_range(2..9),
        rng.gen_range(1..4096)
    );
    let _ = writeln!(out, "    acc = sum(parts) % 1000003");
    for c in calls {
        let _ = writeln!(out, "    acc = (acc + {c}(acc)) % 1000003");
    }
    let _ = writeln!(out, "    return acc");
}

/// Writes the seeded fat fixture under `dir`: a package whose handler
/// imports a 5,000-function library and reaches 50 of its functions.
pub fn generate_fat(dir: &Path, seed: u64) -> FatFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pkg = dir.join("pkg");
    let lib = pkg.join("fatlib");
    fs::create_dir_all(&lib).unwrap();
    let info = pkg.join("fatlib-1.0.dist-info");
    fs::create_dir_all(&info).unwrap();
    fs::write(
        info.join("METADATA"),
        "Metadata-Version: 2.1\nName: fatlib\nVersion: 1.0\n",
    )
    .unwrap();
    fs::write(info.join("top_level.txt"), "fatlib\n").unwrap();

    let name = |m: usize, f: usize| format!("m{m:02}.f{f:03}");
    let mut all: Vec<(usize, usize)> = (0..FAT_MODULES)
        .flat_map(|m| (0..FAT_PER_MODULE).map(move |f| (m, f)))
        .collect();
    all.shuffle(&mut rng);
    let mut reachable: Vec<(usize, usize)> = all[..FAT_REACHABLE].to_vec();
    reachable.sort();
    // The ten highest-numbered reachable functions are called by the
    // handler. Every other one gets a caller among the already connected
    // functions in the same or a higher-numbered module, so imports only
    // ever point to lower-numbered modules.
    let roots: Vec<(usize, usize)> = reachable.iter().rev().take(10).cloned().collect();
    let mut connected = roots.clone();
    let mut callees: std::collections::BTreeMap<(usize, usize), Vec<(usize, usize)>> =
        Default::default();
    for r in reachable.iter().rev().skip(10) {
        let candidates: Vec<(usize, usize)> =
            connected.iter().filter(|c| c.0 >= r.0).cloned().collect();
        let caller = *candidates.choose(&mut rng).unwrap();
        callees.entry(caller).or_default().push(*r);
        connected.push(*r);
    }
    let is_reachable = |mf: &(usize, usize)| reachable.contains(mf);

    let mut init = String::from("\"\"\"Generated library with many functions.\"\"\"\n");
    for m in 0..FAT_MODULES {
        let _ = writeln!(init, "from . import m{m:02}");
        let mut src = String::new();
        let _ = writeln!(src, "\"\"\"Generated module {m}.\"\"\"");
        let lower: Vec<usize> = (0..m).collect();
        for l in &lower {
            let _ = writeln!(src, "from . import m{l:02}");
        }
        let table: Vec<String> = (0..8)
            .map(|_| rng.gen_range(0..10_000).to_string())
            .collect();
        let _ = writeln!(src, "\nTABLE = [{}]\n", table.join(", "));
        for f in 0..FAT_PER_MODULE {
            let me = (m, f);
            let mut calls: Vec<String> = Vec::new();
            if is_reachable(&me) {
                for c in callees.get(&me).into_iter().flatten() {
                    calls.push(if c.0 == m {
                        format!("f{:03}", c.1)
                    } else {
                        name(c.0, c.1)
                    });
                }
            } else if rng.gen_bool(0.3) {
                let target_m = rng.gen_range(0..=m);
                let target_f = rng.gen_range(0..FAT_PER_MODULE);
                if (target_m, target_f) != me {
                    calls.push(if target_m == m {
                        format!("f{target_f:03}")
                    } else {
                        name(target_m, target_f)
                    });
                }
            }
            let _ = writeln!(src, "\ndef f{f:03}(x):");
            fat_body(&mut rng, &mut src, &calls);
        }
        fs::write(lib.join(format!("m{m:02}.py")), src).unwrap();
    }
    fs::write(lib.join("__init__.py"), init).unwrap();

    let mut handler = String::from("import fatlib\n\n\ndef handler(event, context):\n    x = int(event[\"x\"])\n    out = {}\n");
    for r in &roots {
        let q = name(r.0, r.1);
        let _ = writeln!(handler, "    out[\"{q}\"] = fatlib.{q}(x)");
    }
    handler.push_str("    return out\n");
    fs::write(pkg.join("handler.py"), handler).unwrap();

    let events = dir.join("events");
    fs::create_dir_all(&events).unwrap();
    let mut cases = Vec::new();
    for (i, x) in [1i64, 12345, -7].iter().enumerate() {
        let rel = PathBuf::from(format!("events/x{i}.json"));
        fs::write(dir.join(&rel), format!("{{\"x\": {x}}}")).unwrap();
        cases.push(Case {
            handler: "handler:handler".into(),
            event: rel,
        });
    }
    let root = fs::canonicalize(dir).unwrap();
    let mut expected: BTreeSet<String> = reachable
        .iter()
        .map(|r| format!("fatlib.{}", name(r.0, r.1)))
        .collect();
    expected.insert("handler.handler".into());
    FatFixture {
        fixture: Fixture {
            name: "fat".into(),
            pkg: root.join("pkg"),
            root,
            cases,
        },
        reachable: expected,
    }
}

const FN_NAMES: [&str; 10] = [
    "load", "parse", "run", "emit", "check", "merge", "split", "scale", "fetch", "store",
];
const METHOD_NAMES: [&str; 6] = ["get", "put", "run", "close", "__init__", "__eq__"];

fn call_expr(
    rng: &mut ChaCha8Rng,
    local: &[String],
    imported: &[String],
    modules: &[String],
) -> String {
    match rng.gen_range(0..6) {
        0 | 1 if !local.is_empty() => format!("{}(x)", local.choose(rng).unwrap()),
        2 if !imported.is_empty() => format!("{}(x)", imported.choose(rng).unwrap()),
        3 if !modules.is_empty() => format!(
            "{}.{}(x)",
            modules.choose(rng).unwrap(),
            FN_NAMES.choose(rng).unwrap()
        ),
        4 => format!("x.{}()", METHOD_NAMES[..4].choose(rng).unwrap()),
        _ if !local.is_empty() => format!("apply({}, x)", local.choose(rng).unwrap()),
        _ => "len(x)".to_string(),
    }
}

fn random_body(
    rng: &mut ChaCha8Rng,
    indent: &str,
    local: &[String],
    imported: &[String],
    modules: &[String],
) -> String {
    let mut s = String::new();
    for _ in 0..rng.gen_range(1..4) {
        let c = call_expr(rng, local, imported, modules);
        let _ = writeln!(s, "{indent}y = {c}");
    }
    if rng.gen_bool(0.15) {
        let _ = writeln!(
            s,
            "{indent}z = lambda v: {}",
            call_expr(rng, local, imported, modules).replace("(x)", "(v)")
        );
    }
    let _ = writeln!(s, "{indent}return x");
    s
}

/// A random small package as `(relative path, source)` pairs: an `app.py`
/// handler module plus one to three library modules with functions,
/// classes, nested functions, aliases and module-level calls.
pub fn random_package(rng: &mut ChaCha8Rng) -> Vec<(PathBuf, String)> {
    let n = rng.gen_range(1..=3);
    let modules: Vec<String> = (0..n).map(|i| format!("m{i}")).collect();
    let mut out = vec![(PathBuf::from("lib/__init__.py"), String::new())];
    for (i, m) in modules.iter().enumerate() {
        let mut src = String::new();
        let earlier: Vec<String> = modules[..i].to_vec();
        for e in &earlier {
            let _ = writeln!(src, "from lib import {e}");
        }
        let mut imported = Vec::new();
        if !earlier.is_empty() && rng.gen_bool(0.5) {
            let f = FN_NAMES.choose(rng).unwrap();
            let alias = format!("alias_{f}");
            let _ = writeln!(
                src,
                "from lib.{} import {f} as {alias}",
                earlier.choose(rng).unwrap()
            );
            imported.push(alias);
        }
        let _ = writeln!(src, "\n\ndef apply(f, x):\n    return f(x)\n");
        let mut local: Vec<String> = vec!["apply".into()];
        let count = rng.gen_range(2..7);
        let names: Vec<String> = FN_NAMES
            .choose_multiple(rng, count)
            .map(|s| s.to_string())
            .collect();
        local.extend(names.iter().cloned());
        for name in &names {
            if rng.gen_bool(0.1) {
                let _ = writeln!(src, "@apply_deco");
            }
            let _ = writeln!(src, "def {name}(x):");
            if rng.gen_bool(0.25) {
                let _ = writeln!(src, "    def inner(v):");
                src += &random_body(rng, "        ", &local, &imported, &earlier)
                    .replace("return x", "return v")
                    .replace("(x)", "(v)");
                let _ = writeln!(src, "    inner(x)");
            }
            src += &random_body(rng, "    ", &local, &imported, &earlier);
            src.push('\n');
        }
        if src.contains("@apply_deco") {
            src = format!("def apply_deco(f):\n    return f\n\n\n{src}");
        }
        for c in 0..rng.gen_range(0..3) {
            let _ = writeln!(src, "class C{c}:");
            let k = rng.gen_range(1..4);
            let methods: Vec<&str> = METHOD_NAMES.choose_multiple(rng, k).copied().collect();
            for meth in methods {
                let _ = writeln!(src, "    def {meth}(self, x=None):");
                src += &random_body(rng, "        ", &local, &imported, &earlier);
            }
            src.push('\n');
        }
        if rng.gen_bool(0.4) {
            let _ = writeln!(src, "{}(0)", local.choose(rng).unwrap());
        }
        out.push((PathBuf::from(format!("lib/{m}.py")), src));
    }
    let mut app = String::new();
    for m in &modules {
        let _ = writeln!(app, "from lib import {m}");
    }
    let _ = writeln!(app, "\n\ndef handler(event, context):\n    x = event");
    for _ in 0..rng.gen_range(1..4) {
        let m = modules.choose(rng).unwrap();
        let _ = writeln!(app, "    {m}.{}(x)", FN_NAMES.choose(rng).unwrap());
    }
    let _ = writeln!(app, "    return x\n\n\ndef unused(x):\n    return x");
    out.push((PathBuf::from("app.py"), app));
    out
}
