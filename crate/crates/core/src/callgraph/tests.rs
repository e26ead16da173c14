use super::*;
use crate::entry_recognizer::EntrySet;

fn graph(sources: &[(&str, &str)]) -> (PackageModel, CallGraph) {
    let pkg = PackageModel::from_sources(sources);
    let cg = build_call_graph(&pkg);
    (pkg, cg)
}

fn has(cg: &CallGraph, a: &str, b: &str) -> bool {
    cg.edge_names().contains(&(a.to_string(), b.to_string()))
}

fn entries(qs: &[&str]) -> EntrySet {
    let mut e = EntrySet::default();
    for q in qs {
        e.provenance
            .insert(q.to_string(), crate::Provenance::UserOverride);
        e.user_declared.insert(q.to_string());
    }
    e
}

#[test]
fn direct_call() {
    let (_, cg) = graph(&[("m.py", "def a(): b()\ndef b(): pass\n")]);
    assert!(has(&cg, "m.a", "m.b"));
    assert_eq!(cg.edges.len(), 1);
}

#[test]
fn attribute_calls_reach_every_same_named_method() {
    let (_, cg) = graph(&[(
        "m.py",
        "class C1:\n    def run(self): pass\nclass C2:\n    def run(self): pass\ndef caller(obj):\n    obj.run()\n",
    )]);
    assert!(has(&cg, "m.caller", "m.C1.run"));
    assert!(has(&cg, "m.caller", "m.C2.run"));
}

#[test]
fn imported_module_attribute() {
    let (_, cg) = graph(&[
        ("lib/__init__.py", ""),
        ("lib/util.py", "def helper(): pass\n"),
        ("app.py", "import lib.util\nfrom lib import util as u\ndef h(event, context):\n    lib.util.helper()\n    u.helper()\n"),
    ]);
    assert!(has(&cg, "app.h", "lib.util.helper"));
    assert!(cg.unresolved.is_empty(), "{:?}", cg.unresolved);
}

#[test]
fn alias_chains_are_followed() {
    let (_, cg) = graph(&[(
        "m.py",
        "def f(): pass\ng = f\nh = g\ndef caller():\n    h()\n",
    )]);
    assert!(has(&cg, "m.caller", "m.f"));
}

#[test]
fn alias_depth_is_bounded() {
    let mut src = String::from("def f(): pass\na0 = f\n");
    for i in 1..12 {
        src.push_str(&format!("a{i} = a{}\n", i - 1));
    }
    src.push_str("def near(): a3()\ndef far(): a11()\n");
    let (_, cg) = graph(&[("m.py", &src)]);
    assert!(has(&cg, "m.near", "m.f"));
    assert!(!has(&cg, "m.far", "m.f"));
    assert!(cg.unresolved.iter().any(|(c, _)| cg.nodes[c.0] == "m.far"));
}

#[test]
fn nested_functions_and_local_calls() {
    let (_, cg) = graph(&[(
        "m.py",
        "def outer():\n    def inner(): pass\n    return inner()\n",
    )]);
    assert!(has(&cg, "m.outer", "m.outer.inner"));
    assert_eq!(cg.edges.len(), 1);
}

#[test]
fn local_binding_shadows_module_function() {
    let (_, cg) = graph(&[("m.py", "def f(): pass\ndef g(f):\n    f()\n")]);
    assert!(!has(&cg, "m.g", "m.f"));
    assert_eq!(cg.unresolved.len(), 1);
}

#[test]
fn function_passed_as_argument() {
    let (_, cg) = graph(&[(
        "m.py",
        "def cb(x): return x\ndef go(xs):\n    return list(map(cb, xs))\n",
    )]);
    assert!(has(&cg, "m.go", "m.cb"));
}

#[test]
fn class_instantiation_reaches_init() {
    let (_, cg) = graph(&[(
        "m.py",
        "class C:\n    def __init__(self): pass\ndef make():\n    return C()\n",
    )]);
    assert!(has(&cg, "m.make", "m.C.__init__"));
    assert!(cg.unresolved.is_empty());
}

#[test]
fn builtins_are_unresolved() {
    let (_, cg) = graph(&[("m.py", "def f(x):\n    return len(x)\n")]);
    assert_eq!(cg.unresolved.len(), 1);
    assert_eq!(cg.unresolved[0].1, "len");
}

#[test]
fn class_level_alias_is_a_method() {
    let (_, cg) = graph(&[(
        "m.py",
        "class C:\n    def _get(self): pass\n    get = _get\ndef use(c):\n    c.get()\n",
    )]);
    assert!(has(&cg, "m.use", "m.C._get"));
}

#[test]
fn star_import_resolution() {
    let (_, cg) = graph(&[
        ("a.py", "def f(): pass\n"),
        ("b.py", "from a import *\ndef g():\n    f()\n"),
    ]);
    assert!(has(&cg, "b.g", "a.f"));
}

#[test]
fn reachability_chain_and_empty() {
    let (_, cg) = graph(&[(
        "m.py",
        "def a(): b()\ndef b(): c()\ndef c(): pass\ndef d(): pass\n",
    )]);
    let r = compute_reachability(&cg, &entries(&["m.a"])).unwrap();
    assert_eq!(
        r.indispensable,
        ["m.a", "m.b", "m.c"].map(String::from).into()
    );
    assert_eq!(r.optional, ["m.d"].map(String::from).into());
    let r = compute_reachability(&cg, &EntrySet::default()).unwrap();
    assert!(r.indispensable.is_empty());
    assert_eq!(r.optional.len(), 4);
    assert_eq!(
        compute_reachability(&cg, &entries(&["m.zzz"])),
        Err(GraphError::EntryNotInGraph("m.zzz".into()))
    );
}

#[test]
fn shortest_path_and_document_round_trip() {
    let (_, cg) = graph(&[(
        "m.py",
        "def a(): b(); d()\ndef b(): c()\ndef c(): pass\ndef d(): c()\n",
    )]);
    let a = cg.id_of("m.a").unwrap();
    let c = cg.id_of("m.c").unwrap();
    assert_eq!(cg.shortest_path(&[a], c).unwrap().len(), 3);
    let doc = cg.to_document();
    let back = CallGraph::from_document(&doc).unwrap();
    assert_eq!(back.edge_names(), cg.edge_names());
    assert!(cg.to_dot().contains("\"m.a\" -> \"m.b\";"));
}

#[test]
fn module_level_code_targets() {
    let pkg = PackageModel::from_sources(&[(
        "m.py",
        "def load_config(): return {}\ndef other(): pass\nCONFIG = load_config()\n",
    )]);
    let t = module_level_targets(&pkg);
    let names: Vec<_> = t
        .keys()
        .map(|id| pkg.function(*id).qualname.as_str())
        .collect();
    assert_eq!(names, ["m.load_config"]);
}
