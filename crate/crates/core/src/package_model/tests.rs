use super::*;

fn model(src: &str) -> PackageModel {
    PackageModel::from_sources(&[("m.py", src)])
}

fn qualnames(pkg: &PackageModel) -> Vec<&str> {
    pkg.functions.iter().map(|f| f.qualname.as_str()).collect()
}

#[test]
fn nested_definition_records_parent() {
    let pkg = model("def f():\n  def g():\n    pass\n");
    assert_eq!(qualnames(&pkg), ["m.f", "m.f.g"]);
    let g = pkg.lookup("m.f.g").unwrap();
    assert_eq!(pkg.function(g).parent, pkg.lookup("m.f"));
}

#[test]
fn method_and_magic_flags() {
    let pkg = model("class C:\n    def __init__(self): pass\n    def __repr__(self): return ''\n    def plain(self): pass\n    def _x_(self): pass\n");
    let f = |q: &str| pkg.function(pkg.lookup(q).unwrap());
    assert!(f("m.C.__init__").is_magic && f("m.C.__init__").is_method);
    assert!(f("m.C.__repr__").is_magic);
    assert!(!f("m.C.plain").is_magic);
    assert!(!f("m.C._x_").is_magic);
    assert!(!is_magic_name_public("__"));
}

fn is_magic_name_public(n: &str) -> bool {
    extract::is_magic_name(n)
}

#[test]
fn qualname_collisions_get_ordinal() {
    let pkg = model("def f(): return 1\ndef f(): return 2\n");
    assert_eq!(qualnames(&pkg), ["m.f", "m.f#2"]);
    assert!(pkg.diagnostics.iter().any(|d| d.message.contains("m.f#2")));
}

#[test]
fn params_and_kinds() {
    let pkg = model("def f(a, /, b=1, *args, c, d=2, **kw): pass\n");
    let f = pkg.function(FunctionId(0));
    let kinds: Vec<_> = f
        .params
        .iter()
        .map(|p| (p.name.as_str(), p.kind, p.has_default))
        .collect();
    assert_eq!(
        kinds,
        [
            ("a", ParamKind::PositionalOnly, false),
            ("b", ParamKind::Positional, true),
            ("args", ParamKind::VarArgs, false),
            ("c", ParamKind::KeywordOnly, false),
            ("d", ParamKind::KeywordOnly, true),
            ("kw", ParamKind::KwArgs, false),
        ]
    );
}

#[test]
fn free_names_exclude_params_and_locals() {
    let pkg = model(
        "import os\nX = 1\ndef f(a):\n    b = a + X\n    def g():\n        return b + os.sep + Y\n    return [i for i in range(b)]\n",
    );
    let f = pkg.function(pkg.lookup("m.f").unwrap());
    let free: Vec<_> = f.free_names.iter().map(String::as_str).collect();
    assert_eq!(free, ["X", "Y", "os", "range"]);
    let g = pkg.function(pkg.lookup("m.f.g").unwrap());
    let free: Vec<_> = g.free_names.iter().map(String::as_str).collect();
    assert_eq!(free, ["Y", "b", "os"]);
}

#[test]
fn imports_last_binding_wins() {
    let pkg = PackageModel::from_sources(&[
        ("pkg/__init__.py", ""),
        ("pkg/sub.py", "import a.b\nimport c as d\nfrom . import x\nfrom .y import z as w\nfrom e import f\nfrom g import f\n"),
    ]);
    let m = pkg.module(pkg.module_by_name("pkg.sub").unwrap());
    let got: Vec<_> = m
        .imports
        .iter()
        .map(|i| (i.local_name.as_str(), i.target.as_str(), i.kind))
        .collect();
    assert_eq!(
        got,
        [
            ("a", "a", ImportKind::ModuleImport),
            ("d", "c", ImportKind::Aliased),
            ("x", "pkg.x", ImportKind::FromImport),
            ("w", "pkg.y.z", ImportKind::Aliased),
            ("f", "g.f", ImportKind::FromImport),
        ]
    );
}

#[test]
fn dotted_names() {
    assert_eq!(
        dotted_name(Path::new("pandas/compat/pickle_compat.py")),
        "pandas.compat.pickle_compat"
    );
    assert_eq!(dotted_name(Path::new("pkg/__init__.py")), "pkg");
    assert_eq!(dotted_name(Path::new("app.py")), "app");
}

#[test]
fn top_level_calls_and_definite_bindings() {
    let pkg = model(
        "def load_config(): return {}\nCONFIG = load_config()\nif CONFIG:\n    A = 1\nelse:\n    A = 2\n    B = 3\ntry:\n    import json\nexcept ImportError:\n    json = None\n",
    );
    let m = &pkg.modules[0];
    assert_eq!(m.top_level_calls, ["load_config"]);
    let bound: Vec<_> = m.definitely_bound.iter().map(String::as_str).collect();
    assert_eq!(bound, ["A", "CONFIG", "json", "load_config"]);
}

#[test]
fn stub_bodies_are_recognized() {
    let pkg = model(
        "def f(a):\n    import faaslight_runtime\n    return faaslight_runtime.rewrite_template(\"m.f\", \"f(a)\", {\"a\": a}, 1)\n",
    );
    assert!(pkg.functions[0].is_stub);
    assert_eq!(pkg.metrics.function_count, 0);
}

#[test]
fn lambdas_counted_and_flagged() {
    let pkg = model("k = lambda x: x\ndef f():\n    return sorted([], key=lambda y: y)\n");
    assert_eq!(pkg.metrics.function_count, 3);
    assert!(pkg.functions[0].is_lambda);
    assert_eq!(pkg.functions[0].qualname, "m.<lambda>");
    assert_eq!(pkg.functions[2].qualname, "m.f.<lambda>");
}

#[test]
fn unparseable_source_is_a_diagnostic() {
    let pkg = PackageModel::from_sources(&[("bad.py", "def (:\n"), ("ok.py", "def f(): pass\n")]);
    assert_eq!(pkg.modules.len(), 1);
    assert!(pkg.diagnostics.iter().any(|d| d.path == "bad.py"));
}

#[test]
fn class_cell_and_mangling() {
    let pkg = model(
        "class C:\n    def a(self):\n        return super().a()\n    def b(self):\n        return self.__p\n    def c(self):\n        return self.q\n",
    );
    let f = |q: &str| pkg.function(pkg.lookup(q).unwrap());
    assert!(f("m.C.a").uses_class_cell);
    assert!(f("m.C.b").uses_mangled_name);
    assert!(!f("m.C.c").uses_class_cell && !f("m.C.c").uses_mangled_name);
}

#[test]
fn star_imports_expand_for_package_modules() {
    let pkg = PackageModel::from_sources(&[
        ("a.py", "def f(): pass\n_g = 1\n"),
        ("b.py", "from a import *\n"),
    ]);
    let b = pkg.module(pkg.module_by_name("b").unwrap());
    assert!(b.scope.bindings.contains_key("f"));
    assert!(!b.scope.bindings.contains_key("_g"));
    assert!(b.definitely_bound.contains("f"));
}

#[test]
fn scan_empty_dir() {
    let dir = tempfile::tempdir().unwrap();
    let pkg = scan_package(dir.path()).unwrap();
    assert!(pkg.files.is_empty() && pkg.modules.is_empty());
    assert_eq!(pkg.metrics, PackageMetrics::default());
}

#[test]
fn scan_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(
        scan_package(dir.path().join("nope")),
        Err(ScanError::RootNotFound(_))
    ));
    let file = dir.path().join("f.txt");
    fs::write(&file, "x").unwrap();
    assert!(matches!(
        scan_package(&file),
        Err(ScanError::NotADirectory(_))
    ));
}
