//! Separates optional functions into the function store and replaces their
//! bodies with loader stubs.

mod emit;
mod store;
mod stub;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::package_model::{FunctionId, ModuleId, PackageModel, ParamKind, ScopeOwner};
use crate::python::{self, multiline_string_ranges, Stmt};
use crate::RUNTIME_MODULE;

pub use emit::{emit_package, emit_unchanged, EmitError, EmitReport, RUNTIME_SOURCE};
pub use store::{FunctionStore, StoreError, StoreRecord, STORE_VERSION};
pub use stub::{dedent, signature_text, stub_body};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SkipReason {
    Lambda,
    ChildOfOptionalParent,
    Decorated,
    Varargs,
    /// Async generators and bodies that already are loader stubs.
    UnsupportedForm,
    /// Closure capture, `nonlocal`/`global` rebinding, or defaults that read
    /// enclosing non-module scopes; a flat namespace cannot reproduce them.
    ScopeCapture,
    /// Zero-argument `super()`, the `__class__` cell, private-name mangling,
    /// or a name clash with the loader module.
    DunderConflict,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::Lambda => "lambda",
            SkipReason::ChildOfOptionalParent => "child-of-optional-parent",
            SkipReason::Decorated => "decorated",
            SkipReason::Varargs => "varargs",
            SkipReason::UnsupportedForm => "unsupported-form",
            SkipReason::ScopeCapture => "scope-capture",
            SkipReason::DunderConflict => "dunder-conflict",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewriteTarget {
    pub qualname: String,
    pub function: FunctionId,
    pub store_key: String,
    pub signature_text: String,
    pub env_names: Vec<String>,
    pub body_span: (u32, u32),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewritePlan {
    pub targets: Vec<RewriteTarget>,
    pub skipped: Vec<(String, SkipReason)>,
}

impl RewritePlan {
    pub fn skipped_by_reason(&self) -> BTreeMap<SkipReason, usize> {
        let mut m = BTreeMap::new();
        for (_, r) in &self.skipped {
            *m.entry(*r).or_default() += 1;
        }
        m
    }

    pub fn skip_reason(&self, qualname: &str) -> Option<SkipReason> {
        self.skipped
            .iter()
            .find(|(q, _)| q == qualname)
            .map(|(_, r)| *r)
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RewriteError {
    #[error("overlapping rewrite spans in {module}: {first} and {second}")]
    SourceEditConflict {
        module: String,
        first: String,
        second: String,
    },
    #[error("rewritten module {module} does not parse: {message}")]
    ReparseFailure { module: String, message: String },
    #[error("stored source of {key} is not a single function definition")]
    StoreSourceInvalid { key: String },
}

struct Subtrees {
    children: Vec<Vec<FunctionId>>,
}

impl Subtrees {
    fn new(pkg: &PackageModel) -> Self {
        let mut children = vec![Vec::new(); pkg.functions.len()];
        for (i, f) in pkg.functions.iter().enumerate() {
            if let Some(p) = f.parent {
                children[p.0].push(FunctionId(i));
            }
        }
        Subtrees { children }
    }

    fn of(&self, root: FunctionId) -> Vec<FunctionId> {
        let mut out = vec![root];
        let mut i = 0;
        while i < out.len() {
            out.extend(self.children[out[i].0].iter().copied());
            i += 1;
        }
        out
    }
}

/// Function scopes strictly enclosing `id`, innermost first, up to (excluding) `stop`.
fn ancestors(pkg: &PackageModel, id: FunctionId, stop: Option<FunctionId>) -> Vec<FunctionId> {
    let mut out = Vec::new();
    let mut cur = pkg.function(id).parent;
    while let Some(p) = cur {
        if Some(p) == stop {
            break;
        }
        out.push(p);
        cur = pkg.function(p).parent;
    }
    out
}

/// Whether any enclosing class (between `id` and its nearest function) binds `name`.
fn class_binds(pkg: &PackageModel, id: FunctionId, name: &str) -> bool {
    let mut owner = pkg.function(id).enclosing;
    loop {
        match owner {
            ScopeOwner::Class(c) => {
                if pkg.class(c).scope.bindings.contains_key(name) {
                    return true;
                }
                owner = pkg.class(c).enclosing;
            }
            _ => return false,
        }
    }
}

fn scope_capture(pkg: &PackageModel, id: FunctionId, subtree: &[FunctionId]) -> bool {
    let f = pkg.function(id);
    let outer = ancestors(pkg, id, None);
    let bound_outside = |name: &str| outer.iter().any(|a| pkg.function(*a).scope.is_local(name));
    if f.free_names.iter().any(|n| bound_outside(n)) {
        return true;
    }
    if f.default_names
        .iter()
        .any(|n| bound_outside(n) || class_binds(pkg, id, n))
    {
        return true;
    }
    for d in subtree {
        let df = pkg.function(*d);
        if !df.scope.globals.is_empty() {
            return true;
        }
        // `nonlocal` must be satisfied within the moved subtree.
        let inner = ancestors(pkg, *d, pkg.function(id).parent);
        for n in &df.scope.nonlocals {
            if !inner.iter().any(|a| pkg.function(*a).scope.is_local(n)) {
                return true;
            }
        }
    }
    false
}

fn classify(
    pkg: &PackageModel,
    id: FunctionId,
    optional: &BTreeSet<String>,
    subtrees: &Subtrees,
) -> Option<SkipReason> {
    let f = pkg.function(id);
    if f.is_lambda {
        return Some(SkipReason::Lambda);
    }
    if f.parent
        .is_some_and(|p| optional.contains(&pkg.function(p).qualname))
    {
        return Some(SkipReason::ChildOfOptionalParent);
    }
    if !f.decorators.is_empty() {
        return Some(SkipReason::Decorated);
    }
    if f.params
        .iter()
        .any(|p| matches!(p.kind, ParamKind::VarArgs | ParamKind::KwArgs))
    {
        return Some(SkipReason::Varargs);
    }
    if f.is_stub || (f.is_async && f.is_generator) || f.body.is_none() {
        return Some(SkipReason::UnsupportedForm);
    }
    let subtree = subtrees.of(id);
    if scope_capture(pkg, id, &subtree) {
        return Some(SkipReason::ScopeCapture);
    }
    let clash = f.name == RUNTIME_MODULE || f.params.iter().any(|p| p.name == RUNTIME_MODULE);
    let dunder = subtree.iter().any(|d| {
        let d = pkg.function(*d);
        d.uses_class_cell || d.uses_mangled_name
    });
    if clash || dunder {
        return Some(SkipReason::DunderConflict);
    }
    None
}

/// Env map order: parameters, then free names bound on every path through
/// the defining module.
fn env_names(pkg: &PackageModel, id: FunctionId) -> Vec<String> {
    let f = pkg.function(id);
    let module = pkg.module(f.module);
    let mut names: Vec<String> = f.params.iter().map(|p| p.name.clone()).collect();
    for n in &f.free_names {
        if module.definitely_bound.contains(n) && n != RUNTIME_MODULE && !names.contains(n) {
            names.push(n.clone());
        }
    }
    names
}

pub fn plan_rewrites(pkg: &PackageModel, optional: &BTreeSet<String>) -> RewritePlan {
    let subtrees = Subtrees::new(pkg);
    let mut plan = RewritePlan::default();
    for id in pkg.function_ids() {
        let f = pkg.function(id);
        if !optional.contains(&f.qualname) {
            continue;
        }
        match classify(pkg, id, optional, &subtrees) {
            Some(reason) => plan.skipped.push((f.qualname.clone(), reason)),
            None => plan.targets.push(RewriteTarget {
                qualname: f.qualname.clone(),
                function: id,
                store_key: f.qualname.clone(),
                signature_text: signature_text(f),
                env_names: env_names(pkg, id),
                body_span: f.body_span,
            }),
        }
    }
    plan
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewriteOutput {
    /// Rewritten module texts by relative path.
    pub modules: BTreeMap<PathBuf, String>,
    pub store: FunctionStore,
}

struct Edit {
    start: usize,
    end: usize,
    text: String,
    key: String,
}

fn is_single_def(tree: &[Stmt]) -> bool {
    matches!(tree, [Stmt::FunctionDef(_) | Stmt::AsyncFunctionDef(_)])
}

/// A module's new text and the store records taken out of it.
type RewrittenModule = (ModuleId, String, Vec<(String, StoreRecord)>);

fn rewrite_module(
    pkg: &PackageModel,
    module: ModuleId,
    targets: &[&RewriteTarget],
) -> Result<(String, Vec<(String, StoreRecord)>), RewriteError> {
    let m = pkg.module(module);
    let text: &str = &m.text;
    let multiline = multiline_string_ranges(text);
    let mut edits = Vec::new();
    let mut records = Vec::new();
    for t in targets {
        let f = pkg.function(t.function);
        let (b0, b1) = f.body.expect("planned targets have a body");
        let def_line = m.lines.line_of(f.span.0);
        let body_line = m.lines.line_of(b0);
        let mut start = b0;
        let replacement = if body_line > def_line
            && text[m.lines.line_start(body_line)..b0].trim().is_empty()
        {
            let indent = &text[m.lines.line_start(body_line)..b0];
            stub_body(
                &t.store_key,
                &t.signature_text,
                &t.env_names,
                f.is_async,
                &format!("\n{indent}"),
            )
        } else {
            let base = &text[m.lines.line_start(def_line)..m.lines.line_start(def_line) + f.column];
            let indent: String = base
                .chars()
                .map(|c| if c == '\t' { '\t' } else { ' ' })
                .collect::<String>()
                + "    ";
            start = b0 - (text[..b0].len() - text[..b0].trim_end_matches([' ', '\t']).len());
            format!(
                "\n{indent}{}",
                stub_body(
                    &t.store_key,
                    &t.signature_text,
                    &t.env_names,
                    f.is_async,
                    &format!("\n{indent}")
                )
            )
        };
        edits.push(Edit {
            start,
            end: b1,
            text: replacement,
            key: t.store_key.clone(),
        });
        let source = dedent(text, f.span, f.column, &multiline);
        match python::parse_module(&source, &t.store_key) {
            Ok(tree) if is_single_def(&tree) => {}
            _ => {
                return Err(RewriteError::StoreSourceInvalid {
                    key: t.store_key.clone(),
                })
            }
        }
        let record = StoreRecord {
            source,
            signature: t.signature_text.clone(),
            free_names: f.free_names.iter().cloned().collect(),
            defining_module: m.dotted_name.clone(),
            original_line: t.body_span.0,
        };
        records.push((t.store_key.clone(), record));
    }
    edits.sort_by_key(|e| e.start);
    for pair in edits.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(RewriteError::SourceEditConflict {
                module: m.dotted_name.clone(),
                first: pair[0].key.clone(),
                second: pair[1].key.clone(),
            });
        }
    }
    let mut out = String::with_capacity(text.len());
    let mut pos = 0;
    for e in &edits {
        out.push_str(&text[pos..e.start]);
        out.push_str(&e.text);
        pos = e.end;
    }
    out.push_str(&text[pos..]);
    if let Err(err) = python::parse_module(&out, &m.dotted_name) {
        return Err(RewriteError::ReparseFailure {
            module: m.dotted_name.clone(),
            message: err.to_string(),
        });
    }
    Ok((out, records))
}

/// Applies `plan`: rewritten module texts (only modules with targets) plus
/// the store holding every target's original definition.
pub fn rewrite_source(
    pkg: &PackageModel,
    plan: &RewritePlan,
) -> Result<RewriteOutput, RewriteError> {
    let mut by_module: BTreeMap<ModuleId, Vec<&RewriteTarget>> = BTreeMap::new();
    for t in &plan.targets {
        by_module
            .entry(pkg.function(t.function).module)
            .or_default()
            .push(t);
    }
    let results: Vec<Result<RewrittenModule, RewriteError>> = by_module
        .par_iter()
        .map(|(m, ts)| rewrite_module(pkg, *m, ts).map(|(text, recs)| (*m, text, recs)))
        .collect();
    let mut output = RewriteOutput::default();
    for r in results {
        let (m, text, recs) = r?;
        output
            .modules
            .insert(pkg.file_of(m).relative_path.clone(), text);
        output.store.functions.extend(recs);
    }
    Ok(output)
}
