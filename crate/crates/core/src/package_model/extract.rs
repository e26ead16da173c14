//! Walks a parsed module and records functions, classes, scopes and the
//! references each function makes.

use std::collections::{BTreeSet, HashMap};

use rustpython_parser::ast::{self, Expr, ExprContext, Pattern, Stmt};

use super::{
    Binding, ClassId, ClassRecord, FunctionId, FunctionRecord, ImportBinding, ImportKind, ModuleId,
    Param, ParamKind, RefKind, Reference, Scope, ScopeOwner, Target,
};
use crate::diagnostics::Diagnostic;
use crate::python::{range_of, LineIndex};
use crate::RUNTIME_MODULE;

const MAX_REF_TEXT: usize = 120;

pub(crate) struct ModuleContext<'a> {
    pub id: ModuleId,
    pub name: &'a str,
    pub is_package: bool,
    pub text: &'a str,
    pub lines: &'a LineIndex,
}

pub(crate) struct ExtractedModule {
    pub top_level_calls: Vec<String>,
    pub imports: Vec<ImportBinding>,
    pub scope: Scope,
    pub top_refs: Vec<Reference>,
    pub star_imports: Vec<(String, bool)>,
    pub definitely_bound: BTreeSet<String>,
    pub functions: Vec<FunctionId>,
    pub classes: Vec<ClassId>,
}

#[derive(Clone, Copy)]
enum Frame {
    Class(ClassId),
    Function(FunctionId),
}

struct Extractor<'a, 'b> {
    cx: ModuleContext<'a>,
    path: &'a str,
    functions: &'b mut Vec<FunctionRecord>,
    classes: &'b mut Vec<ClassRecord>,
    qualnames: &'b mut HashMap<String, usize>,
    diagnostics: &'b mut Vec<Diagnostic>,
    scope: Scope,
    top_refs: Vec<Reference>,
    imports: Vec<ImportBinding>,
    star_imports: Vec<(String, bool)>,
    frames: Vec<Frame>,
    names: Vec<String>,
    shadow: Vec<BTreeSet<String>>,
    nesting: usize,
    capture: Option<BTreeSet<String>>,
    module_functions: Vec<FunctionId>,
    module_classes: Vec<ClassId>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn extract_module(
    cx: ModuleContext<'_>,
    body: &[Stmt],
    functions: &mut Vec<FunctionRecord>,
    classes: &mut Vec<ClassRecord>,
    qualnames: &mut HashMap<String, usize>,
    diagnostics: &mut Vec<Diagnostic>,
    path: &str,
) -> ExtractedModule {
    let mut ex = Extractor {
        cx,
        path,
        functions,
        classes,
        qualnames,
        diagnostics,
        scope: Scope::default(),
        top_refs: Vec::new(),
        imports: Vec::new(),
        star_imports: Vec::new(),
        frames: Vec::new(),
        names: Vec::new(),
        shadow: Vec::new(),
        nesting: 0,
        capture: None,
        module_functions: Vec::new(),
        module_classes: Vec::new(),
    };
    ex.block(body);

    // Last top-level binding of a local name wins.
    let mut imports: Vec<ImportBinding> = Vec::new();
    for imp in ex.imports.drain(..).rev() {
        if !imports.iter().any(|i| i.local_name == imp.local_name) {
            imports.push(imp);
        }
    }
    imports.reverse();

    let top_level_calls = ex
        .top_refs
        .iter()
        .filter(|r| r.kind == RefKind::Call)
        .map(|r| r.text.clone())
        .collect();
    ExtractedModule {
        top_level_calls,
        imports,
        scope: ex.scope,
        top_refs: ex.top_refs,
        star_imports: ex.star_imports,
        definitely_bound: definite(body, BTreeSet::new()).unwrap_or_default(),
        functions: ex.module_functions,
        classes: ex.module_classes,
    }
}

/// Completes `free_names` bottom-up: a function's free names are its own
/// unbound loads plus whatever its nested definitions leave unbound.
pub(crate) fn finish_free_names(functions: &mut [FunctionRecord]) {
    for i in (0..functions.len()).rev() {
        let f = &functions[i];
        let mut free: BTreeSet<String> = f.own_loads.union(&f.free_names).cloned().collect();
        free.retain(|n| !f.scope.is_local(n));
        let parent = f.parent;
        if let Some(p) = parent {
            functions[p.0].free_names.extend(free.iter().cloned());
        }
        functions[i].free_names = free;
    }
}

pub(crate) fn chain_of(e: &Expr) -> Option<Vec<String>> {
    match e {
        Expr::Name(n) => Some(vec![n.id.to_string()]),
        Expr::Attribute(a) => {
            let mut c = chain_of(&a.value)?;
            c.push(a.attr.to_string());
            Some(c)
        }
        _ => None,
    }
}

pub(crate) fn target_of(e: &Expr) -> Target {
    match e {
        Expr::Name(n) => Target::Name(n.id.to_string()),
        Expr::Attribute(a) => Target::Attr {
            chain: chain_of(&a.value),
            attr: a.attr.to_string(),
        },
        _ => Target::Dynamic,
    }
}

pub(crate) fn is_magic_name(name: &str) -> bool {
    name.len() > 4 && name.starts_with("__") && name.ends_with("__")
}

fn is_mangled(name: &str) -> bool {
    name.starts_with("__") && !name.ends_with("__")
}

/// Whether a body is exactly the two-statement loader stub.
pub(crate) fn is_stub_body(body: &[Stmt]) -> bool {
    let [Stmt::Import(imp), Stmt::Return(ret)] = body else {
        return false;
    };
    if imp.names.len() != 1
        || imp.names[0].name.as_str() != RUNTIME_MODULE
        || imp.names[0].asname.is_some()
    {
        return false;
    }
    let Some(value) = &ret.value else {
        return false;
    };
    let call = match value.as_ref() {
        Expr::Await(a) => a.value.as_ref(),
        other => other,
    };
    let Expr::Call(call) = call else {
        return false;
    };
    matches!(chain_of(&call.func), Some(c) if c == [RUNTIME_MODULE, "rewrite_template"])
}

impl Extractor<'_, '_> {
    fn text(&self, r: std::ops::Range<usize>) -> String {
        let s = &self.cx.text[r];
        if s.len() <= MAX_REF_TEXT {
            s.to_string()
        } else {
            let mut end = MAX_REF_TEXT;
            while !s.is_char_boundary(end) {
                end -= 1;
            }
            format!("{}...", &s[..end])
        }
    }

    fn line(&self, offset: usize) -> u32 {
        self.cx.lines.line_of(offset)
    }

    fn sink(&self) -> Option<FunctionId> {
        self.frames.iter().rev().find_map(|f| match f {
            Frame::Function(id) => Some(*id),
            Frame::Class(_) => None,
        })
    }

    fn owner(&self) -> ScopeOwner {
        match self.frames.last() {
            None => ScopeOwner::Module(self.cx.id),
            Some(Frame::Class(c)) => ScopeOwner::Class(*c),
            Some(Frame::Function(f)) => ScopeOwner::Function(*f),
        }
    }

    fn in_class(&self) -> bool {
        self.frames.iter().any(|f| matches!(f, Frame::Class(_)))
    }

    fn scope_mut(&mut self) -> &mut Scope {
        match self.frames.last() {
            None => &mut self.scope,
            Some(Frame::Class(c)) => &mut self.classes[c.0].scope,
            Some(Frame::Function(f)) => &mut self.functions[f.0].scope,
        }
    }

    fn bind(&mut self, name: &str, binding: Binding) {
        self.scope_mut().bind(name, binding);
    }

    fn shadowed(&self, name: &str) -> bool {
        self.shadow.iter().any(|s| s.contains(name))
    }

    fn add_ref(&mut self, target: Target, kind: RefKind, range: std::ops::Range<usize>) {
        let reference = Reference {
            target,
            kind,
            scope: self.owner(),
            line: self.line(range.start),
            text: self.text(range),
        };
        match self.sink() {
            Some(f) => self.functions[f.0].refs.push(reference),
            None if kind != RefKind::Value => self.top_refs.push(reference),
            None => {}
        }
    }

    fn note_identifier(&mut self, name: &str) {
        if is_mangled(name) && self.in_class() {
            if let Some(f) = self.sink() {
                self.functions[f.0].uses_mangled_name = true;
            }
        }
    }

    /// Records a name load; returns true the first time the function sees it.
    fn load(&mut self, name: &str) -> bool {
        self.note_identifier(name);
        if self.shadowed(name) {
            return false;
        }
        if let Some(c) = &mut self.capture {
            c.insert(name.to_string());
        }
        let Some(f) = self.sink() else {
            return false;
        };
        let rec = &mut self.functions[f.0];
        if name == "super" || name == "__class__" {
            rec.uses_class_cell = true;
        }
        rec.own_loads.insert(name.to_string())
    }

    fn qualify(&mut self, name: &str) -> String {
        let mut parts = vec![self.cx.name.to_string()];
        parts.extend(self.names.iter().cloned());
        parts.push(name.to_string());
        let base = parts.join(".");
        let n = self.qualnames.entry(base.clone()).or_insert(0);
        *n += 1;
        if *n == 1 {
            base
        } else {
            let renamed = format!("{base}#{n}");
            self.diagnostics.push(Diagnostic::info(
                self.path,
                format!("duplicate definition {base}; recorded as {renamed}"),
            ));
            renamed
        }
    }

    fn params_of(args: &ast::Arguments) -> Vec<Param> {
        let mut params = Vec::new();
        let mut push = |a: &ast::ArgWithDefault, kind| {
            params.push(Param {
                name: a.def.arg.to_string(),
                kind,
                has_default: a.default.is_some(),
            })
        };
        args.posonlyargs
            .iter()
            .for_each(|a| push(a, ParamKind::PositionalOnly));
        args.args
            .iter()
            .for_each(|a| push(a, ParamKind::Positional));
        if let Some(v) = &args.vararg {
            params.push(Param {
                name: v.arg.to_string(),
                kind: ParamKind::VarArgs,
                has_default: false,
            });
        }
        args.kwonlyargs.iter().for_each(|a| {
            params.push(Param {
                name: a.def.arg.to_string(),
                kind: ParamKind::KeywordOnly,
                has_default: a.default.is_some(),
            })
        });
        if let Some(k) = &args.kwarg {
            params.push(Param {
                name: k.arg.to_string(),
                kind: ParamKind::KwArgs,
                has_default: false,
            });
        }
        params
    }

    /// Defaults and annotations evaluate in the enclosing scope; returns the
    /// names the defaults load.
    fn arguments_outer(&mut self, args: &ast::Arguments) -> BTreeSet<String> {
        let all: Vec<&ast::ArgWithDefault> = args
            .posonlyargs
            .iter()
            .chain(&args.args)
            .chain(&args.kwonlyargs)
            .collect();
        let saved = self.capture.replace(BTreeSet::new());
        for a in &all {
            if let Some(d) = &a.default {
                self.expr(d);
            }
        }
        let defaults = std::mem::replace(&mut self.capture, saved).unwrap_or_default();
        if let Some(outer) = &mut self.capture {
            outer.extend(defaults.iter().cloned());
        }
        for a in &all {
            if let Some(ann) = &a.def.annotation {
                self.expr(ann);
            }
        }
        for a in args.vararg.iter().chain(&args.kwarg) {
            if let Some(ann) = &a.annotation {
                self.expr(ann);
            }
        }
        defaults
    }

    #[allow(clippy::too_many_arguments)]
    fn new_function(
        &mut self,
        name: &str,
        args: &ast::Arguments,
        span: std::ops::Range<usize>,
        body: Option<(usize, usize)>,
        decorators: Vec<String>,
        first_line: u32,
        is_lambda: bool,
        is_async: bool,
        is_stub: bool,
    ) -> FunctionId {
        let id = FunctionId(self.functions.len());
        let qualname = self.qualify(name);
        let params = Self::params_of(args);
        let mut scope = Scope::default();
        for p in &params {
            scope.bind(&p.name, Binding::Value);
        }
        let line_start = self.cx.lines.line_start(self.line(span.start));
        let end_line = self.line(span.end.saturating_sub(1).max(span.start));
        self.functions.push(FunctionRecord {
            qualname,
            name: name.to_string(),
            module: self.cx.id,
            params,
            decorators,
            body_span: (self.line(span.start), end_line),
            first_line,
            free_names: BTreeSet::new(),
            parent: self.sink(),
            enclosing: self.owner(),
            is_magic: is_magic_name(name),
            is_method: matches!(self.frames.last(), Some(Frame::Class(_))),
            is_lambda,
            is_async,
            is_generator: false,
            is_stub,
            span: (span.start, span.end),
            body,
            column: span.start - line_start,
            scope,
            refs: Vec::new(),
            own_loads: BTreeSet::new(),
            default_names: BTreeSet::new(),
            uses_class_cell: false,
            uses_mangled_name: false,
        });
        self.module_functions.push(id);
        id
    }

    fn with_frame(&mut self, frame: Frame, name: &str, f: impl FnOnce(&mut Self)) {
        self.frames.push(frame);
        self.names.push(name.to_string());
        let saved = std::mem::take(&mut self.shadow);
        f(self);
        self.shadow = saved;
        self.names.pop();
        self.frames.pop();
    }

    fn decorators(&mut self, decorators: &[Expr]) -> (Vec<String>, u32) {
        let mut texts = Vec::new();
        let mut first = u32::MAX;
        for d in decorators {
            let r = range_of(d);
            first = first.min(self.line(r.start));
            texts.push(self.text(r.clone()));
            match d {
                Expr::Name(n) => {
                    self.load(&n.id);
                    self.add_ref(target_of(d), RefKind::Decorator, r);
                }
                Expr::Attribute(a) => {
                    self.note_identifier(&a.attr);
                    self.expr(&a.value);
                    self.add_ref(target_of(d), RefKind::Decorator, r);
                }
                other => self.expr(other),
            }
        }
        (texts, first)
    }

    #[allow(clippy::too_many_arguments)]
    fn function_def(
        &mut self,
        stmt_range: std::ops::Range<usize>,
        name: &str,
        args: &ast::Arguments,
        body: &[Stmt],
        decorator_list: &[Expr],
        returns: Option<&Expr>,
        is_async: bool,
    ) {
        let (decorators, first_dec) = self.decorators(decorator_list);
        let default_names = self.arguments_outer(args);
        if let Some(r) = returns {
            self.expr(r);
        }
        let body_range = match (body.first(), body.last()) {
            (Some(a), Some(b)) => Some((range_of(a).start, range_of(b).end)),
            _ => None,
        };
        let first_line = first_dec.min(self.line(stmt_range.start));
        let id = self.new_function(
            name,
            args,
            stmt_range.clone(),
            body_range,
            decorators,
            first_line,
            false,
            is_async,
            is_stub_body(body),
        );
        self.functions[id.0].default_names = default_names;
        self.note_identifier(name);
        self.bind(name, Binding::Function(id));
        if !decorator_list.is_empty() {
            // The decorator receives the function object.
            self.add_ref(Target::Function(id), RefKind::Arg, stmt_range);
        }
        self.with_frame(Frame::Function(id), name, |ex| {
            let saved = ex.nesting;
            ex.nesting += 1;
            ex.block(body);
            ex.nesting = saved;
        });
    }

    fn class_def(&mut self, c: &ast::StmtClassDef) {
        self.decorators(&c.decorator_list);
        for b in &c.bases {
            self.expr(b);
        }
        for k in &c.keywords {
            self.expr(&k.value);
        }
        let name = c.name.as_str();
        let id = ClassId(self.classes.len());
        let mut parts = vec![self.cx.name.to_string()];
        parts.extend(self.names.iter().cloned());
        parts.push(name.to_string());
        self.classes.push(ClassRecord {
            qualname: parts.join("."),
            name: name.to_string(),
            module: self.cx.id,
            parent: self.sink(),
            enclosing: self.owner(),
            scope: Scope::default(),
            line: self.line(range_of(c).start),
        });
        self.module_classes.push(id);
        self.bind(name, Binding::Class(id));
        self.with_frame(Frame::Class(id), name, |ex| {
            let saved = ex.nesting;
            ex.nesting += 1;
            ex.block(&c.body);
            ex.nesting = saved;
        });
    }

    fn lambda(&mut self, l: &ast::ExprLambda) -> FunctionId {
        let default_names = self.arguments_outer(&l.args);
        let r = range_of(l);
        let line = self.line(r.start);
        let id = self.new_function(
            "<lambda>",
            &l.args,
            r,
            None,
            Vec::new(),
            line,
            true,
            false,
            false,
        );
        self.functions[id.0].default_names = default_names;
        self.with_frame(Frame::Function(id), "<lambda>", |ex| ex.expr(&l.body));
        id
    }

    fn resolve_relative(&self, level: u32, module: Option<&str>) -> Option<String> {
        if level == 0 {
            return Some(module.unwrap_or_default().to_string());
        }
        let mut parts: Vec<&str> = if self.cx.name.is_empty() {
            Vec::new()
        } else {
            self.cx.name.split('.').collect()
        };
        if !self.cx.is_package {
            parts.pop();
        }
        for _ in 1..level {
            parts.pop()?;
        }
        if let Some(m) = module {
            parts.extend(m.split('.'));
        }
        Some(parts.join("."))
    }

    fn import(&mut self, local: &str, target: String, kind: ImportKind) {
        self.bind(local, Binding::Import(target.clone()));
        if self.frames.is_empty() {
            self.imports.push(ImportBinding {
                local_name: local.to_string(),
                target,
                kind,
            });
        }
    }

    fn block(&mut self, body: &[Stmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn nested(&mut self, body: &[Stmt]) {
        self.nesting += 1;
        self.block(body);
        self.nesting -= 1;
    }

    fn bind_alias_or_value(&mut self, target: &Expr, alias: &Option<Target>) {
        match (target, alias) {
            (Expr::Name(n), Some(t)) => {
                self.note_identifier(&n.id);
                self.bind(&n.id, Binding::Alias(t.clone()));
            }
            _ => self.expr(target),
        }
    }

    fn assigned_value(&mut self, value: &Expr) -> Option<Target> {
        if let Expr::Lambda(l) = value {
            return Some(Target::Function(self.lambda(l)));
        }
        self.expr(value);
        match target_of(value) {
            Target::Dynamic => None,
            Target::Name(n) if self.shadowed(&n) => None,
            t => Some(t),
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        match s {
            Stmt::FunctionDef(f) => self.function_def(
                range_of(s),
                &f.name,
                &f.args,
                &f.body,
                &f.decorator_list,
                f.returns.as_deref(),
                false,
            ),
            Stmt::AsyncFunctionDef(f) => self.function_def(
                range_of(s),
                &f.name,
                &f.args,
                &f.body,
                &f.decorator_list,
                f.returns.as_deref(),
                true,
            ),
            Stmt::ClassDef(c) => self.class_def(c),
            Stmt::Return(r) => {
                if let Some(v) = &r.value {
                    self.expr(v);
                }
            }
            Stmt::Delete(d) => d.targets.iter().for_each(|t| self.expr(t)),
            Stmt::Assign(a) => {
                let alias = self.assigned_value(&a.value);
                for t in &a.targets {
                    self.bind_alias_or_value(t, &alias);
                }
            }
            Stmt::TypeAlias(t) => {
                self.expr(&t.value);
                self.expr(&t.name);
            }
            Stmt::AugAssign(a) => {
                if let Expr::Name(n) = a.target.as_ref() {
                    self.load(&n.id);
                }
                self.expr(&a.value);
                self.expr(&a.target);
            }
            Stmt::AnnAssign(a) => {
                self.expr(&a.annotation);
                match &a.value {
                    Some(v) => {
                        let alias = self.assigned_value(v);
                        self.bind_alias_or_value(&a.target, &alias);
                    }
                    None => {
                        if self.sink().is_some() || !matches!(a.target.as_ref(), Expr::Name(_)) {
                            self.expr(&a.target);
                        }
                    }
                }
            }
            Stmt::For(f) => {
                self.expr(&f.iter);
                self.expr(&f.target);
                self.nested(&f.body);
                self.nested(&f.orelse);
            }
            Stmt::AsyncFor(f) => {
                self.expr(&f.iter);
                self.expr(&f.target);
                self.nested(&f.body);
                self.nested(&f.orelse);
            }
            Stmt::While(w) => {
                self.expr(&w.test);
                self.nested(&w.body);
                self.nested(&w.orelse);
            }
            Stmt::If(i) => {
                self.expr(&i.test);
                self.nested(&i.body);
                self.nested(&i.orelse);
            }
            Stmt::With(w) => {
                for item in &w.items {
                    self.expr(&item.context_expr);
                    if let Some(v) = &item.optional_vars {
                        self.expr(v);
                    }
                }
                self.nested(&w.body);
            }
            Stmt::AsyncWith(w) => {
                for item in &w.items {
                    self.expr(&item.context_expr);
                    if let Some(v) = &item.optional_vars {
                        self.expr(v);
                    }
                }
                self.nested(&w.body);
            }
            Stmt::Match(m) => {
                self.expr(&m.subject);
                for case in &m.cases {
                    self.pattern(&case.pattern);
                    if let Some(g) = &case.guard {
                        self.expr(g);
                    }
                    self.nested(&case.body);
                }
            }
            Stmt::Raise(r) => {
                for e in r.exc.iter().chain(&r.cause) {
                    self.expr(e);
                }
            }
            Stmt::Try(t) => self.try_stmt(&t.body, &t.handlers, &t.orelse, &t.finalbody),
            Stmt::TryStar(t) => self.try_stmt(&t.body, &t.handlers, &t.orelse, &t.finalbody),
            Stmt::Assert(a) => {
                self.expr(&a.test);
                if let Some(m) = &a.msg {
                    self.expr(m);
                }
            }
            Stmt::Import(i) => {
                for alias in &i.names {
                    let name = alias.name.as_str();
                    match &alias.asname {
                        Some(asname) => self.import(asname, name.to_string(), ImportKind::Aliased),
                        None => {
                            let head = name.split('.').next().unwrap_or(name);
                            self.import(head, head.to_string(), ImportKind::ModuleImport)
                        }
                    }
                }
            }
            Stmt::ImportFrom(i) => {
                let level = i.level.map(|l| l.to_u32()).unwrap_or(0);
                let Some(base) = self.resolve_relative(level, i.module.as_deref()) else {
                    self.diagnostics.push(Diagnostic::warn(
                        self.path,
                        "relative import beyond the package root",
                    ));
                    return;
                };
                for alias in &i.names {
                    let name = alias.name.as_str();
                    if name == "*" {
                        let definite = self.frames.is_empty() && self.nesting == 0;
                        self.star_imports.push((base.clone(), definite));
                        continue;
                    }
                    let target = if base.is_empty() {
                        name.to_string()
                    } else {
                        format!("{base}.{name}")
                    };
                    match &alias.asname {
                        Some(asname) => self.import(asname, target, ImportKind::Aliased),
                        None => self.import(name, target, ImportKind::FromImport),
                    }
                }
            }
            Stmt::Global(g) => {
                if self.sink().is_some() {
                    let names: Vec<String> = g.names.iter().map(|n| n.to_string()).collect();
                    self.scope_mut().globals.extend(names);
                }
            }
            Stmt::Nonlocal(n) => {
                let names: Vec<String> = n.names.iter().map(|n| n.to_string()).collect();
                self.scope_mut().nonlocals.extend(names);
            }
            Stmt::Expr(e) => self.expr(&e.value),
            Stmt::Pass(_) | Stmt::Break(_) | Stmt::Continue(_) => {}
        }
    }

    fn try_stmt(
        &mut self,
        body: &[Stmt],
        handlers: &[ast::ExceptHandler],
        orelse: &[Stmt],
        finalbody: &[Stmt],
    ) {
        self.nested(body);
        for ast::ExceptHandler::ExceptHandler(h) in handlers {
            if let Some(t) = &h.type_ {
                self.expr(t);
            }
            if let Some(n) = &h.name {
                self.bind(n, Binding::Value);
            }
            self.nested(&h.body);
        }
        self.nested(orelse);
        self.nested(finalbody);
    }

    fn pattern(&mut self, p: &Pattern) {
        match p {
            Pattern::MatchValue(v) => self.expr(&v.value),
            Pattern::MatchSingleton(_) => {}
            Pattern::MatchSequence(s) => s.patterns.iter().for_each(|p| self.pattern(p)),
            Pattern::MatchMapping(m) => {
                m.keys.iter().for_each(|k| self.expr(k));
                m.patterns.iter().for_each(|p| self.pattern(p));
                if let Some(r) = &m.rest {
                    self.bind(r, Binding::Value);
                }
            }
            Pattern::MatchClass(c) => {
                self.expr(&c.cls);
                c.patterns
                    .iter()
                    .chain(&c.kwd_patterns)
                    .for_each(|p| self.pattern(p));
            }
            Pattern::MatchStar(s) => {
                if let Some(n) = &s.name {
                    self.bind(n, Binding::Value);
                }
            }
            Pattern::MatchAs(a) => {
                if let Some(p) = &a.pattern {
                    self.pattern(p);
                }
                if let Some(n) = &a.name {
                    self.bind(n, Binding::Value);
                }
            }
            Pattern::MatchOr(o) => o.patterns.iter().for_each(|p| self.pattern(p)),
        }
    }

    fn mark_generator(&mut self) {
        if let Some(f) = self.sink() {
            self.functions[f.0].is_generator = true;
        }
    }

    fn argument(&mut self, e: &Expr) {
        let inner = match e {
            Expr::Starred(s) => s.value.as_ref(),
            other => other,
        };
        match target_of(inner) {
            Target::Name(n) if self.shadowed(&n) => {}
            t @ (Target::Name(_) | Target::Attr { .. }) => {
                self.add_ref(t, RefKind::Arg, range_of(inner));
            }
            _ => {}
        }
        self.expr(e);
    }

    fn call(&mut self, c: &ast::ExprCall) {
        let mut target = target_of(&c.func);
        match c.func.as_ref() {
            Expr::Name(n) => {
                if self.shadowed(&n.id) {
                    target = Target::Dynamic;
                }
                self.load(&n.id);
            }
            Expr::Attribute(a) => {
                self.note_identifier(&a.attr);
                self.expr(&a.value);
            }
            other => self.expr(other),
        }
        self.add_ref(target, RefKind::Call, range_of(c.func.as_ref()));
        for a in &c.args {
            self.argument(a);
        }
        for k in &c.keywords {
            self.argument(&k.value);
        }
    }

    fn comprehension(&mut self, generators: &[ast::Comprehension], elts: &[&Expr]) {
        let Some(first) = generators.first() else {
            elts.iter().for_each(|e| self.expr(e));
            return;
        };
        self.expr(&first.iter);
        self.shadow.push(BTreeSet::new());
        for (i, g) in generators.iter().enumerate() {
            if i > 0 {
                self.expr(&g.iter);
            }
            let mut names = BTreeSet::new();
            store_names(&g.target, &mut names);
            self.shadow.last_mut().expect("pushed above").extend(names);
            for cond in &g.ifs {
                self.expr(cond);
            }
        }
        for e in elts {
            self.expr(e);
        }
        self.shadow.pop();
    }

    fn expr(&mut self, e: &Expr) {
        match e {
            Expr::Name(n) => match n.ctx {
                ExprContext::Load => {
                    if self.load(&n.id) {
                        self.add_ref(Target::Name(n.id.to_string()), RefKind::Value, range_of(n));
                    }
                }
                _ => {
                    self.note_identifier(&n.id);
                    if !self.shadowed(&n.id) {
                        self.bind(&n.id, Binding::Value);
                    }
                }
            },
            Expr::Call(c) => self.call(c),
            Expr::Attribute(a) => {
                self.note_identifier(&a.attr);
                self.expr(&a.value);
            }
            Expr::Lambda(l) => {
                self.lambda(l);
            }
            Expr::ListComp(c) => self.comprehension(&c.generators, &[&c.elt]),
            Expr::SetComp(c) => self.comprehension(&c.generators, &[&c.elt]),
            Expr::GeneratorExp(c) => self.comprehension(&c.generators, &[&c.elt]),
            Expr::DictComp(c) => self.comprehension(&c.generators, &[&c.key, &c.value]),
            Expr::NamedExpr(n) => {
                self.expr(&n.value);
                if let Expr::Name(t) = n.target.as_ref() {
                    // Assignment expressions bind in the enclosing function scope.
                    self.scope_for_walrus().bind(&t.id, Binding::Value);
                }
            }
            Expr::Yield(y) => {
                self.mark_generator();
                if let Some(v) = &y.value {
                    self.expr(v);
                }
            }
            Expr::YieldFrom(y) => {
                self.mark_generator();
                self.expr(&y.value);
            }
            Expr::Await(a) => self.expr(&a.value),
            Expr::BoolOp(b) => b.values.iter().for_each(|v| self.expr(v)),
            Expr::BinOp(b) => {
                self.expr(&b.left);
                self.expr(&b.right);
            }
            Expr::UnaryOp(u) => self.expr(&u.operand),
            Expr::IfExp(i) => {
                self.expr(&i.test);
                self.expr(&i.body);
                self.expr(&i.orelse);
            }
            Expr::Dict(d) => {
                d.keys.iter().flatten().for_each(|k| self.expr(k));
                d.values.iter().for_each(|v| self.expr(v));
            }
            Expr::Set(s) => s.elts.iter().for_each(|v| self.expr(v)),
            Expr::Compare(c) => {
                self.expr(&c.left);
                c.comparators.iter().for_each(|v| self.expr(v));
            }
            Expr::FormattedValue(f) => {
                self.expr(&f.value);
                if let Some(spec) = &f.format_spec {
                    self.expr(spec);
                }
            }
            Expr::JoinedStr(j) => j.values.iter().for_each(|v| self.expr(v)),
            Expr::Constant(_) => {}
            Expr::Subscript(s) => {
                self.expr(&s.value);
                self.expr(&s.slice);
            }
            Expr::Starred(s) => self.expr(&s.value),
            Expr::List(l) => l.elts.iter().for_each(|v| self.expr(v)),
            Expr::Tuple(t) => t.elts.iter().for_each(|v| self.expr(v)),
            Expr::Slice(s) => {
                for part in [&s.lower, &s.upper, &s.step].into_iter().flatten() {
                    self.expr(part);
                }
            }
        }
    }

    fn scope_for_walrus(&mut self) -> &mut Scope {
        match self.sink() {
            Some(f) => &mut self.functions[f.0].scope,
            None => &mut self.scope,
        }
    }
}

/// Names bound by an assignment target.
pub(crate) fn store_names(e: &Expr, out: &mut BTreeSet<String>) {
    match e {
        Expr::Name(n) => {
            out.insert(n.id.to_string());
        }
        Expr::Tuple(t) => t.elts.iter().for_each(|x| store_names(x, out)),
        Expr::List(l) => l.elts.iter().for_each(|x| store_names(x, out)),
        Expr::Starred(s) => store_names(&s.value, out),
        _ => {}
    }
}

fn meet(a: Option<BTreeSet<String>>, b: Option<BTreeSet<String>>) -> Option<BTreeSet<String>> {
    match (a, b) {
        (Some(a), Some(b)) => Some(a.intersection(&b).cloned().collect()),
        (Some(x), None) | (None, Some(x)) => Some(x),
        (None, None) => None,
    }
}

/// Names bound on every path through `body`; `None` when every path diverges.
fn definite(body: &[Stmt], mut set: BTreeSet<String>) -> Option<BTreeSet<String>> {
    for s in body {
        match s {
            Stmt::FunctionDef(f) => {
                set.insert(f.name.to_string());
            }
            Stmt::AsyncFunctionDef(f) => {
                set.insert(f.name.to_string());
            }
            Stmt::ClassDef(c) => {
                set.insert(c.name.to_string());
            }
            Stmt::Assign(a) => a.targets.iter().for_each(|t| store_names(t, &mut set)),
            Stmt::AnnAssign(a) if a.value.is_some() => store_names(&a.target, &mut set),
            Stmt::TypeAlias(t) => store_names(&t.name, &mut set),
            Stmt::Import(i) => {
                for alias in &i.names {
                    let name = match &alias.asname {
                        Some(n) => n.to_string(),
                        None => alias.name.split('.').next().unwrap_or_default().to_string(),
                    };
                    set.insert(name);
                }
            }
            Stmt::ImportFrom(i) => {
                for alias in i.names.iter().filter(|a| a.name.as_str() != "*") {
                    set.insert(alias.asname.as_ref().unwrap_or(&alias.name).to_string());
                }
            }
            Stmt::Delete(d) => {
                let mut gone = BTreeSet::new();
                d.targets.iter().for_each(|t| store_names(t, &mut gone));
                set.retain(|n| !gone.contains(n));
            }
            Stmt::If(i) => {
                let a = definite(&i.body, set.clone());
                let b = definite(&i.orelse, set.clone());
                set = meet(a, b)?;
            }
            Stmt::Try(t) => {
                set = definite_try(&set, &t.body, &t.handlers, &t.orelse, &t.finalbody)?;
            }
            Stmt::TryStar(t) => {
                set = definite_try(&set, &t.body, &t.handlers, &t.orelse, &t.finalbody)?;
            }
            Stmt::With(w) => {
                for item in &w.items {
                    if let Some(v) = &item.optional_vars {
                        store_names(v, &mut set);
                    }
                }
                set = definite(&w.body, set)?;
            }
            Stmt::Raise(_) | Stmt::Return(_) => return None,
            _ => {}
        }
    }
    Some(set)
}

fn definite_try(
    set: &BTreeSet<String>,
    body: &[Stmt],
    handlers: &[ast::ExceptHandler],
    orelse: &[Stmt],
    finalbody: &[Stmt],
) -> Option<BTreeSet<String>> {
    let mut result = definite(body, set.clone()).and_then(|s| definite(orelse, s));
    for ast::ExceptHandler::ExceptHandler(h) in handlers {
        result = meet(result, definite(&h.body, set.clone()));
    }
    definite(finalbody, result?)
}
