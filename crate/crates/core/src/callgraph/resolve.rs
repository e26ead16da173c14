//! Name and attribute resolution over the flow-insensitive scope facts.

use std::collections::{BTreeSet, HashMap};

use crate::package_model::{
    Binding, ClassId, FunctionId, ModuleId, PackageModel, RefKind, Reference, ScopeOwner, Target,
};

/// Alias and import hops followed before giving up.
pub const MAX_ALIAS_DEPTH: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Val {
    Module(ModuleId),
    Class(ClassId),
    Func(FunctionId),
}

/// Outcome of resolving one reference.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    pub targets: BTreeSet<FunctionId>,
    /// The reference is a call that reached nothing inside the package.
    pub unresolved: bool,
}

pub struct Resolver<'a> {
    pkg: &'a PackageModel,
    /// Methods by simple name, for attribute calls.
    methods: HashMap<&'a str, Vec<FunctionId>>,
    /// Class-level aliases (`get = _get`) by attribute name.
    class_aliases: HashMap<&'a str, Vec<(ClassId, &'a Binding)>>,
}

impl<'a> Resolver<'a> {
    pub fn new(pkg: &'a PackageModel) -> Self {
        let mut methods: HashMap<&str, Vec<FunctionId>> = HashMap::new();
        for (i, f) in pkg.functions.iter().enumerate() {
            if f.is_method {
                methods
                    .entry(f.name.as_str())
                    .or_default()
                    .push(FunctionId(i));
            }
        }
        let mut class_aliases: HashMap<&str, Vec<(ClassId, &Binding)>> = HashMap::new();
        for (i, c) in pkg.classes.iter().enumerate() {
            for (name, bindings) in &c.scope.bindings {
                for b in bindings {
                    if matches!(b, Binding::Alias(_) | Binding::Import(_)) {
                        class_aliases
                            .entry(name.as_str())
                            .or_default()
                            .push((ClassId(i), b));
                    }
                }
            }
        }
        Resolver {
            pkg,
            methods,
            class_aliases,
        }
    }

    pub fn resolve(&self, r: &Reference) -> Resolution {
        let mut vals = BTreeSet::new();
        let mut cha = BTreeSet::new();
        match &r.target {
            Target::Function(f) => {
                vals.insert(Val::Func(*f));
            }
            Target::Name(n) => self.name_values(r.scope, n, 0, &mut vals),
            Target::Attr { chain, attr } => {
                if r.kind != RefKind::Value {
                    self.cha(attr, &mut cha);
                }
                if let Some(chain) = chain {
                    let mut base = BTreeSet::new();
                    self.chain_values(r.scope, chain, 0, &mut base);
                    for v in base {
                        self.attr_values(v, attr, 0, &mut vals);
                    }
                }
            }
            Target::Dynamic => {}
        }
        let mut targets = cha;
        for v in &vals {
            match (v, r.kind) {
                (Val::Func(f), _) => {
                    targets.insert(*f);
                }
                (Val::Class(c), RefKind::Call | RefKind::Decorator | RefKind::Arg) => {
                    for init in ["__init__", "__new__"] {
                        let mut out = BTreeSet::new();
                        self.attr_values(Val::Class(*c), init, 0, &mut out);
                        targets.extend(out.into_iter().filter_map(|v| match v {
                            Val::Func(f) => Some(f),
                            _ => None,
                        }));
                    }
                }
                _ => {}
            }
        }
        let callish = matches!(r.kind, RefKind::Call | RefKind::Decorator);
        Resolution {
            unresolved: callish
                && targets.is_empty()
                && !vals.iter().any(|v| matches!(v, Val::Class(_))),
            targets,
        }
    }

    fn cha(&self, attr: &str, out: &mut BTreeSet<FunctionId>) {
        if let Some(ms) = self.methods.get(attr) {
            out.extend(ms.iter().copied());
        }
        if let Some(aliases) = self.class_aliases.get(attr) {
            for (c, b) in aliases {
                let mut vals = BTreeSet::new();
                self.binding_values(ScopeOwner::Class(*c), b, 1, &mut vals);
                out.extend(vals.into_iter().filter_map(|v| match v {
                    Val::Func(f) => Some(f),
                    _ => None,
                }));
            }
        }
    }

    /// Scope chain: the starting scope, then enclosing functions (class
    /// scopes are skipped), then the module.
    fn name_values(&self, start: ScopeOwner, name: &str, depth: usize, out: &mut BTreeSet<Val>) {
        let mut owner = Some(start);
        let mut first = true;
        while let Some(o) = owner {
            let skip_class = matches!(o, ScopeOwner::Class(_)) && !first;
            let scope = self.pkg.scope(o);
            if let ScopeOwner::Function(_) = o {
                if scope.globals.contains(name) {
                    let m = self.module_of(o);
                    self.scope_values(ScopeOwner::Module(m), name, depth, out);
                    return;
                }
            }
            if !skip_class
                && (matches!(o, ScopeOwner::Module(_)) || scope.is_local(name))
                && scope.bindings.contains_key(name)
            {
                self.scope_values(o, name, depth, out);
                return;
            }
            first = false;
            owner = self.enclosing(o);
        }
    }

    fn scope_values(&self, owner: ScopeOwner, name: &str, depth: usize, out: &mut BTreeSet<Val>) {
        if let Some(bindings) = self.pkg.scope(owner).bindings.get(name) {
            for b in bindings {
                self.binding_values(owner, b, depth, out);
            }
        }
    }

    fn binding_values(
        &self,
        owner: ScopeOwner,
        b: &Binding,
        depth: usize,
        out: &mut BTreeSet<Val>,
    ) {
        if depth > MAX_ALIAS_DEPTH {
            return;
        }
        match b {
            Binding::Function(f) => {
                out.insert(Val::Func(*f));
            }
            Binding::Class(c) => {
                out.insert(Val::Class(*c));
            }
            Binding::Import(path) => self.dotted_values(path, depth + 1, out),
            Binding::Alias(t) => match t {
                Target::Function(f) => {
                    out.insert(Val::Func(*f));
                }
                Target::Name(n) => self.name_values(owner, n, depth + 1, out),
                Target::Attr {
                    chain: Some(chain),
                    attr,
                } => {
                    let mut base = BTreeSet::new();
                    self.chain_values(owner, chain, depth + 1, &mut base);
                    for v in base {
                        self.attr_values(v, attr, depth + 1, out);
                    }
                }
                Target::Attr { chain: None, .. } | Target::Dynamic => {}
            },
            Binding::Value => {}
        }
    }

    fn chain_values(
        &self,
        owner: ScopeOwner,
        chain: &[String],
        depth: usize,
        out: &mut BTreeSet<Val>,
    ) {
        let Some((head, rest)) = chain.split_first() else {
            return;
        };
        let mut cur = BTreeSet::new();
        self.name_values(owner, head, depth, &mut cur);
        for attr in rest {
            let mut next = BTreeSet::new();
            for v in cur {
                self.attr_values(v, attr, depth, &mut next);
            }
            cur = next;
        }
        out.extend(cur);
    }

    /// Resolves an absolute dotted path through the longest in-package module prefix.
    fn dotted_values(&self, path: &str, depth: usize, out: &mut BTreeSet<Val>) {
        if depth > MAX_ALIAS_DEPTH {
            return;
        }
        let parts: Vec<&str> = path.split('.').collect();
        for cut in (1..=parts.len()).rev() {
            let prefix = parts[..cut].join(".");
            if let Some(m) = self.pkg.module_by_name(&prefix) {
                let mut cur = BTreeSet::from([Val::Module(m)]);
                for attr in &parts[cut..] {
                    let mut next = BTreeSet::new();
                    for v in cur {
                        self.attr_values(v, attr, depth, &mut next);
                    }
                    cur = next;
                }
                out.extend(cur);
                return;
            }
        }
    }

    fn attr_values(&self, base: Val, attr: &str, depth: usize, out: &mut BTreeSet<Val>) {
        match base {
            Val::Module(m) => {
                let module = self.pkg.module(m);
                if module.scope.bindings.contains_key(attr) {
                    self.scope_values(ScopeOwner::Module(m), attr, depth, out);
                } else if let Some(sub) = self
                    .pkg
                    .module_by_name(&format!("{}.{attr}", module.dotted_name))
                {
                    out.insert(Val::Module(sub));
                }
            }
            Val::Class(c) => self.scope_values(ScopeOwner::Class(c), attr, depth, out),
            Val::Func(_) => {}
        }
    }

    fn enclosing(&self, o: ScopeOwner) -> Option<ScopeOwner> {
        match o {
            ScopeOwner::Module(_) => None,
            ScopeOwner::Class(c) => Some(self.pkg.class(c).enclosing),
            ScopeOwner::Function(f) => Some(self.pkg.function(f).enclosing),
        }
    }

    fn module_of(&self, o: ScopeOwner) -> ModuleId {
        match o {
            ScopeOwner::Module(m) => m,
            ScopeOwner::Class(c) => self.pkg.class(c).module,
            ScopeOwner::Function(f) => self.pkg.function(f).module,
        }
    }
}
