//! Reachability roots: serverless handlers, module-initialization
//! functions, magic methods and user-declared entries.

mod config;
mod profile;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::callgraph::module_level_targets;
use crate::diagnostics::Diagnostic;
use crate::package_model::{FileCategory, PackageModel, ParamKind, ScopeOwner};

pub use config::{
    detect_config, handler_to_qualname, parse_config, HandlerSpec, CONFIG_FILE_NAMES,
};
pub use profile::InitProfile;

/// Ordered from strongest to weakest; a member keeps its strongest source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    UserOverride,
    ConfigFile,
    SignatureMatch,
    ProfileList,
    ToplevelCall,
    MagicPattern,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::UserOverride => "user-override",
            Provenance::ConfigFile => "config-file",
            Provenance::SignatureMatch => "signature-match",
            Provenance::ProfileList => "profile-list",
            Provenance::ToplevelCall => "toplevel-call",
            Provenance::MagicPattern => "magic-pattern",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EntryError {
    #[error("cannot parse {}{}: {message}", path.display(), line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    ConfigParse {
        path: PathBuf,
        line: Option<usize>,
        message: String,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("handler {0} does not match any function in the package")]
    HandlerNotFound(String),
    #[error("no application entries found")]
    NoEntriesFound,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntrySet {
    pub handlers: BTreeSet<String>,
    pub module_init: BTreeSet<String>,
    pub magic: BTreeSet<String>,
    pub user_declared: BTreeSet<String>,
    pub provenance: BTreeMap<String, Provenance>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl EntrySet {
    /// Every member, each once, in qualname order.
    pub fn all(&self) -> impl Iterator<Item = &str> {
        self.provenance.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn contains(&self, qualname: &str) -> bool {
        self.provenance.contains_key(qualname)
    }

    fn note(&mut self, qualname: &str, p: Provenance) {
        let slot = self.provenance.entry(qualname.to_string()).or_insert(p);
        *slot = (*slot).min(p);
        let set = match p {
            Provenance::UserOverride => &mut self.user_declared,
            Provenance::ConfigFile | Provenance::SignatureMatch => &mut self.handlers,
            Provenance::ProfileList | Provenance::ToplevelCall => &mut self.module_init,
            Provenance::MagicPattern => &mut self.magic,
        };
        set.insert(qualname.to_string());
    }

    /// Adds a validated user entry; never removes anything.
    pub fn add_override(&mut self, pkg: &PackageModel, qualname: &str) -> Result<(), EntryError> {
        if pkg.lookup(qualname).is_none() {
            return Err(EntryError::HandlerNotFound(qualname.to_string()));
        }
        self.note(qualname, Provenance::UserOverride);
        Ok(())
    }
}

const HANDLER_SIGNATURES: [&[&str]; 2] = [&["event", "context"], &["request"]];

fn signature_matches(pkg: &PackageModel, id: crate::FunctionId) -> bool {
    let f = pkg.function(id);
    if f.is_lambda || !matches!(f.enclosing, ScopeOwner::Module(_)) {
        return false;
    }
    let positional = f
        .params
        .iter()
        .all(|p| matches!(p.kind, ParamKind::Positional | ParamKind::PositionalOnly));
    let names: Vec<&str> = f.params.iter().map(|p| p.name.as_str()).collect();
    positional && HANDLER_SIGNATURES.contains(&names.as_slice())
}

/// Handlers from the configuration file, the signature convention, and
/// user overrides, each mapped to its strongest provenance.
pub fn find_handlers(
    pkg: &PackageModel,
    config_path: Option<&Path>,
    overrides: &[String],
) -> Result<BTreeMap<String, Provenance>, EntryError> {
    let mut out: BTreeMap<String, Provenance> = BTreeMap::new();
    let mut covered: BTreeSet<String> = BTreeSet::new();
    if let Some(path) = config_path {
        let text = std::fs::read_to_string(path).map_err(|e| EntryError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        for spec in parse_config(&text, path)? {
            if pkg.lookup(&spec.qualname).is_none() {
                return Err(EntryError::HandlerNotFound(spec.qualname));
            }
            if let Some((module, _)) = spec.qualname.rsplit_once('.') {
                covered.insert(module.to_string());
            }
            out.insert(spec.qualname, Provenance::ConfigFile);
        }
    }
    for m in &pkg.modules {
        if covered.contains(&m.dotted_name) || pkg.files[m.file].category != FileCategory::AppSource
        {
            continue;
        }
        for id in &m.functions {
            if signature_matches(pkg, *id) {
                out.entry(pkg.function(*id).qualname.clone())
                    .or_insert(Provenance::SignatureMatch);
            }
        }
    }
    for q in overrides {
        if pkg.lookup(q).is_none() {
            return Err(EntryError::HandlerNotFound(q.clone()));
        }
        out.insert(q.clone(), Provenance::UserOverride);
    }
    if out.is_empty() {
        return Err(EntryError::NoEntriesFound);
    }
    Ok(out)
}

/// Profiled initialization functions plus everything module-level code
/// references at import time. Unresolved profile lines become warnings.
pub fn find_module_init(
    pkg: &PackageModel,
    profile: Option<&InitProfile>,
) -> (BTreeMap<String, Provenance>, Vec<Diagnostic>) {
    let mut out = BTreeMap::new();
    let mut diagnostics = Vec::new();
    if let Some(profile) = profile {
        for q in &profile.entries {
            if pkg.lookup(q).is_some() {
                out.insert(q.clone(), Provenance::ProfileList);
            } else {
                diagnostics.push(Diagnostic::warn(
                    "<init-profile>",
                    format!("profile entry {q} is unresolved; skipped"),
                ));
            }
        }
    }
    for id in module_level_targets(pkg).into_keys() {
        out.entry(pkg.function(id).qualname.clone())
            .or_insert(Provenance::ToplevelCall);
    }
    (out, diagnostics)
}

pub fn find_magic(pkg: &PackageModel) -> BTreeSet<String> {
    pkg.functions
        .iter()
        .filter(|f| f.is_magic)
        .map(|f| f.qualname.clone())
        .collect()
}

pub fn build_entry_set(
    pkg: &PackageModel,
    config_path: Option<&Path>,
    overrides: &[String],
    profile: Option<&InitProfile>,
) -> Result<EntrySet, EntryError> {
    let mut set = EntrySet::default();
    match find_handlers(pkg, config_path, overrides) {
        Ok(handlers) => {
            for (q, p) in handlers {
                set.note(&q, p);
            }
        }
        Err(EntryError::NoEntriesFound) => {
            set.diagnostics.push(Diagnostic::warn(
                display_root(pkg),
                "no serverless handler recognized",
            ));
        }
        Err(e) => return Err(e),
    }
    let (init, diagnostics) = find_module_init(pkg, profile);
    for (q, p) in init {
        set.note(&q, p);
    }
    set.diagnostics.extend(diagnostics);
    for q in find_magic(pkg) {
        set.note(&q, Provenance::MagicPattern);
    }
    if set.is_empty() {
        return Err(EntryError::NoEntriesFound);
    }
    Ok(set)
}

fn display_root(pkg: &PackageModel) -> String {
    let s = crate::package_model::display(&pkg.root_path);
    if s.is_empty() {
        ".".into()
    } else {
        s
    }
}
