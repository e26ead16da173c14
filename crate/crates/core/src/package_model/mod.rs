//! Structured model of a deployment directory: files, parsed modules, and
//! every function definition, plus the Size / FC / LoC metrics.

mod extract;
mod layout;
mod loc;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::python::{self, LineIndex, Stmt};

pub use layout::LibraryLayout;
pub use loc::count_loc;

/// Non-source files above this size are cataloged by size only.
pub const LARGE_FILE_THRESHOLD: u64 = 50 * 1024 * 1024;

#[derive(Debug, thiserror::Error)]
pub enum ScanError {
    #[error("package root not found: {0}")]
    RootNotFound(PathBuf),
    #[error("package root is not a directory: {0}")]
    NotADirectory(PathBuf),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileCategory {
    AppSource,
    LibrarySource,
    CompiledArtifact,
    Metadata,
    TestAsset,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub relative_path: PathBuf,
    pub size_bytes: u64,
    pub category: FileCategory,
}

impl FileEntry {
    pub fn is_python_source(&self) -> bool {
        is_python_source(&self.relative_path)
    }
}

pub fn is_python_source(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "py")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportKind {
    ModuleImport,
    FromImport,
    Aliased,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ImportBinding {
    pub local_name: String,
    pub target: String,
    pub kind: ImportKind,
}

/// The shape of a referenced expression, as far as static resolution cares.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Name(String),
    /// `a.b.attr`; `chain` is `None` when the base is not a plain name chain.
    Attr {
        chain: Option<Vec<String>>,
        attr: String,
    },
    Function(FunctionId),
    Dynamic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefKind {
    Call,
    Decorator,
    Arg,
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Reference {
    pub target: Target,
    pub kind: RefKind,
    /// Scope the referencing expression is evaluated in.
    pub scope: ScopeOwner,
    pub line: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Binding {
    Function(FunctionId),
    Class(ClassId),
    Import(String),
    Alias(Target),
    Value,
}

/// Flow-insensitive bindings of one scope: every binding a name receives
/// anywhere in the scope is kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Scope {
    pub bindings: BTreeMap<String, Vec<Binding>>,
    pub globals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
}

impl Scope {
    pub fn bind(&mut self, name: &str, binding: Binding) {
        let slot = self.bindings.entry(name.to_string()).or_default();
        if !slot.contains(&binding) {
            slot.push(binding);
        }
    }

    /// Names that are local to this scope (excludes `global`/`nonlocal` declarations).
    pub fn is_local(&self, name: &str) -> bool {
        self.bindings.contains_key(name)
            && !self.globals.contains(name)
            && !self.nonlocals.contains(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScopeOwner {
    Module(ModuleId),
    Class(ClassId),
    Function(FunctionId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    PositionalOnly,
    Positional,
    VarArgs,
    KeywordOnly,
    KwArgs,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub kind: ParamKind,
    pub has_default: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionRecord {
    pub qualname: String,
    pub name: String,
    pub module: ModuleId,
    pub params: Vec<Param>,
    pub decorators: Vec<String>,
    /// (def line, last body line), 1-based.
    pub body_span: (u32, u32),
    /// First line of the definition including decorators.
    pub first_line: u32,
    pub free_names: BTreeSet<String>,
    pub parent: Option<FunctionId>,
    pub enclosing: ScopeOwner,
    pub is_magic: bool,
    pub is_method: bool,
    pub is_lambda: bool,
    pub is_async: bool,
    pub is_generator: bool,
    /// Body is a loader stub emitted by the rewriter.
    pub is_stub: bool,
    /// Byte range from the `def` (or `async`) keyword to the end of the body.
    pub span: (usize, usize),
    /// Byte range from the first to the end of the last body statement.
    pub body: Option<(usize, usize)>,
    /// Byte column of the `def` keyword.
    pub column: usize,
    pub scope: Scope,
    pub refs: Vec<Reference>,
    pub(crate) own_loads: BTreeSet<String>,
    /// Names loaded by parameter default expressions (evaluated in the enclosing scope).
    pub default_names: BTreeSet<String>,
    /// Uses zero-argument `super()` or the `__class__` cell.
    pub uses_class_cell: bool,
    /// References a private `__name` that the compiler would mangle.
    pub uses_mangled_name: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassRecord {
    pub qualname: String,
    pub name: String,
    pub module: ModuleId,
    pub parent: Option<FunctionId>,
    pub enclosing: ScopeOwner,
    pub scope: Scope,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceModule {
    pub dotted_name: String,
    /// Index into [`PackageModel::files`].
    pub file: usize,
    pub is_package: bool,
    pub text: Arc<str>,
    pub syntax_tree: Arc<Vec<Stmt>>,
    pub lines: LineIndex,
    pub top_level_calls: Vec<String>,
    pub imports: Vec<ImportBinding>,
    pub scope: Scope,
    pub top_refs: Vec<Reference>,
    pub star_imports: Vec<(String, bool)>,
    /// Names bound on every path through the module body.
    pub definitely_bound: BTreeSet<String>,
    pub functions: Vec<FunctionId>,
    pub classes: Vec<ClassId>,
    pub loc: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageMetrics {
    pub size_bytes: u64,
    pub function_count: u64,
    pub lines_of_code: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// Extra library directories, relative to the root.
    pub library_dirs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackageModel {
    pub root_path: PathBuf,
    pub files: Vec<FileEntry>,
    pub modules: Vec<SourceModule>,
    pub functions: Vec<FunctionRecord>,
    pub classes: Vec<ClassRecord>,
    pub layout: LibraryLayout,
    pub metrics: PackageMetrics,
    pub diagnostics: Vec<Diagnostic>,
    by_qualname: HashMap<String, FunctionId>,
    by_module: HashMap<String, ModuleId>,
}

impl PackageModel {
    pub fn function(&self, id: FunctionId) -> &FunctionRecord {
        &self.functions[id.0]
    }

    pub fn class(&self, id: ClassId) -> &ClassRecord {
        &self.classes[id.0]
    }

    pub fn module(&self, id: ModuleId) -> &SourceModule {
        &self.modules[id.0]
    }

    pub fn lookup(&self, qualname: &str) -> Option<FunctionId> {
        self.by_qualname.get(qualname).copied()
    }

    pub fn module_by_name(&self, dotted: &str) -> Option<ModuleId> {
        self.by_module.get(dotted).copied()
    }

    pub fn function_ids(&self) -> impl Iterator<Item = FunctionId> {
        (0..self.functions.len()).map(FunctionId)
    }

    pub fn file_of(&self, module: ModuleId) -> &FileEntry {
        &self.files[self.modules[module.0].file]
    }

    /// Relative path of the file defining a function.
    pub fn path_of(&self, id: FunctionId) -> &Path {
        &self.file_of(self.function(id).module).relative_path
    }

    pub fn scope(&self, owner: ScopeOwner) -> &Scope {
        match owner {
            ScopeOwner::Module(m) => &self.modules[m.0].scope,
            ScopeOwner::Class(c) => &self.classes[c.0].scope,
            ScopeOwner::Function(f) => &self.functions[f.0].scope,
        }
    }

    /// Builds a model from in-memory sources; each entry is `(relative path, text)`.
    pub fn from_sources<P: AsRef<Path>, S: AsRef<str>>(sources: &[(P, S)]) -> PackageModel {
        let raw: Vec<RawFile> = sources
            .iter()
            .map(|(p, s)| RawFile {
                relative_path: p.as_ref().to_path_buf(),
                size_bytes: s.as_ref().len() as u64,
                text: Some(Ok(s.as_ref().to_string())),
            })
            .collect();
        let reader = |rel: &Path| {
            sources
                .iter()
                .find(|(p, _)| p.as_ref() == rel)
                .map(|(_, s)| s.as_ref().to_string())
        };
        assemble(
            PathBuf::new(),
            raw,
            &ScanOptions::default(),
            &reader,
            Vec::new(),
        )
    }
}

/// Scans a deployment directory with default options.
pub fn scan_package(root: impl AsRef<Path>) -> Result<PackageModel, ScanError> {
    scan_package_with(root, &ScanOptions::default())
}

pub fn scan_package_with(
    root: impl AsRef<Path>,
    options: &ScanOptions,
) -> Result<PackageModel, ScanError> {
    let root = root.as_ref();
    let meta = fs::metadata(root).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => ScanError::RootNotFound(root.to_path_buf()),
        _ => ScanError::Io {
            path: root.to_path_buf(),
            source: e,
        },
    })?;
    if !meta.is_dir() {
        return Err(ScanError::NotADirectory(root.to_path_buf()));
    }
    let mut diagnostics = Vec::new();
    let mut entries = Vec::new();
    for entry in walkdir::WalkDir::new(root)
        .follow_links(false)
        .sort_by_file_name()
    {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            ScanError::Io {
                path,
                source: e
                    .into_io_error()
                    .unwrap_or_else(|| std::io::Error::other("walk error")),
            }
        })?;
        let rel = entry
            .path()
            .strip_prefix(root)
            .unwrap_or(entry.path())
            .to_path_buf();
        if entry.path_is_symlink() {
            diagnostics.push(Diagnostic::info(
                display(&rel),
                "symbolic link not followed",
            ));
            continue;
        }
        if entry.file_type().is_file() {
            entries.push((rel, entry.path().to_path_buf()));
        }
    }
    let raw: Vec<RawFile> = entries
        .par_iter()
        .map(|(rel, abs)| -> Result<RawFile, ScanError> {
            let size = fs::metadata(abs)
                .map_err(|e| ScanError::Io {
                    path: abs.clone(),
                    source: e,
                })?
                .len();
            let text = if is_python_source(rel) {
                Some(
                    fs::read(abs)
                        .map(|b| String::from_utf8(b).map_err(|_| ()))
                        .map_err(|e| ScanError::Io {
                            path: abs.clone(),
                            source: e,
                        })?,
                )
            } else {
                None
            };
            Ok(RawFile {
                relative_path: rel.clone(),
                size_bytes: size,
                text: text.map(|t| t.map_err(|_| "source is not valid UTF-8".to_string())),
            })
        })
        .collect::<Result<_, _>>()?;
    // Only small metadata files are ever read besides sources.
    let reader = |rel: &Path| {
        let abs = root.join(rel);
        let small = fs::metadata(&abs).is_ok_and(|m| m.len() <= LARGE_FILE_THRESHOLD);
        small.then(|| fs::read_to_string(&abs).ok()).flatten()
    };
    Ok(assemble(
        root.to_path_buf(),
        raw,
        options,
        &reader,
        diagnostics,
    ))
}

/// Size, FC and LoC of a scanned package.
pub fn compute_metrics(pkg: &PackageModel) -> PackageMetrics {
    PackageMetrics {
        size_bytes: pkg.files.iter().map(|f| f.size_bytes).sum(),
        function_count: pkg.functions.iter().filter(|f| !f.is_stub).count() as u64,
        lines_of_code: pkg.modules.iter().map(|m| m.loc).sum(),
    }
}

struct RawFile {
    relative_path: PathBuf,
    size_bytes: u64,
    text: Option<Result<String, String>>,
}

pub(crate) fn display(path: &Path) -> String {
    path.to_string_lossy().replace('\\', "/")
}

/// Dotted module path for a relative source path; `__init__` maps to its directory.
pub fn dotted_name(relative_path: &Path) -> String {
    let mut parts: Vec<String> = relative_path
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect();
    if let Some(last) = parts.last_mut() {
        if let Some(stem) = last.strip_suffix(".py") {
            *last = stem.to_string();
        }
    }
    if parts.len() > 1 && parts.last().is_some_and(|p| p == "__init__") {
        parts.pop();
    }
    parts.join(".")
}

fn assemble(
    root: PathBuf,
    mut raw: Vec<RawFile>,
    options: &ScanOptions,
    read: &dyn Fn(&Path) -> Option<String>,
    mut diagnostics: Vec<Diagnostic>,
) -> PackageModel {
    raw.sort_by(|a, b| a.relative_path.cmp(&b.relative_path));
    let paths: Vec<&Path> = raw.iter().map(|f| f.relative_path.as_path()).collect();
    let layout = LibraryLayout::detect(&paths, &options.library_dirs, read);
    let files: Vec<FileEntry> = raw
        .iter()
        .map(|f| FileEntry {
            relative_path: f.relative_path.clone(),
            size_bytes: f.size_bytes,
            category: layout.categorize(&f.relative_path),
        })
        .collect();

    // Parse in parallel; extraction below is sequential so ids are stable.
    struct Parsed {
        file: usize,
        text: String,
        tree: Vec<Stmt>,
    }
    let parsed: Vec<Result<Parsed, Diagnostic>> = raw
        .par_iter()
        .enumerate()
        .filter_map(|(i, f)| {
            let text = f.text.as_ref()?;
            let path = display(&f.relative_path);
            Some(match text {
                Err(msg) => Err(Diagnostic::warn(path, msg.clone())),
                Ok(text) => match python::parse_module(text, &path) {
                    Ok(tree) => Ok(Parsed {
                        file: i,
                        text: text.clone(),
                        tree,
                    }),
                    Err(err) => Err(Diagnostic::warn(
                        path,
                        format!("unparseable source (line {}): {}", err.line, err.message),
                    )),
                },
            })
        })
        .collect();

    let mut ok = Vec::new();
    for p in parsed {
        match p {
            Ok(p) => ok.push(p),
            Err(d) => diagnostics.push(d),
        }
    }

    // Assign dotted names; packages (`__init__`) win over same-named plain modules.
    let mut order: Vec<usize> = (0..ok.len()).collect();
    let is_init = |p: &Parsed| {
        raw[p.file]
            .relative_path
            .file_stem()
            .is_some_and(|s| s == "__init__")
    };
    order.sort_by_key(|&i| (!is_init(&ok[i]), raw[ok[i].file].relative_path.clone()));
    let mut names = vec![String::new(); ok.len()];
    let mut taken: HashMap<String, usize> = HashMap::new();
    for &i in &order {
        let base = dotted_name(&raw[ok[i].file].relative_path);
        let n = taken.entry(base.clone()).or_insert(0);
        *n += 1;
        names[i] = if *n == 1 {
            base
        } else {
            let renamed = format!("{base}#{n}");
            diagnostics.push(Diagnostic::warn(
                display(&raw[ok[i].file].relative_path),
                format!("duplicate module name {base}; recorded as {renamed}"),
            ));
            renamed
        };
    }

    let mut model = PackageModel {
        root_path: root,
        files,
        modules: Vec::with_capacity(ok.len()),
        functions: Vec::new(),
        classes: Vec::new(),
        layout,
        metrics: PackageMetrics::default(),
        diagnostics: Vec::new(),
        by_qualname: HashMap::new(),
        by_module: HashMap::new(),
    };
    let mut qualnames: HashMap<String, usize> = HashMap::new();
    for (p, name) in ok.into_iter().zip(names) {
        let module_id = ModuleId(model.modules.len());
        let is_package = is_init(&p);
        let lines = LineIndex::new(&p.text);
        let extracted = extract::extract_module(
            extract::ModuleContext {
                id: module_id,
                name: &name,
                is_package,
                text: &p.text,
                lines: &lines,
            },
            &p.tree,
            &mut model.functions,
            &mut model.classes,
            &mut qualnames,
            &mut diagnostics,
            &display(&raw[p.file].relative_path),
        );
        let loc = count_loc(&p.text, &p.tree);
        model.by_module.insert(name.clone(), module_id);
        model.modules.push(SourceModule {
            dotted_name: name,
            file: p.file,
            is_package,
            text: Arc::from(p.text),
            syntax_tree: Arc::new(p.tree),
            lines,
            top_level_calls: extracted.top_level_calls,
            imports: extracted.imports,
            scope: extracted.scope,
            top_refs: extracted.top_refs,
            star_imports: extracted.star_imports,
            definitely_bound: extracted.definitely_bound,
            functions: extracted.functions,
            classes: extracted.classes,
            loc,
        });
    }
    expand_star_imports(&mut model);
    extract::finish_free_names(&mut model.functions);
    model.by_qualname = model
        .functions
        .iter()
        .enumerate()
        .map(|(i, f)| (f.qualname.clone(), FunctionId(i)))
        .collect();
    diagnostics.sort();
    model.diagnostics = diagnostics;
    model.metrics = compute_metrics(&model);
    model
}

/// Adds bindings for `from m import *` where `m` is part of the package.
fn expand_star_imports(model: &mut PackageModel) {
    for _round in 0..8 {
        let mut changed = false;
        for i in 0..model.modules.len() {
            let stars = model.modules[i].star_imports.clone();
            for (target, definite) in stars {
                let Some(src) = model.by_module.get(&target).copied() else {
                    continue;
                };
                if src.0 == i {
                    continue;
                }
                let exported: Vec<String> = model.modules[src.0]
                    .scope
                    .bindings
                    .keys()
                    .filter(|n| !n.starts_with('_'))
                    .cloned()
                    .collect();
                let src_definite = model.modules[src.0].definitely_bound.clone();
                let module = &mut model.modules[i];
                for name in exported {
                    let binding = Binding::Import(format!("{target}.{name}"));
                    let slot = module.scope.bindings.entry(name.clone()).or_default();
                    if !slot.contains(&binding) {
                        slot.push(binding);
                        changed = true;
                    }
                    if definite && src_definite.contains(&name) {
                        changed |= module.definitely_bound.insert(name);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
}

#[cfg(test)]
mod tests;
