//! Removes optional files from a working copy of a deployment package.
//!
//! Four built-in rules, each a path predicate evaluated against the
//! package's [`LibraryLayout`]. Patterns below use glob notation, where `S` is
//! any site root (the package root or a directory holding `*.dist-info`) and
//! `L` is a detected third-party library directory:
//!
//! | rule | matches |
//! |------|---------|
//! | `venv-tooling` | `S/{pip,setuptools,pkg_resources,wheel,_distutils_hack}/**` |
//! | `compiled-artifact` | `**/*.{pyc,pyo,pyi}`, `**/__pycache__/**` |
//! | `dist-metadata` | `**/*.dist-info/**`, `**/*.egg-info/**` |
//! | `library-tests` | `L/**/{tests,testing}/**` |

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use globset::{Glob, GlobSet, GlobSetBuilder};
use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::package_model::{display, PackageMetrics, PackageModel};

pub const VENV_TOOLING_DIRS: [&str; 5] = [
    "pip",
    "setuptools",
    "pkg_resources",
    "wheel",
    "_distutils_hack",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleId {
    VenvTooling,
    CompiledArtifact,
    DistMetadata,
    LibraryTests,
}

impl RuleId {
    pub const ALL: [RuleId; 4] = [
        RuleId::VenvTooling,
        RuleId::CompiledArtifact,
        RuleId::DistMetadata,
        RuleId::LibraryTests,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::VenvTooling => "venv-tooling",
            RuleId::CompiledArtifact => "compiled-artifact",
            RuleId::DistMetadata => "dist-metadata",
            RuleId::LibraryTests => "library-tests",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RuleId::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown prune rule `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneRule {
    pub rule_id: RuleId,
    pub enabled: bool,
}

impl PruneRule {
    pub fn builtin() -> Vec<PruneRule> {
        RuleId::ALL
            .into_iter()
            .map(|rule_id| PruneRule {
                rule_id,
                enabled: true,
            })
            .collect()
    }

    /// Glob form of the matcher, for reports and `--help`.
    pub fn pattern(&self) -> &'static str {
        match self.rule_id {
            RuleId::VenvTooling => "S/{pip,setuptools,pkg_resources,wheel,_distutils_hack}/**",
            RuleId::CompiledArtifact => "**/*.{pyc,pyo,pyi}, **/__pycache__/**",
            RuleId::DistMetadata => "**/*.dist-info/**, **/*.egg-info/**",
            RuleId::LibraryTests => "L/**/{tests,testing}/**",
        }
    }

    pub fn matches(&self, pkg: &PackageModel, rel: &Path) -> bool {
        let layout = &pkg.layout;
        match self.rule_id {
            RuleId::VenvTooling => layout.site_roots.iter().any(|site| {
                rel.strip_prefix(site).is_ok_and(|rest| {
                    let mut comps = rest.components();
                    let first = comps
                        .next()
                        .map(|c| c.as_os_str().to_string_lossy().into_owned());
                    comps.next().is_some()
                        && first.is_some_and(|f| VENV_TOOLING_DIRS.contains(&f.as_str()))
                })
            }),
            RuleId::CompiledArtifact => {
                rel.components().any(|c| c.as_os_str() == "__pycache__")
                    || rel
                        .extension()
                        .is_some_and(|e| e == "pyc" || e == "pyo" || e == "pyi")
            }
            RuleId::DistMetadata => layout.is_metadata(rel),
            RuleId::LibraryTests => layout.library_dir_of(rel).is_some_and(|lib| {
                rel.strip_prefix(lib)
                    .ok()
                    .and_then(Path::parent)
                    .is_some_and(|dirs| {
                        dirs.components()
                            .any(|c| c.as_os_str() == "tests" || c.as_os_str() == "testing")
                    })
            }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PruneOptions {
    pub rules: Vec<PruneRule>,
    /// User glob patterns (relative to the root) that must never be removed.
    pub keep: Vec<String>,
    /// Files that define entry functions; skipped with a diagnostic.
    pub protected: BTreeSet<PathBuf>,
    pub dry_run: bool,
}

impl Default for PruneOptions {
    fn default() -> Self {
        PruneOptions {
            rules: PruneRule::builtin(),
            keep: Vec::new(),
            protected: BTreeSet::new(),
            dry_run: false,
        }
    }
}

impl PruneOptions {
    pub fn disable(&mut self, rule: RuleId) {
        for r in &mut self.rules {
            if r.rule_id == rule {
                r.enabled = false;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemovedFile {
    pub relative_path: PathBuf,
    pub size_bytes: u64,
    pub rule_id: RuleId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruneReport {
    pub removed: Vec<RemovedFile>,
    pub bytes_removed: u64,
    pub before: PackageMetrics,
    pub after: PackageMetrics,
    pub dry_run: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl PruneReport {
    pub fn count_by_rule(&self, rule: RuleId) -> usize {
        self.removed.iter().filter(|r| r.rule_id == rule).count()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PruneError {
    #[error("cannot create working directory {path}: {source}")]
    WorkdirCreateFailed {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is matched by rule {rule} and by keep pattern `{pattern}`")]
    RuleConflict {
        path: PathBuf,
        rule: RuleId,
        pattern: String,
    },
    #[error("invalid keep pattern `{pattern}`: {message}")]
    InvalidPattern { pattern: String, message: String },
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn keep_set(patterns: &[String]) -> Result<GlobSet, PruneError> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob = Glob::new(p).map_err(|e| PruneError::InvalidPattern {
            pattern: p.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| PruneError::InvalidPattern {
        pattern: patterns.join(","),
        message: e.to_string(),
    })
}

/// Applies the enabled rules to `pkg`, deleting matched files under
/// `pkg.root_path` unless `dry_run`. The root must be a working copy.
pub fn prune(pkg: &PackageModel, options: &PruneOptions) -> Result<PruneReport, PruneError> {
    let keep = keep_set(&options.keep)?;
    let enabled: Vec<&PruneRule> = options.rules.iter().filter(|r| r.enabled).collect();
    let mut removed = Vec::new();
    let mut diagnostics = Vec::new();
    for file in &pkg.files {
        let rel = &file.relative_path;
        let Some(rule) = enabled.iter().find(|r| r.matches(pkg, rel)) else {
            continue;
        };
        if let Some(i) = keep.matches(rel).first() {
            return Err(PruneError::RuleConflict {
                path: rel.clone(),
                rule: rule.rule_id,
                pattern: options.keep[*i].clone(),
            });
        }
        if options.protected.contains(rel) {
            diagnostics.push(Diagnostic::warn(
                display(rel),
                format!(
                    "matched by {} but defines an entry function; kept",
                    rule.rule_id
                ),
            ));
            continue;
        }
        removed.push(RemovedFile {
            relative_path: rel.clone(),
            size_bytes: file.size_bytes,
            rule_id: rule.rule_id,
        });
    }

    if !options.dry_run {
        let mut dirs = BTreeSet::new();
        for r in &removed {
            let abs = pkg.root_path.join(&r.relative_path);
            fs::remove_file(&abs).map_err(|e| PruneError::Io {
                path: abs,
                source: e,
            })?;
            dirs.extend(
                r.relative_path
                    .ancestors()
                    .skip(1)
                    .filter(|a| !a.as_os_str().is_empty())
                    .map(Path::to_path_buf),
            );
        }
        // Deepest first, so emptied parents go too.
        let mut dirs: Vec<PathBuf> = dirs.into_iter().collect();
        dirs.sort_by_key(|d| std::cmp::Reverse(d.components().count()));
        for d in dirs {
            let abs = pkg.root_path.join(&d);
            if fs::read_dir(&abs).is_ok_and(|mut it| it.next().is_none()) {
                fs::remove_dir(&abs).map_err(|e| PruneError::Io {
                    path: abs,
                    source: e,
                })?;
            }
        }
    }

    let bytes_removed = removed.iter().map(|r| r.size_bytes).sum();
    let gone: BTreeSet<&Path> = removed.iter().map(|r| r.relative_path.as_path()).collect();
    let mut after = PackageMetrics {
        size_bytes: pkg.metrics.size_bytes - bytes_removed,
        ..PackageMetrics::default()
    };
    for m in &pkg.modules {
        if gone.contains(pkg.files[m.file].relative_path.as_path()) {
            continue;
        }
        after.function_count += m
            .functions
            .iter()
            .filter(|f| !pkg.function(**f).is_stub)
            .count() as u64;
        after.lines_of_code += m.loc;
    }
    Ok(PruneReport {
        removed,
        bytes_removed,
        before: pkg.metrics,
        after,
        dry_run: options.dry_run,
        diagnostics,
    })
}

/// Copies `src` into a fresh `dst`, preserving relative layout. Symbolic
/// links are recreated as links where the platform allows.
pub fn copy_tree(src: &Path, dst: &Path) -> Result<(), PruneError> {
    fs::create_dir_all(dst).map_err(|e| PruneError::WorkdirCreateFailed {
        path: dst.to_path_buf(),
        source: e,
    })?;
    for entry in walkdir::WalkDir::new(src)
        .follow_links(false)
        .sort_by_file_name()
    {
        let entry = entry.map_err(|e| PruneError::Io {
            path: e.path().unwrap_or(src).to_path_buf(),
            source: e
                .into_io_error()
                .unwrap_or_else(|| std::io::Error::other("walk error")),
        })?;
        let rel = entry.path().strip_prefix(src).unwrap_or(entry.path());
        if rel.as_os_str().is_empty() {
            continue;
        }
        let target = dst.join(rel);
        let io = |e: std::io::Error| PruneError::Io {
            path: target.clone(),
            source: e,
        };
        let ft = entry.file_type();
        if ft.is_dir() {
            fs::create_dir_all(&target).map_err(io)?;
        } else if ft.is_symlink() {
            let link = fs::read_link(entry.path()).map_err(io)?;
            #[cfg(unix)]
            std::os::unix::fs::symlink(&link, &target).map_err(io)?;
            #[cfg(not(unix))]
            let _ = link;
        } else {
            fs::copy(entry.path(), &target).map_err(io)?;
        }
    }
    Ok(())
}
