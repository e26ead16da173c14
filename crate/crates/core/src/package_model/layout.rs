use std::collections::BTreeSet;
use std::path::{Component, Path, PathBuf};

use serde::Serialize;

use super::{is_python_source, FileCategory};

pub(crate) const METADATA_SUFFIXES: [&str; 2] = [".dist-info", ".egg-info"];
pub(crate) const COMPILED_EXTENSIONS: [&str; 3] = ["pyc", "pyo", "pyi"];
pub(crate) const TEST_DIR_NAMES: [&str; 2] = ["tests", "testing"];

/// Where third-party libraries live inside a package.
///
/// A directory is a library when a distribution-metadata directory
/// (`*.dist-info`, `*.egg-info`) sits next to it and names it (through
/// `top_level.txt`, or by its distribution name), or when the user lists it
/// explicitly. Everything else is application source.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LibraryLayout {
    /// Directories holding installed distributions; the package root is always one.
    pub site_roots: BTreeSet<PathBuf>,
    pub metadata_dirs: BTreeSet<PathBuf>,
    pub library_dirs: BTreeSet<PathBuf>,
    pub library_files: BTreeSet<PathBuf>,
}

fn name_of(c: Component<'_>) -> String {
    c.as_os_str().to_string_lossy().into_owned()
}

fn is_metadata_name(name: &str) -> bool {
    METADATA_SUFFIXES
        .iter()
        .any(|s| name.ends_with(s) && name.len() > s.len())
}

impl LibraryLayout {
    pub fn detect(
        paths: &[&Path],
        extra_library_dirs: &[PathBuf],
        read: &dyn Fn(&Path) -> Option<String>,
    ) -> LibraryLayout {
        let mut layout = LibraryLayout::default();
        layout.site_roots.insert(PathBuf::new());
        for path in paths {
            let mut prefix = PathBuf::new();
            for c in path.components() {
                prefix.push(c);
                if is_metadata_name(&name_of(c)) {
                    layout.metadata_dirs.insert(prefix.clone());
                    break;
                }
            }
        }
        for meta in layout.metadata_dirs.clone() {
            let site = meta.parent().map(Path::to_path_buf).unwrap_or_default();
            layout.site_roots.insert(site.clone());
            let mut names: Vec<String> = read(&meta.join("top_level.txt"))
                .map(|t| {
                    t.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .map(str::to_string)
                        .collect()
                })
                .unwrap_or_default();
            if names.is_empty() {
                let file = meta
                    .file_name()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let stem = METADATA_SUFFIXES
                    .iter()
                    .find_map(|s| file.strip_suffix(s))
                    .unwrap_or(&file);
                let dist = stem.split('-').next().unwrap_or(stem);
                names.push(dist.replace(['-', '.'], "_"));
            }
            for name in names {
                for path in paths {
                    let Ok(rest) = path.strip_prefix(&site) else {
                        continue;
                    };
                    let mut comps = rest.components();
                    let Some(first) = comps.next().map(name_of) else {
                        continue;
                    };
                    let matches = |candidate: &str| {
                        candidate == name || candidate.eq_ignore_ascii_case(&name)
                    };
                    if comps.next().is_some() {
                        if matches(&first) {
                            layout.library_dirs.insert(site.join(&first));
                        }
                    } else if let Some(stem) = first.strip_suffix(".py") {
                        if matches(stem) {
                            layout.library_files.insert(site.join(&first));
                        }
                    }
                }
            }
        }
        layout.library_dirs.extend(
            extra_library_dirs
                .iter()
                .map(|d| PathBuf::from(super::display(d).trim_end_matches('/'))),
        );
        layout
    }

    /// The library directory containing `rel`, if any.
    pub fn library_dir_of(&self, rel: &Path) -> Option<&Path> {
        rel.ancestors()
            .skip(1)
            .find_map(|a| self.library_dirs.get(a))
            .map(PathBuf::as_path)
    }

    pub fn is_metadata(&self, rel: &Path) -> bool {
        rel.ancestors().any(|a| self.metadata_dirs.contains(a))
    }

    pub fn categorize(&self, rel: &Path) -> FileCategory {
        let compiled = rel.components().any(|c| name_of(c) == "__pycache__")
            || rel
                .extension()
                .is_some_and(|e| COMPILED_EXTENSIONS.iter().any(|x| e == *x));
        if compiled {
            return FileCategory::CompiledArtifact;
        }
        if self.is_metadata(rel) {
            return FileCategory::Metadata;
        }
        if let Some(lib) = self.library_dir_of(rel) {
            let inner = rel.strip_prefix(lib).unwrap_or(rel);
            let dirs: Vec<_> = inner
                .parent()
                .map(|p| p.components().map(name_of).collect())
                .unwrap_or_default();
            if dirs.iter().any(|d| TEST_DIR_NAMES.contains(&d.as_str())) {
                return FileCategory::TestAsset;
            }
            return if is_python_source(rel) {
                FileCategory::LibrarySource
            } else {
                FileCategory::Other
            };
        }
        if self.library_files.contains(rel) {
            return FileCategory::LibrarySource;
        }
        if is_python_source(rel) {
            FileCategory::AppSource
        } else {
            FileCategory::Other
        }
    }
}
