use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::EntryError;

/// Module-initialization functions observed by offline import profiling.
/// One qualname per line; blank lines and `#` comments are ignored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitProfile {
    pub entries: Vec<String>,
}

impl InitProfile {
    pub fn parse(text: &str) -> InitProfile {
        let entries = text
            .lines()
            .map(|line| {
                let line = line.trim();
                // `#` starts a comment at line start or after whitespace; the
                // ordinal suffix of a qualname (`f#2`) is not a comment.
                let cut = line
                    .char_indices()
                    .find(|&(i, c)| {
                        c == '#' && (i == 0 || line[..i].ends_with(char::is_whitespace))
                    })
                    .map_or(line.len(), |(i, _)| i);
                line[..cut].trim()
            })
            .filter(|l| !l.is_empty())
            .map(str::to_string)
            .collect();
        InitProfile { entries }
    }

    pub fn load(path: &Path) -> Result<InitProfile, EntryError> {
        let text = std::fs::read_to_string(path).map_err(|e| EntryError::Read {
            path: path.to_path_buf(),
            source: e,
        })?;
        Ok(InitProfile::parse(&text))
    }
}

impl fmt::Display for InitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}
