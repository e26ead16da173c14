//! Thin layer over `rustpython-parser`: parsing with byte offsets relative to
//! the original file text, a line index, and token-level helpers.

use std::ops::Range;

use rustpython_parser::ast::{self, Ranged};
use rustpython_parser::lexer::lex_starts_at;
use rustpython_parser::text_size::TextSize;
use rustpython_parser::{parse_starts_at, Mode, Tok};

pub use rustpython_parser::ast::{Expr, Stmt};

const BOM: &str = "\u{feff}";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{path}:{line}: {message}")]
pub struct SyntaxError {
    pub path: String,
    pub line: u32,
    pub message: String,
}

/// Byte offset at which Python code starts (skips a UTF-8 byte-order mark).
pub fn code_start(text: &str) -> usize {
    if text.starts_with(BOM) {
        BOM.len()
    } else {
        0
    }
}

/// Parses a module. All ranges in the returned tree are byte offsets into `text`.
pub fn parse_module(text: &str, path: &str) -> Result<Vec<Stmt>, SyntaxError> {
    let start = code_start(text);
    match parse_starts_at(
        &text[start..],
        Mode::Module,
        path,
        TextSize::from(start as u32),
    ) {
        Ok(ast::Mod::Module(m)) => Ok(m.body),
        Ok(_) => unreachable!("module mode yields a module"),
        Err(err) => {
            let offset = (u32::from(err.offset) as usize).min(text.len());
            Err(SyntaxError {
                path: path.to_string(),
                line: LineIndex::new(text).line_of(offset),
                message: err.error.to_string(),
            })
        }
    }
}

/// Tokens with byte ranges into `text`. Comments and non-logical newlines are
/// not produced by the lexer configuration in use.
pub fn tokens(text: &str) -> Vec<(Tok, Range<usize>)> {
    let start = code_start(text);
    lex_starts_at(&text[start..], Mode::Module, TextSize::from(start as u32))
        .map_while(Result::ok)
        .map(|(tok, range)| (tok, usize::from(range.start())..usize::from(range.end())))
        .collect()
}

/// Byte ranges of string tokens that span more than one line.
pub fn multiline_string_ranges(text: &str) -> Vec<Range<usize>> {
    tokens(text)
        .into_iter()
        .filter(|(tok, r)| matches!(tok, Tok::String { .. }) && text[r.clone()].contains('\n'))
        .map(|(_, r)| r)
        .collect()
}

pub fn range_of<T: Ranged>(node: &T) -> Range<usize> {
    let r = node.range();
    usize::from(r.start())..usize::from(r.end())
}

/// Maps byte offsets to 1-based line numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    pub fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        LineIndex { starts }
    }

    pub fn line_of(&self, offset: usize) -> u32 {
        (self.starts.partition_point(|&s| s <= offset)) as u32
    }

    /// Byte offset of the first character of a 1-based line.
    pub fn line_start(&self, line: u32) -> usize {
        self.starts[(line as usize).saturating_sub(1).min(self.starts.len() - 1)]
    }

    pub fn line_count(&self) -> usize {
        self.starts.len()
    }
}
