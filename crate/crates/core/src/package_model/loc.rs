use std::collections::BTreeSet;
use std::ops::Range;

use rustpython_parser::ast::{self, Constant};
use rustpython_parser::Tok;

use crate::python::{self, range_of, LineIndex, Stmt};

/// Counts physical lines carrying executable code.
///
/// Comments, blank lines and bare string-expression statements (document
/// comments and the triple-quoted "multi-line comment" idiom) are excluded.
/// A line counts when any non-excluded token touches it; a token spanning
/// several lines marks all of them.
pub fn count_loc(text: &str, tree: &[Stmt]) -> u64 {
    let mut excluded = Vec::new();
    collect_string_statements(tree, &mut excluded);
    excluded.sort_by_key(|r| r.start);
    let lines = LineIndex::new(text);
    let mut counted = BTreeSet::new();
    for (tok, range) in python::tokens(text) {
        if matches!(
            tok,
            Tok::Newline | Tok::Indent | Tok::Dedent | Tok::EndOfFile
        ) {
            continue;
        }
        let i = excluded.partition_point(|r| r.start <= range.start);
        if i > 0 && excluded[i - 1].contains(&range.start) {
            continue;
        }
        let first = lines.line_of(range.start);
        let last = lines.line_of(range.end.saturating_sub(1).max(range.start));
        counted.extend(first..=last);
    }
    counted.len() as u64
}

fn is_string_statement(stmt: &Stmt) -> bool {
    matches!(
        stmt,
        Stmt::Expr(ast::StmtExpr { value, .. })
            if matches!(value.as_ref(), ast::Expr::Constant(c) if matches!(c.value, Constant::Str(_)))
    )
}

fn collect_string_statements(body: &[Stmt], out: &mut Vec<Range<usize>>) {
    for stmt in body {
        if is_string_statement(stmt) {
            out.push(range_of(stmt));
        }
        for block in child_blocks(stmt) {
            collect_string_statements(block, out);
        }
    }
}

/// Nested statement blocks of a compound statement.
pub(crate) fn child_blocks(stmt: &Stmt) -> Vec<&[Stmt]> {
    match stmt {
        Stmt::FunctionDef(s) => vec![&s.body],
        Stmt::AsyncFunctionDef(s) => vec![&s.body],
        Stmt::ClassDef(s) => vec![&s.body],
        Stmt::For(s) => vec![&s.body, &s.orelse],
        Stmt::AsyncFor(s) => vec![&s.body, &s.orelse],
        Stmt::While(s) => vec![&s.body, &s.orelse],
        Stmt::If(s) => vec![&s.body, &s.orelse],
        Stmt::With(s) => vec![&s.body],
        Stmt::AsyncWith(s) => vec![&s.body],
        Stmt::Match(s) => s.cases.iter().map(|c| c.body.as_slice()).collect(),
        Stmt::Try(s) => {
            let mut v: Vec<&[Stmt]> = vec![&s.body, &s.orelse, &s.finalbody];
            v.extend(
                s.handlers
                    .iter()
                    .map(|ast::ExceptHandler::ExceptHandler(h)| h.body.as_slice()),
            );
            v
        }
        Stmt::TryStar(s) => {
            let mut v: Vec<&[Stmt]> = vec![&s.body, &s.orelse, &s.finalbody];
            v.extend(
                s.handlers
                    .iter()
                    .map(|ast::ExceptHandler::ExceptHandler(h)| h.body.as_slice()),
            );
            v
        }
        _ => Vec::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loc(src: &str) -> u64 {
        let tree = python::parse_module(src, "t.py").unwrap();
        count_loc(src, &tree)
    }

    #[test]
    fn comments_and_docstrings_only() {
        assert_eq!(
            loc("# a comment\n\"\"\"module doc\n\nmore\n\"\"\"\n# another\n"),
            0
        );
    }

    #[test]
    fn counts_code_lines() {
        let src = "def f(a):\n    \"\"\"doc\"\"\"\n    # note\n    x = (a +\n         1)\n\n    return x  # trailing\n";
        assert_eq!(loc(src), 4);
    }

    #[test]
    fn multiline_string_value_counts() {
        assert_eq!(loc("x = '''a\nb\nc'''\n"), 3);
    }

    #[test]
    fn bare_string_in_body_is_comment() {
        assert_eq!(loc("x = 1\n'''\nblock comment\n'''\ny = 2\n"), 2);
    }

    #[test]
    fn empty_source() {
        assert_eq!(loc(""), 0);
    }
}
