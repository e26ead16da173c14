//! Stub text, signature rendering and dedenting of stored definitions.

use std::ops::Range;

use crate::package_model::{FunctionRecord, ParamKind};
use crate::RUNTIME_MODULE;

/// `name(a, b, /, c, *, d)`: parameter names with the `/` and `*` markers
/// needed to call the function back.
pub fn signature_text(f: &FunctionRecord) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut star_written = false;
    for (i, p) in f.params.iter().enumerate() {
        match p.kind {
            ParamKind::PositionalOnly => {
                parts.push(p.name.clone());
                let next_posonly = f
                    .params
                    .get(i + 1)
                    .is_some_and(|n| n.kind == ParamKind::PositionalOnly);
                if !next_posonly {
                    parts.push("/".into());
                }
            }
            ParamKind::Positional => parts.push(p.name.clone()),
            ParamKind::KeywordOnly => {
                if !star_written {
                    parts.push("*".into());
                    star_written = true;
                }
                parts.push(p.name.clone());
            }
            ParamKind::VarArgs => {
                star_written = true;
                parts.push(format!("*{}", p.name));
            }
            ParamKind::KwArgs => parts.push(format!("**{}", p.name)),
        }
    }
    format!("{}({})", f.name, parts.join(", "))
}

pub fn py_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// The two stub statements, the second joined to the first by `sep`.
pub fn stub_body(key: &str, signature: &str, env: &[String], is_async: bool, sep: &str) -> String {
    let env_map = env
        .iter()
        .map(|n| format!("{}: {n}", py_str(n)))
        .collect::<Vec<_>>()
        .join(", ");
    let call = format!(
        "{RUNTIME_MODULE}.rewrite_template({}, {}, {{{env_map}}}, 1)",
        py_str(key),
        py_str(signature)
    );
    let ret = if is_async {
        format!("return await {call}")
    } else {
        format!("return {call}")
    };
    format!("import {RUNTIME_MODULE}{sep}{ret}")
}

/// The text of `span` moved to column zero. Lines that start inside a
/// multi-line string literal are kept verbatim.
pub fn dedent(
    text: &str,
    span: (usize, usize),
    column: usize,
    multiline: &[Range<usize>],
) -> String {
    let body = &text[span.0..span.1];
    let mut out = String::with_capacity(body.len() + 1);
    let mut offset = span.0;
    for (i, line) in body.split_inclusive('\n').enumerate() {
        let in_string = multiline.iter().any(|r| r.start < offset && offset < r.end);
        if i == 0 || in_string {
            out.push_str(line);
        } else {
            let strip = line
                .bytes()
                .take(column)
                .take_while(|b| *b == b' ' || *b == b'\t' || *b == b'\x0c')
                .count();
            out.push_str(&line[strip..]);
        }
        offset += line.len();
    }
    if !out.ends_with('\n') {
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::package_model::PackageModel;
    use crate::python::multiline_string_ranges;

    fn sig(src: &str) -> String {
        let pkg = PackageModel::from_sources(&[("m.py", src)]);
        signature_text(&pkg.functions[0])
    }

    #[test]
    fn signatures() {
        assert_eq!(sig("def load_reduce(self): pass\n"), "load_reduce(self)");
        assert_eq!(sig("def f(): pass\n"), "f()");
        assert_eq!(
            sig("def f(a, b, /, c=1, *, d, e=2): pass\n"),
            "f(a, b, /, c, *, d, e)"
        );
        assert_eq!(
            sig("def f(a, *args, k, **kw): pass\n"),
            "f(a, *args, k, **kw)"
        );
    }

    #[test]
    fn stub_shape() {
        let s = stub_body("m.f", "f(a)", &["a".into(), "X".into()], false, "\n    ");
        assert_eq!(
            s,
            "import faaslight_runtime\n    return faaslight_runtime.rewrite_template(\"m.f\", \"f(a)\", {\"a\": a, \"X\": X}, 1)"
        );
        assert!(stub_body("k", "g()", &[], true, "; ").contains("return await faaslight_runtime"));
    }

    #[test]
    fn dedent_keeps_string_contents() {
        let text =
            "class C:\n    def m(self):\n        s = \"\"\"\n    keep\n\"\"\"\n        return s\n";
        let start = text.find("def").unwrap();
        let ranges = multiline_string_ranges(text);
        let out = dedent(text, (start, text.len() - 1), 4, &ranges);
        assert_eq!(
            out,
            "def m(self):\n    s = \"\"\"\n    keep\n\"\"\"\n    return s\n"
        );
    }
}
