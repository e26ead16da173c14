//! Serverless framework configuration: `functions.<name>.handler` entries.

use std::path::{Path, PathBuf};

use serde_yaml::Value;

use super::EntryError;

pub const CONFIG_FILE_NAMES: [&str; 2] = ["serverless.yml", "serverless.yaml"];

/// A `serverless.yml` / `serverless.yaml` at the package root, if present.
pub fn detect_config(root: &Path) -> Option<PathBuf> {
    CONFIG_FILE_NAMES
        .iter()
        .map(|n| root.join(n))
        .find(|p| p.is_file())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HandlerSpec {
    pub function_name: String,
    pub handler: String,
    pub qualname: String,
}

/// `src/app.lambda_handler` → `src.app.lambda_handler`.
pub fn handler_to_qualname(handler: &str) -> Option<String> {
    let h = handler.trim().trim_start_matches("./");
    let (module, func) = h.rsplit_once(':').or_else(|| h.rsplit_once('.'))?;
    let module = module.strip_suffix(".py").unwrap_or(module);
    if module.is_empty() || func.is_empty() {
        return None;
    }
    let module = module.trim_matches('/').replace(['/', '\\'], ".");
    Some(format!("{module}.{func}"))
}

pub fn parse_config(text: &str, path: &Path) -> Result<Vec<HandlerSpec>, EntryError> {
    let err = |line: Option<usize>, message: String| EntryError::ConfigParse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let doc: Value = serde_yaml::from_str(text)
        .map_err(|e| err(e.location().map(|l| l.line()), e.to_string()))?;
    let Some(functions) = doc.get("functions") else {
        return Ok(Vec::new());
    };
    let mut entries: Vec<(String, &Value)> = Vec::new();
    match functions {
        Value::Mapping(m) => {
            for (k, v) in m {
                entries.push((scalar(k).unwrap_or_default(), v));
            }
        }
        // The framework also accepts a list of single-key mappings.
        Value::Sequence(items) => {
            for item in items {
                if let Value::Mapping(m) = item {
                    for (k, v) in m {
                        entries.push((scalar(k).unwrap_or_default(), v));
                    }
                }
            }
        }
        Value::Null => {}
        _ => return Err(err(None, "`functions` must be a mapping".into())),
    }
    let mut specs = Vec::new();
    for (name, body) in entries {
        let Some(handler) = body.get("handler") else {
            continue;
        };
        let handler = scalar(handler)
            .ok_or_else(|| err(None, format!("handler of `{name}` is not a string")))?;
        let qualname = handler_to_qualname(&handler).ok_or_else(|| {
            err(
                None,
                format!("handler `{handler}` is not of the form module.function"),
            )
        })?;
        specs.push(HandlerSpec {
            function_name: name,
            handler,
            qualname,
        });
    }
    Ok(specs)
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}
