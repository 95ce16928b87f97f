//! Prompt templates: plain text files with `{name}` placeholders.

use std::path::Path;

use agentx_core::ToolDescriptor;

use crate::PatternError;

/// Substitutes `{name}` placeholders in one pass, so substituted text is
/// never re-scanned. Unknown placeholders and lone braces are left as is.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let hit = after.find('}').and_then(|close| {
            let name = &after[..close];
            vars.iter()
                .find(|(k, _)| *k == name)
                .map(|(_, v)| (close, *v))
        });
        match hit {
            Some((close, value)) => {
                out.push_str(value);
                rest = &after[close + 1..];
            }
            None => {
                out.push('{');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// One line per tool with its parameters, for prompts that describe the
/// environment in text.
pub fn render_tools(tools: &[ToolDescriptor]) -> String {
    if tools.is_empty() {
        return "(none)".into();
    }
    let mut s = String::new();
    for t in tools {
        s.push_str(&format!(
            "- {} (server {}): {}",
            t.name, t.server, t.description
        ));
        if !t.params.is_empty() {
            let params: Vec<String> = t
                .params
                .iter()
                .map(|p| {
                    format!(
                        "{}: {}{}",
                        p.name,
                        p.kind.name(),
                        if p.required { "" } else { ", optional" }
                    )
                })
                .collect();
            s.push_str(&format!(" Parameters: {}.", params.join("; ")));
        }
        s.push('\n');
    }
    s
}

/// Reads `file` from `dir` when the directory is configured and holds it,
/// otherwise returns the built-in text.
pub(crate) fn load(dir: Option<&Path>, file: &str, builtin: &str) -> Result<String, PatternError> {
    let Some(dir) = dir else {
        return Ok(builtin.to_string());
    };
    let path = dir.join(file);
    if !path.exists() {
        return Ok(builtin.to_string());
    }
    std::fs::read_to_string(&path).map_err(|e| PatternError::Template {
        path,
        reason: e.to_string(),
    })
}
