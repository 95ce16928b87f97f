//! `filesystem` server, confined to the session workspace.

use agentx_core::{Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;

use crate::place::confine;
use crate::{handler, str_arg, Tool, ToolError, ToolpackConfig};

pub(crate) fn tools(_cfg: &ToolpackConfig) -> Vec<Tool> {
    let read = handler(|ctx, args| {
        let requested = str_arg(args, "path")?;
        let (path, rel) = confine(&ctx.workspace, requested)?;
        if !path.is_file() {
            return Err(ToolError::NotFound(rel));
        }
        let bytes = std::fs::read(&path)?;
        Ok(ToolResult::ok(String::from_utf8_lossy(&bytes).into_owned()))
    });
    let write = handler(|ctx, args| {
        let requested = str_arg(args, "path")?;
        let content = str_arg(args, "content")?;
        let (path, rel) = confine(&ctx.workspace, requested)?;
        if rel.is_empty() || path.is_dir() {
            return Err(ToolError::WriteDenied(format!(
                "{requested} is a directory"
            )));
        }
        if let Some(p) = path.parent() {
            std::fs::create_dir_all(p)?;
        }
        std::fs::write(&path, content).map_err(|e| ToolError::WriteDenied(e.to_string()))?;
        Ok(ToolResult::ok(format!(
            "Successfully wrote {} bytes to {rel}",
            content.len()
        ))
        .with_uris(vec![format!("file:{rel}")]))
    });
    let list = handler(|ctx, args| {
        let requested = args.get("path").and_then(|v| v.as_str()).unwrap_or(".");
        let (path, rel) = confine(&ctx.workspace, requested)?;
        if !path.is_dir() {
            return Err(ToolError::NotFound(if rel.is_empty() {
                ".".into()
            } else {
                rel
            }));
        }
        let mut entries: Vec<String> = std::fs::read_dir(&path)?
            .flatten()
            .filter(|e| !e.file_name().to_string_lossy().starts_with('.'))
            .map(|e| {
                let kind = if e.path().is_dir() { "[DIR]" } else { "[FILE]" };
                format!("{kind} {}", e.file_name().to_string_lossy())
            })
            .collect();
        entries.sort();
        Ok(ToolResult::ok(if entries.is_empty() {
            "(empty directory)".to_string()
        } else {
            entries.join("\n")
        }))
    });
    vec![
        Tool {
            descriptor: ToolDescriptor::new(
                "filesystem",
                "read_file",
                "Read the complete contents of a file in the working directory.",
                Origin::Official,
            )
            .param(ParamSpec::required("path", ParamType::String, "File path relative to the working directory.")),
            handler: read,
            exclusive: true,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "filesystem",
                "write_file",
                "Create a new file or overwrite an existing one with the given text. Parent directories are created.",
                Origin::Official,
            )
            .param(ParamSpec::required("path", ParamType::String, "File path relative to the working directory."))
            .param(ParamSpec::required("content", ParamType::String, "Text to write.")),
            handler: write,
            exclusive: true,
        },
        Tool {
            descriptor: ToolDescriptor::new(
                "filesystem",
                "list_directory",
                "List the files and directories at a path in the working directory.",
                Origin::Official,
            )
            .param(ParamSpec::optional("path", ParamType::String, "Directory path (default: the working directory).")),
            handler: list,
            exclusive: true,
        },
    ]
}
