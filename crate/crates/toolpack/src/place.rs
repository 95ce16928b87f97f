//! Where a tool reads or writes: a workspace file or a blob.

use std::path::{Component, Path, PathBuf};

use agentx_faas::{BlobStore, BlobUri};

use crate::ToolError;

/// Resolves `requested` inside `root` lexically. Absolute paths are accepted
/// only when they already point inside `root`.
pub fn confine(root: &Path, requested: &str) -> Result<(PathBuf, String), ToolError> {
    let escape = || ToolError::PathEscape(requested.to_string());
    let req = Path::new(requested);
    let rel = if req.is_absolute() {
        req.strip_prefix(root).map_err(|_| escape())?
    } else {
        req
    };
    let mut parts: Vec<String> = Vec::new();
    for c in rel.components() {
        match c {
            Component::Normal(s) => parts.push(s.to_string_lossy().into_owned()),
            Component::CurDir => {}
            Component::ParentDir => {
                parts.pop().ok_or_else(escape)?;
            }
            Component::RootDir | Component::Prefix(_) => return Err(escape()),
        }
    }
    let mut path = root.to_path_buf();
    for p in &parts {
        path.push(p);
    }
    if let (Ok(real), Ok(real_root)) = (path.canonicalize(), root.canonicalize()) {
        if !real.starts_with(&real_root) {
            return Err(escape());
        }
    }
    Ok((path, parts.join("/")))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Location {
    Blob(BlobUri),
    File {
        path: PathBuf,
        rel: String,
        dir: bool,
    },
}

impl Location {
    pub fn parse(workspace: &Path, s: &str) -> Result<Self, ToolError> {
        if s.starts_with("s3://") {
            return s
                .parse::<BlobUri>()
                .map(Location::Blob)
                .map_err(|e| ToolError::InvalidArgument(e.to_string()));
        }
        let s = s.strip_prefix("file:").unwrap_or(s);
        let (path, rel) = confine(workspace, s)?;
        Ok(Location::File {
            path,
            rel,
            dir: s.ends_with('/'),
        })
    }

    /// Whether this names a directory-like destination.
    pub fn is_dir_like(&self) -> bool {
        match self {
            Location::Blob(u) => u.key.is_empty() || u.key.ends_with('/'),
            Location::File { path, rel, dir } => *dir || rel.is_empty() || path.is_dir(),
        }
    }

    pub fn join(&self, name: &str) -> Result<Location, ToolError> {
        match self {
            Location::Blob(u) => u
                .join(name)
                .map(Location::Blob)
                .map_err(|e| ToolError::InvalidArgument(e.to_string())),
            Location::File { path, rel, .. } => Ok(Location::File {
                dir: false,
                path: path.join(name),
                rel: if rel.is_empty() {
                    name.to_string()
                } else {
                    format!("{rel}/{name}")
                },
            }),
        }
    }

    /// `s3://...` or `file:<workspace-relative path>`.
    pub fn uri(&self) -> String {
        match self {
            Location::Blob(u) => u.to_string(),
            Location::File { rel, .. } => format!("file:{rel}"),
        }
    }

    pub fn read(&self, blobs: &BlobStore) -> Result<Vec<u8>, ToolError> {
        match self {
            Location::Blob(u) => Ok(blobs.get(u)?),
            Location::File { path, rel, .. } => {
                if !path.is_file() {
                    return Err(ToolError::NotFound(rel.clone()));
                }
                Ok(std::fs::read(path)?)
            }
        }
    }

    pub fn write(&self, blobs: &BlobStore, bytes: &[u8]) -> Result<String, ToolError> {
        match self {
            Location::Blob(u) => blobs.put(u, bytes)?,
            Location::File { path, rel, dir } => {
                if *dir || rel.is_empty() || path.is_dir() {
                    return Err(ToolError::WriteDenied(format!("{rel} is a directory")));
                }
                if let Some(parent) = path.parent() {
                    std::fs::create_dir_all(parent)?;
                }
                std::fs::write(path, bytes).map_err(|e| ToolError::WriteDenied(e.to_string()))?;
            }
        }
        Ok(self.uri())
    }
}
