//! Directory-backed object store addressed by `s3://bucket/key` URIs.

use std::fmt;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BlobError {
    #[error("invalid blob uri {0:?}")]
    InvalidUri(String),
    #[error("no such key: {0}")]
    NoSuchKey(String),
    #[error("blob store i/o: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BlobUri {
    pub bucket: String,
    pub key: String,
}

impl BlobUri {
    pub fn new(bucket: &str, key: &str) -> Result<Self, BlobError> {
        format!("s3://{bucket}/{key}").parse()
    }

    /// `key` relative to `prefix`'s bucket.
    pub fn join(&self, name: &str) -> Result<Self, BlobError> {
        let key = if self.key.is_empty() || self.key.ends_with('/') {
            format!("{}{name}", self.key)
        } else {
            format!("{}/{name}", self.key)
        };
        BlobUri::new(&self.bucket, &key)
    }
}

impl FromStr for BlobUri {
    type Err = BlobError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || BlobError::InvalidUri(s.to_string());
        let rest = s.strip_prefix("s3://").ok_or_else(bad)?;
        let (bucket, key) = rest.split_once('/').unwrap_or((rest, ""));
        let bucket_ok = !bucket.is_empty()
            && bucket
                .chars()
                .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '.');
        let key_ok = key
            .split('/')
            .all(|seg| seg != ".." && seg != "." && !seg.contains('\\'));
        if !bucket_ok || !key_ok || key.starts_with('/') {
            return Err(bad());
        }
        Ok(BlobUri {
            bucket: bucket.to_string(),
            key: key.to_string(),
        })
    }
}

impl fmt::Display for BlobUri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s3://{}/{}", self.bucket, self.key)
    }
}

#[derive(Debug, Clone)]
pub struct BlobStore {
    root: PathBuf,
}

impl BlobStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        BlobStore { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// `s3://b/k` -> `<root>/b/k`.
    pub fn path_of(&self, uri: &BlobUri) -> PathBuf {
        let mut p = self.root.join(&uri.bucket);
        for c in Path::new(&uri.key).components() {
            if let Component::Normal(seg) = c {
                p.push(seg);
            }
        }
        p
    }

    pub fn put(&self, uri: &BlobUri, bytes: &[u8]) -> Result<(), BlobError> {
        if uri.key.is_empty() || uri.key.ends_with('/') {
            return Err(BlobError::InvalidUri(uri.to_string()));
        }
        let path = self.path_of(uri);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| BlobError::Io(e.to_string()))?;
        }
        std::fs::write(&path, bytes).map_err(|e| BlobError::Io(e.to_string()))
    }

    pub fn get(&self, uri: &BlobUri) -> Result<Vec<u8>, BlobError> {
        let path = self.path_of(uri);
        if !path.is_file() {
            return Err(BlobError::NoSuchKey(uri.to_string()));
        }
        std::fs::read(&path).map_err(|e| BlobError::Io(e.to_string()))
    }

    pub fn exists(&self, uri: &BlobUri) -> bool {
        self.path_of(uri).is_file()
    }

    /// Keys in `bucket` starting with `prefix`, sorted.
    pub fn list(&self, bucket: &str, prefix: &str) -> Result<Vec<String>, BlobError> {
        let base = self.root.join(bucket);
        let mut keys = Vec::new();
        if base.is_dir() {
            collect(&base, &base, &mut keys).map_err(|e| BlobError::Io(e.to_string()))?;
        }
        keys.retain(|k| k.starts_with(prefix));
        keys.sort();
        Ok(keys)
    }
}

fn collect(base: &Path, dir: &Path, out: &mut Vec<String>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect(base, &path, out)?;
        } else if let Ok(rel) = path.strip_prefix(base) {
            let key: Vec<String> = rel
                .components()
                .map(|c| c.as_os_str().to_string_lossy().into_owned())
                .collect();
            out.push(key.join("/"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uri_round_trip() {
        let u: BlobUri = "s3://dummy-bucket/agent/out.txt".parse().unwrap();
        assert_eq!(u.bucket, "dummy-bucket");
        assert_eq!(u.key, "agent/out.txt");
        assert_eq!(u.to_string(), "s3://dummy-bucket/agent/out.txt");
        assert!("http://x/y".parse::<BlobUri>().is_err());
        assert!("s3://b/../etc".parse::<BlobUri>().is_err());
        assert!("s3:///k".parse::<BlobUri>().is_err());
    }

    #[test]
    fn put_get_list() {
        let dir = tempfile::tempdir().unwrap();
        let store = BlobStore::new(dir.path());
        let u: BlobUri = "s3://dummy-bucket/agent/out.txt".parse().unwrap();
        store.put(&u, b"hello").unwrap();
        assert_eq!(store.get(&u).unwrap(), b"hello");
        assert!(store
            .list("dummy-bucket", "agent/")
            .unwrap()
            .contains(&"agent/out.txt".to_string()));
        let missing: BlobUri = "s3://dummy-bucket/nope".parse().unwrap();
        assert!(matches!(store.get(&missing), Err(BlobError::NoSuchKey(_))));
    }

    proptest! {
        #[test]
        fn display_parse_identity(bucket in "[a-z0-9-]{1,12}", key in "[A-Za-z0-9_]{1,8}(/[A-Za-z0-9_.-]{1,8}){0,3}") {
            prop_assume!(!key.split('/').any(|s| s == "." || s == ".."));
            let u = BlobUri::new(&bucket, &key).unwrap();
            prop_assert_eq!(u.to_string().parse::<BlobUri>().unwrap(), u);
        }
    }
}
