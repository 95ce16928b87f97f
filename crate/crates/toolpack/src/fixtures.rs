//! Access to the canned corpus under `fixtures/<server>/...`.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use crate::ToolError;

/// Lowercase, ASCII alphanumerics only, single spaces.
pub fn normalize(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                ' '
            }
        })
        .collect::<String>()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

/// Stable fixture key for a normalized request string.
pub fn key_of(s: &str) -> String {
    hex::encode(&Sha256::digest(normalize(s).as_bytes())[..8])
}

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "the", "of", "in", "on", "for", "to", "their", "with", "is", "are", "about",
    "latest", "recent", "what", "how", "2025", "2024",
];

pub fn content_words(s: &str) -> Vec<String> {
    let mut w: Vec<String> = normalize(s)
        .split(' ')
        .filter(|t| !t.is_empty() && !STOPWORDS.contains(t))
        .map(str::to_string)
        .collect();
    w.sort();
    w.dedup();
    w
}

/// Index of the candidate sharing the most content words with `query`,
/// if it shares at least two.
pub fn best_overlap<'a>(
    query: &str,
    candidates: impl IntoIterator<Item = &'a str>,
) -> Option<usize> {
    let q = content_words(query);
    candidates
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let cw = content_words(c);
            (i, q.iter().filter(|w| cw.contains(w)).count())
        })
        .filter(|&(_, n)| n >= 2)
        .max_by_key(|&(i, n)| (n, std::cmp::Reverse(i)))
        .map(|(i, _)| i)
}

#[derive(Debug, Clone)]
pub struct FixtureSet {
    root: PathBuf,
}

impl FixtureSet {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureSet { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, server: &str, rel: &str) -> PathBuf {
        self.root.join(server).join(rel)
    }

    pub fn read(&self, server: &str, rel: &str) -> Result<Vec<u8>, ToolError> {
        let p = self.path(server, rel);
        std::fs::read(&p).map_err(|_| ToolError::NoFixture(format!("{server}/{rel}")))
    }

    pub fn read_text(&self, server: &str, rel: &str) -> Result<String, ToolError> {
        String::from_utf8(self.read(server, rel)?)
            .map_err(|_| ToolError::Io(format!("{server}/{rel} is not UTF-8")))
    }

    pub fn read_json<T: DeserializeOwned>(&self, server: &str, rel: &str) -> Result<T, ToolError> {
        serde_json::from_slice(&self.read(server, rel)?)
            .map_err(|e| ToolError::Io(format!("{server}/{rel}: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_ignores_case_and_punctuation() {
        assert_eq!(
            normalize("  Edge devices,  in 2025! "),
            "edge devices in 2025"
        );
        assert_eq!(key_of("Edge Devices"), key_of("edge   devices"));
        assert_ne!(key_of("edge"), key_of("edges"));
    }

    #[test]
    fn overlap_needs_two_shared_words() {
        let c = ["quantum computing hardware", "edge devices use cases"];
        assert_eq!(best_overlap("edge devices today", c), Some(1));
        assert_eq!(best_overlap("quantum sensors", c), None);
    }
}
