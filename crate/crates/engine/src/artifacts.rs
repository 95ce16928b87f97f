//! Post-run artifact check: did the run leave the output its prompt asked
//! for at the instructed location?

use std::path::Path;

use agentx_faas::{BlobStore, BlobUri};
use agentx_mcp::ToolExchange;
use agentx_toolpack::{confine, Profile};

use crate::apps::{ArtifactRule, FAAS_PREFIX};

/// Tools whose produced files count as the run's own output.
pub const WRITING_TOOLS: [&str; 3] = ["write_file", "put_object", "execute_code"];

fn is_text(uri: &str) -> bool {
    let lower = uri.to_ascii_lowercase();
    lower.ends_with(".txt") || lower.ends_with(".md")
}

fn non_empty_file(workspace: &Path, rel: &str) -> bool {
    confine(workspace, rel)
        .ok()
        .and_then(|(p, _)| std::fs::metadata(p).ok())
        .is_some_and(|m| m.is_file() && m.len() > 0)
}

fn non_empty_blob(blobs: &BlobStore, uri: &str) -> bool {
    uri.starts_with(FAAS_PREFIX)
        && uri
            .parse::<BlobUri>()
            .ok()
            .and_then(|u| blobs.get(&u).ok())
            .is_some_and(|b| !b.is_empty())
}

/// Returns the URIs that satisfy `rule`, or a description of what is
/// missing. Local runs look in the shared workspace, FaaS runs under
/// [`FAAS_PREFIX`].
pub fn check(
    rule: &ArtifactRule,
    profile: Profile,
    workspace: &Path,
    blobs: &BlobStore,
    tools: &[ToolExchange],
) -> Result<Vec<String>, String> {
    let present = |uri: &str| match (profile, uri.strip_prefix("file:")) {
        (Profile::Local, Some(rel)) => non_empty_file(workspace, rel),
        (Profile::Faas, None) => non_empty_blob(blobs, uri),
        _ => false,
    };
    match rule {
        ArtifactRule::None => Ok(vec![]),
        ArtifactRule::Named { name } => {
            let uri = match profile {
                Profile::Local => format!("file:{name}"),
                Profile::Faas => format!("{FAAS_PREFIX}{name}"),
            };
            if present(&uri) {
                Ok(vec![uri])
            } else {
                Err(format!("{uri} was not produced"))
            }
        }
        ArtifactRule::TextFile => {
            let mut found: Vec<String> = Vec::new();
            for ex in tools
                .iter()
                .filter(|t| WRITING_TOOLS.contains(&t.tool.as_str()) && !t.result.is_error)
            {
                for uri in &ex.result.produced_uris {
                    if is_text(uri) && present(uri) && !found.contains(uri) {
                        found.push(uri.clone());
                    }
                }
            }
            if found.is_empty() {
                let place = match profile {
                    Profile::Local => "the workspace".to_string(),
                    Profile::Faas => FAAS_PREFIX.to_string(),
                };
                Err(format!("no non-empty text file was written to {place}"))
            } else {
                Ok(found)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use agentx_mcp::ToolResult;
    use serde_json::Map;

    fn wrote(tool: &str, uri: &str) -> ToolExchange {
        ToolExchange {
            seq: 0,
            stage: None,
            server: "s".into(),
            tool: tool.into(),
            args: Map::new(),
            result: ToolResult::ok("ok").with_uris(vec![uri.into()]),
        }
    }

    #[test]
    fn text_file_must_come_from_a_writing_tool() {
        let dir = tempfile::tempdir().unwrap();
        let blobs = BlobStore::new(dir.path().join("b"));
        std::fs::write(dir.path().join("paper.txt"), "downloaded").unwrap();
        let download = wrote("download_article", "file:paper.txt");
        let r = check(
            &ArtifactRule::TextFile,
            Profile::Local,
            dir.path(),
            &blobs,
            &[download],
        );
        assert!(r.is_err());
        std::fs::write(dir.path().join("out.txt"), "summary").unwrap();
        let r = check(
            &ArtifactRule::TextFile,
            Profile::Local,
            dir.path(),
            &blobs,
            &[wrote("write_file", "file:out.txt")],
        );
        assert_eq!(r.unwrap(), vec!["file:out.txt"]);
        std::fs::write(dir.path().join("empty.txt"), "").unwrap();
        assert!(check(
            &ArtifactRule::TextFile,
            Profile::Local,
            dir.path(),
            &blobs,
            &[wrote("write_file", "file:empty.txt")]
        )
        .is_err());
    }

    #[test]
    fn faas_artifacts_live_under_the_prefix() {
        let dir = tempfile::tempdir().unwrap();
        let blobs = BlobStore::new(dir.path().join("b"));
        let uri = "s3://dummy-bucket/agent/AppleGoogleMicrosoft.png";
        let rule = ArtifactRule::Named {
            name: "AppleGoogleMicrosoft.png".into(),
        };
        assert!(check(&rule, Profile::Faas, dir.path(), &blobs, &[]).is_err());
        blobs.put(&uri.parse().unwrap(), b"png").unwrap();
        assert_eq!(
            check(&rule, Profile::Faas, dir.path(), &blobs, &[]).unwrap(),
            vec![uri]
        );
        std::fs::write(dir.path().join("AppleGoogleMicrosoft.png"), "png").unwrap();
        assert!(check(&rule, Profile::Local, dir.path(), &blobs, &[]).is_ok());
        let other = "s3://other/out.txt";
        blobs.put(&other.parse().unwrap(), b"x").unwrap();
        assert!(check(
            &ArtifactRule::TextFile,
            Profile::Faas,
            dir.path(),
            &blobs,
            &[wrote("put_object", other)]
        )
        .is_err());
    }
}
