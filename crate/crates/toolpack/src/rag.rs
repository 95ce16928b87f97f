//! `rag` server: chunk, embed and query a document.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use agentx_core::{Origin, ParamSpec, ParamType, ToolDescriptor};
use agentx_mcp::ToolResult;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::place::Location;
use crate::{handler, str_arg, Profile, Tool, ToolError, ToolpackConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RagConfig {
    pub chunk_size: usize,
    pub overlap: usize,
    pub dimension: usize,
    pub threshold: f64,
    pub top_k: usize,
}

impl Default for RagConfig {
    fn default() -> Self {
        RagConfig {
            chunk_size: 1000,
            overlap: 200,
            dimension: 256,
            threshold: 0.3,
            top_k: 5,
        }
    }
}

impl RagConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.chunk_size == 0 || self.overlap >= self.chunk_size {
            return Err(format!(
                "overlap {} must be below chunk size {}",
                self.overlap, self.chunk_size
            ));
        }
        if self.dimension == 0 {
            return Err("embedding dimension must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocChunk {
    pub doc_uri: String,
    pub text: String,
    /// Character range `[start, end)` in the source.
    pub char_span: (usize, usize),
    pub embedding: Vec<f32>,
    pub score: Option<f64>,
}

/// Character windows of `size` advancing by `size - overlap`; the last
/// window ends at the text's end.
pub fn chunk_spans(len: usize, size: usize, overlap: usize) -> Vec<(usize, usize)> {
    assert!(overlap < size, "overlap must be below chunk size");
    let mut spans = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + size).min(len);
        spans.push((start, end));
        if end == len {
            break;
        }
        start += size - overlap;
    }
    spans
}

pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;
    fn embed(&self, text: &str) -> Vec<f32>;
}

/// Signed feature hashing of lowercase word tokens.
#[derive(Debug, Clone)]
pub struct HashEmbedder {
    dim: usize,
}

impl HashEmbedder {
    pub fn new(dim: usize) -> Self {
        HashEmbedder { dim }
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl Embedder for HashEmbedder {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn embed(&self, text: &str) -> Vec<f32> {
        let mut v = vec![0f32; self.dim];
        for tok in text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| !t.is_empty())
        {
            let h = fnv1a(tok.to_lowercase().as_bytes());
            let sign = if h >> 63 == 0 { 1.0 } else { -1.0 };
            v[(h % self.dim as u64) as usize] += sign;
        }
        v
    }
}

pub fn cosine(a: &[f32], b: &[f32]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| *x as f64 * *y as f64).sum();
    let na: f64 = a.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| (*x as f64).powi(2)).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

/// Document URI and content digest.
type DocKey = (String, String);

/// In-memory vector store keyed by document URI and content digest.
pub struct Retriever {
    cfg: RagConfig,
    embedder: Arc<dyn Embedder>,
    store: Mutex<HashMap<DocKey, Arc<Vec<DocChunk>>>>,
}

impl Retriever {
    pub fn new(cfg: RagConfig, embedder: Arc<dyn Embedder>) -> Self {
        Retriever {
            cfg,
            embedder,
            store: Mutex::default(),
        }
    }

    pub fn ingest(&self, doc_uri: &str, text: &str) -> Arc<Vec<DocChunk>> {
        let key = (
            doc_uri.to_string(),
            hex::encode(Sha256::digest(text.as_bytes())),
        );
        let mut store = self.store.lock().unwrap_or_else(|e| e.into_inner());
        store
            .entry(key)
            .or_insert_with(|| {
                let chars: Vec<char> = text.chars().collect();
                Arc::new(
                    chunk_spans(chars.len(), self.cfg.chunk_size, self.cfg.overlap)
                        .into_iter()
                        .map(|(s, e)| {
                            let t: String = chars[s..e].iter().collect();
                            DocChunk {
                                doc_uri: doc_uri.to_string(),
                                embedding: self.embedder.embed(&t),
                                text: t,
                                char_span: (s, e),
                                score: None,
                            }
                        })
                        .collect(),
                )
            })
            .clone()
    }

    /// Chunks scoring at or above the threshold, best first (ties by position).
    pub fn query(&self, chunks: &[DocChunk], query: &str) -> Vec<DocChunk> {
        let q = self.embedder.embed(query);
        let mut hits: Vec<DocChunk> = chunks
            .iter()
            .map(|c| DocChunk {
                score: Some(cosine(&q, &c.embedding)),
                ..c.clone()
            })
            .filter(|c| c.score.unwrap_or(0.0) >= self.cfg.threshold)
            .collect();
        hits.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.char_span.cmp(&b.char_span))
        });
        hits.truncate(self.cfg.top_k);
        hits
    }

    pub fn render(&self, doc_uri: &str, hits: &[DocChunk]) -> String {
        if hits.is_empty() {
            return format!(
                "No snippets from {doc_uri} scored above the similarity threshold {:.2}. \
                 Rephrase the query using terms that appear in the document.",
                self.cfg.threshold
            );
        }
        let mut out = format!("Retrieved {} snippets from {doc_uri}:\n", hits.len());
        for (i, h) in hits.iter().enumerate() {
            out.push_str(&format!(
                "\n[{}] score={:.4} chars={}..{}\n{}\n",
                i + 1,
                h.score.unwrap_or(0.0),
                h.char_span.0,
                h.char_span.1,
                h.text
            ));
        }
        out
    }
}

fn document_text(bytes: Vec<u8>, uri: &str) -> Result<String, ToolError> {
    if bytes.starts_with(b"%PDF") {
        return Err(ToolError::InvalidArgument(format!(
            "{uri} is a binary PDF; only text documents can be indexed"
        )));
    }
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

pub(crate) fn tools(cfg: &ToolpackConfig) -> Vec<Tool> {
    let retriever = Arc::new(Retriever::new(
        cfg.rag.clone(),
        Arc::new(HashEmbedder::new(cfg.rag.dimension)),
    ));
    let blobs = cfg.blobs.clone();
    let (param, descriptor) = match cfg.profile {
        Profile::Local => (
            "file_path",
            ToolDescriptor::new(
                "rag",
                "document_retriever",
                "Retrieves relevant text snippets from a document based on a query. \
                 Input: file_path (str): path to the downloaded document. query (str): the query to search in the document. \
                 Output: str: snippets of text from the document relevant to the query, with metrics.",
                Origin::Custom,
            )
            .param(ParamSpec::required("file_path", ParamType::String, "Path to the document file."))
            .param(ParamSpec::required("query", ParamType::String, "The query to search in the document.")),
        ),
        Profile::Faas => (
            "s3_uri",
            ToolDescriptor::new(
                "rag",
                "document_retriever",
                "Retrieves relevant text snippets from a PDF in S3 based on a query. \
                 Input: s3_uri (str): The S3 URI to the PDF file (e.g., s3://my-bucket/report.pdf). \
                 query (str): The query to search in the PDF file. \
                 Output: str: Snippets of text from the PDF relevant to the query, with metrics.",
                Origin::Custom,
            )
            .param(ParamSpec::required(
                "s3_uri",
                ParamType::String,
                "The S3 URI to the PDF file (e.g., s3://my-bucket/report.pdf).",
            ))
            .param(ParamSpec::required("query", ParamType::String, "The query to search in the PDF file.")),
        ),
    };
    vec![Tool {
        descriptor,
        handler: handler(move |ctx, args| {
            let doc = str_arg(args, param)?;
            let query = str_arg(args, "query")?;
            let loc = Location::parse(&ctx.workspace, doc)?;
            let bytes = loc.read(&blobs).map_err(|e| match e {
                ToolError::NotFound(_) => ToolError::NoSuchDocument(doc.to_string()),
                other => other,
            })?;
            let uri = loc.uri();
            let chunks = retriever.ingest(&uri, &document_text(bytes, &uri)?);
            let hits = retriever.query(&chunks, query);
            Ok(ToolResult::ok(retriever.render(&uri, &hits)))
        }),
        exclusive: false,
    }]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn retriever(threshold: f64) -> Retriever {
        Retriever::new(
            RagConfig {
                threshold,
                ..RagConfig::default()
            },
            Arc::new(HashEmbedder::new(256)),
        )
    }

    fn sample() -> String {
        (0..60)
            .map(|i| {
                format!(
                    "Sentence {i} talks about topic{} and method{}. ",
                    i % 7,
                    i % 5
                )
            })
            .collect()
    }

    #[test]
    fn self_similarity_ranks_first() {
        let r = retriever(0.3);
        let chunks = r.ingest("file:doc.txt", &sample());
        let target = &chunks[1];
        let hits = r.query(&chunks, &target.text);
        assert_eq!(hits[0].char_span, target.char_span);
        assert!((hits[0].score.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn impossible_threshold_gives_advisory() {
        let r = retriever(1.01);
        let chunks = r.ingest("file:doc.txt", &sample());
        let hits = r.query(&chunks, &chunks[0].text);
        assert!(hits.is_empty());
        assert!(r.render("file:doc.txt", &hits).starts_with("No snippets"));
    }

    #[test]
    fn embeddings_have_configured_dimension() {
        let r = retriever(0.3);
        assert!(r
            .ingest("u", &sample())
            .iter()
            .all(|c| c.embedding.len() == 256));
    }

    #[test]
    fn spans_for_2600_chars() {
        assert_eq!(
            chunk_spans(2600, 1000, 200),
            vec![(0, 1000), (800, 1800), (1600, 2600)]
        );
        assert_eq!(chunk_spans(0, 1000, 200), vec![]);
        assert_eq!(chunk_spans(1000, 1000, 200), vec![(0, 1000)]);
    }

    proptest! {
        #[test]
        fn chunks_reconstruct_source(text in "\\PC{0,3000}", size in 2usize..400, ov in 0usize..200) {
            let overlap = ov % size;
            let chars: Vec<char> = text.chars().collect();
            let spans = chunk_spans(chars.len(), size, overlap);
            let mut out = String::new();
            let mut covered = 0;
            for (s, e) in spans {
                prop_assert!(s <= covered && e > covered);
                out.extend(&chars[covered..e]);
                covered = e;
            }
            prop_assert_eq!(out, text);
        }

        #[test]
        fn cosine_is_bounded(a in proptest::collection::vec(-5f32..5.0, 8), b in proptest::collection::vec(-5f32..5.0, 8)) {
            let c = cosine(&a, &b);
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }
}
