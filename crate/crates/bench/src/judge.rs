//! Rubric-weighted LLM judge.

use std::path::Path;
use std::sync::Arc;

use agentx_core::{parse_structured_output, FieldType, LogicalClock, StructuredSchema, Tracer};
use agentx_llm::{ChatBackend, ChatRequest, Llm, LlmError, Message, PriceTable};
use agentx_patterns::prompt::fill;
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

pub const SUMMARY_RUBRIC: &str = include_str!("../rubrics/summary.json");
pub const STOCK_RUBRIC: &str = include_str!("../rubrics/stock.json");

const JUDGE_AGENT: &str = "judge";

#[derive(Debug, thiserror::Error)]
pub enum JudgeError {
    #[error("rubric: {0}")]
    Rubric(String),
    #[error("nothing to grade: the output is empty")]
    EmptyOutput,
    #[error("judge backend: {0}")]
    Llm(#[from] LlmError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Attribute {
    pub name: String,
    pub weight: u32,
    #[serde(default)]
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rubric {
    pub name: String,
    pub attributes: Vec<Attribute>,
    /// Placeholders: `{task}`, `{attribute}`, `{description}`, `{output}`.
    pub judge_prompt_template: String,
}

impl Rubric {
    pub fn from_json(text: &str) -> Result<Self, JudgeError> {
        let r: Rubric =
            serde_json::from_str(text).map_err(|e| JudgeError::Rubric(e.to_string()))?;
        r.validate()?;
        Ok(r)
    }

    pub fn load(path: &Path) -> Result<Self, JudgeError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| JudgeError::Rubric(format!("{}: {e}", path.display())))?;
        Rubric::from_json(&text)
    }

    /// Accuracy 50, Relevance 30, Depth 10, Breadth 10.
    pub fn summary() -> Self {
        Rubric::from_json(SUMMARY_RUBRIC).expect("bundled rubric is valid")
    }

    /// Data Accuracy 50, Query Adherence 30, Plot Quality 10, Data Quantity 10.
    pub fn stock() -> Self {
        Rubric::from_json(STOCK_RUBRIC).expect("bundled rubric is valid")
    }

    pub fn validate(&self) -> Result<(), JudgeError> {
        if self.attributes.is_empty() {
            return Err(JudgeError::Rubric(format!(
                "rubric {} has no attributes",
                self.name
            )));
        }
        let sum: u32 = self.attributes.iter().map(|a| a.weight).sum();
        if sum != 100 {
            return Err(JudgeError::Rubric(format!(
                "rubric {} weights sum to {sum}, not 100",
                self.name
            )));
        }
        Ok(())
    }

    pub fn weights(&self) -> Vec<u32> {
        self.attributes.iter().map(|a| a.weight).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub name: String,
    pub weight: u32,
    /// `None` when the judge never produced a valid score.
    pub score: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgeScore {
    pub rubric: String,
    pub attributes: Vec<AttributeScore>,
    pub total: Decimal,
    /// Some attribute is missing and counts as zero in `total`.
    pub partial: bool,
}

/// `Σ score × weight / 100`, exact.
pub fn weighted_total(scored: &[(u32, u32)]) -> Decimal {
    let sum: u64 = scored
        .iter()
        .map(|&(s, w)| u64::from(s) * u64::from(w))
        .sum();
    (Decimal::from(sum) / Decimal::from(100)).normalize()
}

pub fn score_schema() -> StructuredSchema {
    StructuredSchema::new("judge_score").field("score", FieldType::Integer, "score from 0 to 100")
}

#[derive(Debug, Clone)]
pub struct Judge {
    pub model: String,
    pub prices: PriceTable,
    pub schema_retries: u32,
}

impl Default for Judge {
    fn default() -> Self {
        Judge {
            model: "gpt-4o-mini".into(),
            prices: PriceTable::default(),
            schema_retries: 2,
        }
    }
}

impl Judge {
    /// One inference per attribute. A reply that never parses as an integer
    /// in 0..=100 leaves that attribute missing.
    pub fn score(
        &self,
        task: &str,
        output: &str,
        rubric: &Rubric,
        backend: &dyn ChatBackend,
    ) -> Result<JudgeScore, JudgeError> {
        if output.trim().is_empty() {
            return Err(JudgeError::EmptyOutput);
        }
        let tracer = Tracer::new("judge", Arc::new(LogicalClock::new(1)));
        let mut llm = Llm::new(backend, tracer, self.prices.clone(), &self.model);
        let schema = score_schema();
        let mut attributes = Vec::with_capacity(rubric.attributes.len());
        for a in &rubric.attributes {
            let prompt = fill(
                &rubric.judge_prompt_template,
                &[
                    ("task", task),
                    ("attribute", &a.name),
                    ("description", &a.description),
                    ("output", output),
                ],
            );
            let mut messages = vec![Message::user(prompt)];
            let mut score = None;
            for _ in 0..=self.schema_retries {
                let req =
                    ChatRequest::new(&self.model, messages.clone()).with_schema(schema.clone());
                let resp = llm.complete(JUDGE_AGENT, Some(&a.name), req)?;
                let parsed = parse_structured_output(&schema, &resp.content)
                    .ok()
                    .and_then(|o| o.int("score"))
                    .filter(|s| (0..=100).contains(s));
                if let Some(s) = parsed {
                    score = Some(s as u32);
                    break;
                }
                messages.push(Message::assistant(resp.content, vec![]));
                messages.push(Message::user(
                    "Reply only with {\"score\": N} where N is an integer from 0 to 100.",
                ));
            }
            attributes.push(AttributeScore {
                name: a.name.clone(),
                weight: a.weight,
                score,
            });
        }
        let scored: Vec<(u32, u32)> = attributes
            .iter()
            .map(|a| (a.score.unwrap_or(0), a.weight))
            .collect();
        Ok(JudgeScore {
            rubric: rubric.name.clone(),
            partial: attributes.iter().any(|a| a.score.is_none()),
            total: weighted_total(&scored),
            attributes,
        })
    }
}
