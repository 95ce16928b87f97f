use serde::{Deserialize, Serialize};

/// Default upper bound on a stage summary, in characters.
pub const DEFAULT_SUMMARY_CAP: usize = 4096;

/// Appended to a summary that had to be cut to fit the cap.
pub const TRUNCATION_SENTINEL: &str = "\n[summary truncated]";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Pending,
    Active,
    Done,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("stage {index}: illegal transition {from:?} -> {to:?}")]
pub struct TransitionError {
    pub index: usize,
    pub from: StageStatus,
    pub to: StageStatus,
}

/// A high-level sub-task produced by stage generation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub index: usize,
    pub description: String,
    pub status: StageStatus,
}

impl Stage {
    pub fn new(index: usize, description: impl Into<String>) -> Self {
        Stage {
            index,
            description: description.into(),
            status: StageStatus::Pending,
        }
    }

    /// Builds the contiguous stage list for a run.
    pub fn from_descriptions<I, S>(descriptions: I) -> Vec<Stage>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        descriptions
            .into_iter()
            .enumerate()
            .map(|(i, d)| Stage::new(i, d))
            .collect()
    }

    /// Moves the stage along pending -> active -> {done | failed}.
    pub fn transition(&mut self, to: StageStatus) -> Result<(), TransitionError> {
        use StageStatus::*;
        let ok = matches!(
            (self.status, to),
            (Pending, Active) | (Active, Done) | (Active, Failed)
        );
        if !ok {
            return Err(TransitionError {
                index: self.index,
                from: self.status,
                to,
            });
        }
        self.status = to;
        Ok(())
    }
}

/// Consolidated results of a finished stage; the only context that crosses
/// stage boundaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSummary {
    pub stage_index: usize,
    pub results: String,
    pub success: bool,
}

impl StageSummary {
    /// Creates a summary, cutting `results` to at most `cap` characters.
    pub fn new(stage_index: usize, results: impl Into<String>, success: bool, cap: usize) -> Self {
        StageSummary {
            stage_index,
            results: cap_text(results.into(), cap),
            success,
        }
    }
}

fn cap_text(text: String, cap: usize) -> String {
    if text.chars().count() <= cap {
        return text;
    }
    let sentinel_len = TRUNCATION_SENTINEL.chars().count();
    if cap <= sentinel_len {
        return text.chars().take(cap).collect();
    }
    let mut out: String = text.chars().take(cap - sentinel_len).collect();
    out.push_str(TRUNCATION_SENTINEL);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legal_and_illegal_transitions() {
        let mut s = Stage::new(0, "search");
        assert!(s.transition(StageStatus::Done).is_err());
        s.transition(StageStatus::Active).unwrap();
        s.transition(StageStatus::Done).unwrap();
        assert!(s.transition(StageStatus::Active).is_err());
        let mut f = Stage::new(1, "plot");
        f.transition(StageStatus::Active).unwrap();
        f.transition(StageStatus::Failed).unwrap();
        assert!(f.transition(StageStatus::Done).is_err());
    }

    #[test]
    fn indices_are_contiguous() {
        let stages = Stage::from_descriptions(["a", "b", "c"]);
        let idx: Vec<usize> = stages.iter().map(|s| s.index).collect();
        assert_eq!(idx, vec![0, 1, 2]);
    }

    #[test]
    fn short_summary_untouched() {
        let s = StageSummary::new(0, "done", true, DEFAULT_SUMMARY_CAP);
        assert_eq!(s.results, "done");
    }

    #[test]
    fn long_summary_carries_sentinel() {
        let s = StageSummary::new(0, "x".repeat(5000), true, DEFAULT_SUMMARY_CAP);
        assert_eq!(s.results.chars().count(), DEFAULT_SUMMARY_CAP);
        assert!(s.results.ends_with(TRUNCATION_SENTINEL));
    }

    proptest! {
        #[test]
        fn summary_never_exceeds_cap(text in "\\PC{0,300}", cap in 0usize..200) {
            let s = StageSummary::new(0, text, true, cap);
            prop_assert!(s.results.chars().count() <= cap);
        }
    }
}
