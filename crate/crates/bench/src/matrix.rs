//! Benchmark matrices: patterns × tasks × repetitions under a stop rule.

use std::path::{Path, PathBuf};

use agentx_core::{AppLabel, Task};
use agentx_engine::{apps, RunMode};
use agentx_llm::Script;
use agentx_patterns::PatternKind;
use serde::{Deserialize, Serialize};

use crate::BenchError;

pub const BUNDLED_MATRIX: &str = include_str!("../matrices/default-matrix.json");
pub const BUNDLED_JUDGE_SCRIPT: &str = include_str!("../matrices/judge-script.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StopRule {
    /// Exactly `repetitions` runs per cell.
    FixedRuns,
    /// Run until `n` successes, giving up after `max_runs`.
    UntilNSuccesses { n: u32 },
}

/// Which app instances a matrix row covers; all of them when `instances`
/// is absent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub app: AppLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instances: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgeSpec {
    /// `scripted:<path>` (relative to the matrix file) or an HTTP endpoint.
    pub llm: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrix {
    #[serde(default = "default_name")]
    pub name: String,
    pub patterns: Vec<PatternKind>,
    pub tasks: Vec<TaskSpec>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
    #[serde(default)]
    pub mode: RunMode,
    #[serde(default = "default_stop_rule")]
    pub stop_rule: StopRule,
    /// Guard for `until_n_successes`; defaults to four times the target.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_runs: Option<u32>,
    /// Directory of `<pattern>/<app>-<instance>-<profile>.json` scripts;
    /// the engine's golden scripts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scripts: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge: Option<JudgeSpec>,
}

fn default_name() -> String {
    "matrix".into()
}

fn default_repetitions() -> u32 {
    5
}

fn default_stop_rule() -> StopRule {
    StopRule::FixedRuns
}

/// One (pattern, task) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub pattern: PatternKind,
    pub app: AppLabel,
    pub instance: usize,
    pub task: Task,
}

impl Cell {
    pub fn id(&self) -> String {
        format!("{}-{}", self.pattern.as_str(), self.task.id)
    }
}

impl Matrix {
    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        let m: Matrix =
            serde_json::from_str(text).map_err(|e| BenchError::Matrix(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Loads a matrix file, resolving `scripts` and a scripted judge path
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Matrix(format!("{}: {e}", path.display())))?;
        let mut m = Matrix::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(dir) = &m.scripts {
            if dir.is_relative() {
                m.scripts = Some(base.join(dir));
            }
        }
        if let Some(j) = &mut m.judge {
            if let Some(rel) = j.llm.strip_prefix("scripted:") {
                if Path::new(rel).is_relative() {
                    j.llm = format!("scripted:{}", base.join(rel).display());
                }
            }
        }
        Ok(m)
    }

    /// The bundled matrix: all patterns on every app instance, five
    /// successes per cell, scored by a scripted judge.
    pub fn bundled() -> Self {
        Matrix::from_json(BUNDLED_MATRIX).expect("bundled matrix is valid")
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Matrix(m));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.patterns.is_empty() || self.tasks.is_empty() {
            return bad("a matrix needs at least one pattern and one task".into());
        }
        for t in &self.tasks {
            if t.app == AppLabel::Custom {
                return bad("custom tasks have no instances; use an application template".into());
            }
            for &i in t.instances.iter().flatten() {
                if i >= apps::instance_count(t.app) {
                    return bad(format!("{} has no instance {i}", t.app));
                }
            }
        }
        if let StopRule::UntilNSuccesses { n } = self.stop_rule {
            if n == 0 {
                return bad("until_n_successes needs n of at least 1".into());
            }
            if self.max_runs.is_some_and(|m| m < n) {
                return bad(format!(
                    "max_runs {} is below the success target {n}",
                    self.max_runs.unwrap_or(0)
                ));
            }
        }
        Ok(())
    }

    /// Runs the stop rule allows per cell.
    pub fn run_budget(&self) -> u32 {
        match self.stop_rule {
            StopRule::FixedRuns => self.repetitions,
            StopRule::UntilNSuccesses { n } => self.max_runs.unwrap_or(n.saturating_mul(4)),
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        let profile = self.mode.profile();
        let mut out = Vec::new();
        for &pattern in &self.patterns {
            for t in &self.tasks {
                let all: Vec<usize> = (0..apps::instance_count(t.app)).collect();
                for &instance in t.instances.as_ref().unwrap_or(&all) {
                    out.push(Cell {
                        pattern,
                        app: t.app,
                        instance,
                        task: apps::task(t.app, instance, profile),
                    });
                }
            }
        }
        out
    }

    /// The judge script the bundled matrix names.
    pub fn bundled_judge_script() -> Script {
        Script::from_json(BUNDLED_JUDGE_SCRIPT).expect("bundled judge script is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_matrix_covers_every_instance() {
        let m = Matrix::bundled();
        assert_eq!(m.cells().len(), 27);
        assert_eq!(m.stop_rule, StopRule::UntilNSuccesses { n: 5 });
        assert_eq!(m.run_budget(), 20);
    }

    #[test]
    fn cardinality_with_fixed_runs() {
        let m = Matrix::from_json(
            r#"{"patterns": ["agentx", "react", "orchestrator"], "tasks": [{"app": "web_search"}],
                "repetitions": 2, "stop_rule": {"kind": "fixed_runs"}}"#,
        )
        .unwrap();
        assert_eq!(m.cells().len() * m.run_budget() as usize, 18);
    }

    #[test]
    fn invalid_matrices() {
        for text in [
            r#"{"patterns": ["agentx"], "tasks": [{"app": "web_search"}], "repetitions": 0}"#,
            r#"{"patterns": [], "tasks": [{"app": "web_search"}]}"#,
            r#"{"patterns": ["agentx"], "tasks": [{"app": "web_search", "instances": [3]}]}"#,
            r#"{"patterns": ["agentx"], "tasks": [{"app": "web_search"}], "extra": 1}"#,
            r#"{"patterns": ["agentx"], "tasks": [{"app": "web_search"}], "stop_rule": {"kind": "until_n_successes", "n": 5}, "max_runs": 4}"#,
            r#"{"patterns": ["smolagents"], "tasks": [{"app": "web_search"}]}"#,
        ] {
            assert!(Matrix::from_json(text).is_err(), "{text}");
        }
    }
}
