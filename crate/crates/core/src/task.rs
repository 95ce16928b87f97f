use serde::{Deserialize, Serialize};

/// Which application template a task was instantiated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppLabel {
    WebSearch,
    StockCorrelation,
    ResearchReport,
    Custom,
}

impl AppLabel {
    pub const ALL_TEMPLATES: [AppLabel; 3] = [
        AppLabel::WebSearch,
        AppLabel::StockCorrelation,
        AppLabel::ResearchReport,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AppLabel::WebSearch => "web_search",
            AppLabel::StockCorrelation => "stock_correlation",
            AppLabel::ResearchReport => "research_report",
            AppLabel::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "web_search" => Some(AppLabel::WebSearch),
            "stock_correlation" => Some(AppLabel::StockCorrelation),
            "research_report" => Some(AppLabel::ResearchReport),
            "custom" => Some(AppLabel::Custom),
            _ => None,
        }
    }
}

impl std::fmt::Display for AppLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A user task: the templated prompt plus labels used for reporting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub prompt: String,
    pub app_label: AppLabel,
    pub instance_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("task prompt must not be empty")]
pub struct EmptyPrompt;

impl Task {
    pub fn new(
        id: impl Into<String>,
        prompt: impl Into<String>,
        app_label: AppLabel,
        instance_label: impl Into<String>,
    ) -> Result<Self, EmptyPrompt> {
        let prompt = prompt.into();
        if prompt.trim().is_empty() {
            return Err(EmptyPrompt);
        }
        Ok(Task {
            id: id.into(),
            prompt,
            app_label,
            instance_label: instance_label.into(),
        })
    }
}
