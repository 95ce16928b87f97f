//! The three benchmark applications, their instances and prompts.

use agentx_core::{AppLabel, Task};
use agentx_toolpack::Profile;
use serde::{Deserialize, Serialize};

/// Where FaaS runs are told to put their output.
pub const FAAS_PREFIX: &str = "s3://dummy-bucket/agent/";

pub const WEB_QUERIES: [&str; 3] = [
    "Recent advancements in quantum computing hardware development",
    "Edge devices and their real-world use cases in 2025",
    "Latest trends in biodegradable materials for sustainable packaging",
];

/// `(company names, tickers, output file)` per stock instance.
pub const STOCK_SETS: [([&str; 3], [&str; 3], &str); 3] = [
    (
        ["Apple", "Google", "Microsoft"],
        ["AAPL", "GOOGL", "MSFT"],
        "AppleGoogleMicrosoft.png",
    ),
    (
        ["Netflix", "Disney", "Amazon"],
        ["NFLX", "DIS", "AMZN"],
        "NetflixDisneyAmazon.png",
    ),
    (
        ["CocaCola", "PepsiCo", "Mondelez"],
        ["KO", "PEP", "MDLZ"],
        "CocaColaPepsiCoMondelez.png",
    ),
];

pub const PAPER_TITLES: [&str; 3] = [
    "Why Do Multi-Agent LLM Systems Fail?",
    "Flow: Modularized Agentic Workflow Automation",
    "Magentic-One: A Generalist Multi-Agent System for Solving Complex Tasks.",
];

/// What a run must leave behind to count as a success.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArtifactRule {
    /// A non-empty text file written by a tool during the run.
    TextFile,
    /// A file with exactly this name.
    Named { name: String },
    /// No artifact is required.
    None,
}

pub fn instance_count(app: AppLabel) -> usize {
    match app {
        AppLabel::WebSearch | AppLabel::StockCorrelation | AppLabel::ResearchReport => 3,
        AppLabel::Custom => 0,
    }
}

/// Short, path-safe instance label.
pub fn instance_label(app: AppLabel, instance: usize) -> String {
    match app {
        AppLabel::WebSearch => ["quantum", "edge", "materials"][instance].to_string(),
        AppLabel::StockCorrelation => STOCK_SETS[instance].1.join("-"),
        AppLabel::ResearchReport => ["mas-failures", "flow", "magentic-one"][instance].to_string(),
        AppLabel::Custom => format!("custom-{instance}"),
    }
}

pub fn prompt(app: AppLabel, instance: usize, profile: Profile) -> String {
    let base = match app {
        AppLabel::WebSearch => format!(
            "Search for {} and summarize the results in a text file",
            WEB_QUERIES[instance]
        ),
        AppLabel::StockCorrelation => {
            let ([a, b, c], _, file) = STOCK_SETS[instance];
            format!("Generate a plot for the historic stock prices of {a}, {b}, and {c} and save it as {file}.")
        }
        AppLabel::ResearchReport => format!(
            "Generate a report on the Core Contributions, Methodology, Experimental Results, and Limitations for the paper titled {} and save it as a text file.",
            PAPER_TITLES[instance]
        ),
        AppLabel::Custom => String::new(),
    };
    match (profile, app) {
        (Profile::Local, _) | (_, AppLabel::Custom) => base,
        (Profile::Faas, AppLabel::ResearchReport) => {
            format!("{base} Note: you can read/write from s3 from this location: '{FAAS_PREFIX}'")
        }
        (Profile::Faas, _) => format!(
            "{} and write it to s3 location: '{FAAS_PREFIX}'",
            base.trim_end_matches('.')
        ),
    }
}

pub fn task(app: AppLabel, instance: usize, profile: Profile) -> Task {
    let id = format!("{}-{}", app.as_str(), instance_label(app, instance));
    Task::new(
        id,
        prompt(app, instance, profile),
        app,
        instance_label(app, instance),
    )
    .expect("app prompts are non-empty")
}

pub fn artifact_rule(app: AppLabel, instance: usize) -> ArtifactRule {
    match app {
        AppLabel::WebSearch | AppLabel::ResearchReport => ArtifactRule::TextFile,
        AppLabel::StockCorrelation => ArtifactRule::Named {
            name: STOCK_SETS[instance].2.to_string(),
        },
        AppLabel::Custom => ArtifactRule::None,
    }
}
