//! Canonical scripted runs for every (pattern, app, instance, profile).
//!
//! Each app instance is described once as a [`Workload`]: an ordered list of
//! phases, each served by one tool server. The three patterns render that
//! workload into their own reply sequence: one stage per phase for AgentX, a
//! flat call-per-turn transcript for ReAct and one delegation per server run
//! for the orchestrator.

use std::path::{Path, PathBuf};

use agentx_core::{AppLabel, Task};
use agentx_llm::{LlmError, Script, ScriptResponse, ToolCall};
use agentx_patterns::PatternKind;
use agentx_toolpack::arxiv::Catalog;
use agentx_toolpack::fixtures::FixtureSet;
use agentx_toolpack::search::fixture_results;
use agentx_toolpack::stocks::{fixture_series, StockSeries};
use agentx_toolpack::{Profile, ToolError};
use serde_json::{json, Value};

use crate::apps::{self, FAAS_PREFIX, PAPER_TITLES, STOCK_SETS, WEB_QUERIES};

pub const PROFILES: [Profile; 2] = [Profile::Local, Profile::Faas];

const WEB_FILES: [&str; 3] = [
    "quantum_computing_hardware.txt",
    "edge_devices_2025.txt",
    "biodegradable_packaging.txt",
];

const SECTIONS: [(&str, &str); 4] = [
    (
        "Core Contributions",
        "What are the core contributions of the paper?",
    ),
    ("Methodology", "What methodology does the paper use?"),
    ("Experimental Results", "What are the experimental results?"),
    ("Limitations", "What are the limitations of the work?"),
];

#[derive(Debug, thiserror::Error)]
pub enum GoldenError {
    #[error("fixture: {0}")]
    Fixture(#[from] ToolError),
    #[error("paper {0:?} has no {1:?} section")]
    MissingSection(String, String),
}

/// One golden run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GoldenCase {
    pub pattern: PatternKind,
    pub app: AppLabel,
    pub instance: usize,
    pub profile: Profile,
}

impl GoldenCase {
    pub fn all() -> Vec<GoldenCase> {
        let mut out = Vec::new();
        for pattern in PatternKind::ALL {
            for profile in PROFILES {
                out.extend(Self::for_profile(pattern, profile));
            }
        }
        out
    }

    /// The nine app instances for one pattern and profile.
    pub fn for_profile(pattern: PatternKind, profile: Profile) -> Vec<GoldenCase> {
        AppLabel::ALL_TEMPLATES
            .iter()
            .flat_map(|&app| {
                (0..apps::instance_count(app)).map(move |instance| GoldenCase {
                    pattern,
                    app,
                    instance,
                    profile,
                })
            })
            .collect()
    }

    pub fn task(&self) -> Task {
        apps::task(self.app, self.instance, self.profile)
    }

    pub fn name(&self) -> String {
        format!(
            "{}/{}-{}-{}",
            self.pattern.as_str(),
            self.app.as_str(),
            apps::instance_label(self.app, self.instance),
            profile_str(self.profile)
        )
    }

    pub fn path(&self, root: &Path) -> PathBuf {
        root.join(format!("{}.json", self.name()))
    }

    pub fn load(&self) -> Result<Script, LlmError> {
        Script::load(&self.path(&golden_root()))
    }
}

fn profile_str(p: Profile) -> &'static str {
    match p {
        Profile::Local => "local",
        Profile::Faas => "faas",
    }
}

/// Committed golden scripts.
pub fn golden_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("golden")
}

#[derive(Debug, Clone)]
struct Call {
    tool: &'static str,
    args: Value,
    /// What the planner writes for this step; large payloads are left to
    /// the executor.
    plan_args: Value,
    description: String,
}

impl Call {
    fn new(tool: &'static str, description: impl Into<String>, args: Value) -> Self {
        Call {
            tool,
            plan_args: args.clone(),
            args,
            description: description.into(),
        }
    }

    fn planned(mut self, plan_args: Value) -> Self {
        self.plan_args = plan_args;
        self
    }
}

#[derive(Debug, Clone)]
struct Phase {
    server: &'static str,
    stage: String,
    calls: Vec<Call>,
    /// A first attempt that fails, with its reflection.
    failed: Option<(Vec<Call>, String)>,
    summary: String,
}

#[derive(Debug, Clone)]
struct Workload {
    phases: Vec<Phase>,
    final_answer: String,
}

/// Builds the script for `case` from the fixture corpus.
pub fn script(case: &GoldenCase, fx: &FixtureSet) -> Result<Script, GoldenError> {
    let w = match case.app {
        AppLabel::WebSearch => web(case, fx)?,
        AppLabel::StockCorrelation => stock(case, fx)?,
        AppLabel::ResearchReport => research(case, fx)?,
        AppLabel::Custom => unreachable!("custom tasks have no golden run"),
    };
    let task = case.task();
    let mut ids = Ids::default();
    let responses = match case.pattern {
        PatternKind::Agentx => agentx_replies(&w, &mut ids),
        PatternKind::React => react_replies(&w, &mut ids),
        PatternKind::Orchestrator => orchestrator_replies(&w, &task.prompt, &mut ids),
    };
    Ok(Script::sequential(responses))
}

/// Every code-executor source the golden runs execute.
pub fn code_sources(case: &GoldenCase, fx: &FixtureSet) -> Result<Vec<String>, GoldenError> {
    if case.app != AppLabel::StockCorrelation {
        return Ok(vec![]);
    }
    let w = stock(case, fx)?;
    Ok(w.phases
        .iter()
        .flat_map(|p| p.failed.iter().flat_map(|f| f.0.iter()).chain(&p.calls))
        .filter(|c| c.tool == "execute_code")
        .filter_map(|c| c.args["code"].as_str().map(str::to_string))
        .collect())
}

#[derive(Default)]
struct Ids(usize);

impl Ids {
    fn call(&mut self, c: &Call) -> ToolCall {
        self.0 += 1;
        ToolCall {
            id: format!("call_{:02}", self.0),
            name: c.tool.to_string(),
            args: c.args.as_object().cloned().unwrap_or_default(),
        }
    }

    fn calls(&mut self, cs: &[Call]) -> ScriptResponse {
        ScriptResponse::calls(cs.iter().map(|c| self.call(c)).collect())
    }
}

fn agentx_replies(w: &Workload, ids: &mut Ids) -> Vec<ScriptResponse> {
    let stages: Vec<&str> = w.phases.iter().map(|p| p.stage.as_str()).collect();
    let mut out = vec![ScriptResponse::structured(json!({ "sub_tasks": stages }))];
    for p in &w.phases {
        out.push(ScriptResponse::structured(json!({
            "step_descriptions": p.calls.iter().map(|c| c.description.as_str()).collect::<Vec<_>>(),
            "step_tools": p.calls.iter().map(|c| c.tool).collect::<Vec<_>>(),
            "step_args": p.calls.iter().map(|c| c.plan_args.to_string()).collect::<Vec<_>>(),
        })));
        if let Some((bad, reflection)) = &p.failed {
            out.push(ids.calls(bad));
            out.push(ScriptResponse::text("The script failed."));
            out.push(reflect(false, reflection));
        }
        out.push(ids.calls(&p.calls));
        out.push(ScriptResponse::text("All plan steps are done."));
        out.push(reflect(true, &p.summary));
    }
    out
}

fn reflect(success: bool, results: &str) -> ScriptResponse {
    ScriptResponse::structured(json!({ "success": success, "results": results }))
}

fn react_replies(w: &Workload, ids: &mut Ids) -> Vec<ScriptResponse> {
    let mut out = Vec::new();
    for p in &w.phases {
        for c in p.failed.iter().flat_map(|f| f.0.iter()).chain(&p.calls) {
            out.push(ids.calls(std::slice::from_ref(c)));
        }
    }
    out.push(ScriptResponse::text(&w.final_answer));
    out
}

fn agent_name(server: &str) -> String {
    format!("{server}_agent")
}

fn orchestrator_replies(w: &Workload, prompt: &str, ids: &mut Ids) -> Vec<ScriptResponse> {
    let mut groups: Vec<Vec<&Phase>> = Vec::new();
    for p in &w.phases {
        match groups.last_mut() {
            Some(g) if g[0].server == p.server => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    let steps: Vec<String> = groups
        .iter()
        .map(|g| format!("{}: {}", agent_name(g[0].server), joined_stages(g)))
        .collect();
    let mut out = vec![
        ScriptResponse::structured(json!({
            "given": [prompt],
            "to_look_up": [w.phases[0].stage],
            "to_derive": [],
            "educated_guesses": [],
        })),
        ScriptResponse::structured(json!({ "steps": steps })),
    ];
    let mut previous: Option<String> = None;
    for g in &groups {
        let mut instruction = joined_stages(g);
        if let Some(prev) = &previous {
            instruction.push_str("\n\nContext from the previous step:\n");
            instruction.push_str(prev);
        }
        out.push(ScriptResponse::structured(json!({
            "is_complete": false,
            "next_agent": agent_name(g[0].server),
            "instruction": instruction,
        })));
        for p in g {
            if let Some((bad, _)) = &p.failed {
                out.push(ids.calls(bad));
            }
            out.push(ids.calls(&p.calls));
        }
        out.push(ScriptResponse::text("Done."));
        let reflection = g
            .iter()
            .map(|p| p.summary.as_str())
            .collect::<Vec<_>>()
            .join("\n");
        out.push(ScriptResponse::structured(
            json!({ "success": true, "reflection": reflection }),
        ));
        previous = Some(reflection);
    }
    out.push(ScriptResponse::structured(json!({
        "is_complete": true,
        "next_agent": "",
        "instruction": "",
    })));
    out.push(ScriptResponse::text(&w.final_answer));
    out
}

fn joined_stages(g: &[&Phase]) -> String {
    g.iter()
        .map(|p| p.stage.as_str())
        .collect::<Vec<_>>()
        .join(" Then: ")
}

fn output_location(profile: Profile, name: &str) -> String {
    match profile {
        Profile::Local => name.to_string(),
        Profile::Faas => format!("{FAAS_PREFIX}{name}"),
    }
}

/// Writes `content` to `name`: a workspace file locally, a blob under the
/// shared prefix on FaaS.
fn write_call(profile: Profile, name: &str, content: String) -> Call {
    let description = format!("Write the text to {}", output_location(profile, name));
    match profile {
        Profile::Local => Call::new(
            "write_file",
            description,
            json!({"path": name, "content": content}),
        )
        .planned(json!({"path": name})),
        Profile::Faas => {
            let uri = output_location(profile, name);
            Call::new(
                "put_object",
                description,
                json!({"uri": uri, "content": content}),
            )
            .planned(json!({"uri": uri}))
        }
    }
}

fn web(case: &GoldenCase, fx: &FixtureSet) -> Result<Workload, GoldenError> {
    let query = WEB_QUERIES[case.instance];
    let results = fixture_results(fx, query)?;
    let pages = if case.pattern == PatternKind::React {
        5
    } else {
        3
    };
    let top = &results[..pages.min(results.len())];

    let listing: Vec<String> = results
        .iter()
        .take(5)
        .enumerate()
        .map(|(i, r)| format!("{}. {} - {}", i + 1, r.title, r.link))
        .collect();
    let search = Phase {
        server: "serper",
        stage: format!("Search the web for \"{query}\""),
        calls: vec![Call::new(
            "google_search",
            "Run the web search",
            json!({ "query": query }),
        )],
        failed: None,
        summary: format!(
            "The search returned {} results. Most relevant:\n{}",
            results.len(),
            listing.join("\n")
        ),
    };

    let mut fetches = Vec::new();
    for r in top {
        fetches.push(Call::new(
            "fetch",
            format!("Read {}", r.link),
            json!({ "url": r.link }),
        ));
        if case.pattern == PatternKind::React {
            fetches.push(Call::new(
                "fetch",
                format!("Continue reading {}", r.link),
                json!({ "url": r.link, "start_index": 5000 }),
            ));
        }
    }
    let points: Vec<String> = top
        .iter()
        .map(|r| format!("- {}: {}", r.title, r.snippet))
        .collect();
    let fetch = Phase {
        server: "fetch",
        stage: format!(
            "Fetch the top {} result pages and extract the key points",
            top.len()
        ),
        calls: fetches,
        failed: None,
        summary: format!("Key points from the fetched pages:\n{}", points.join("\n")),
    };

    let file = WEB_FILES[case.instance];
    let sources: Vec<&str> = top.iter().map(|r| r.link.as_str()).collect();
    let report = format!(
        "{query}\n\n{}\n\nSources:\n{}\n",
        points.join("\n"),
        sources.join("\n")
    );
    let target = output_location(case.profile, file);
    let write = Phase {
        server: if case.profile == Profile::Local {
            "filesystem"
        } else {
            "s3"
        },
        stage: format!("Write a summary of the findings to {target}"),
        calls: vec![write_call(case.profile, file, report)],
        failed: None,
        summary: format!("Saved the summary to {target}."),
    };
    Ok(Workload {
        phases: vec![search, fetch, write],
        final_answer: format!("The summary of {query} was saved to {target}."),
    })
}

/// Every fifth close plus the last one.
fn weekly(s: &StockSeries) -> Vec<(String, f64)> {
    let n = s.points.len();
    s.points
        .iter()
        .enumerate()
        .filter(|(i, _)| i % 5 == 0 || *i + 1 == n)
        .map(|(_, p)| (p.date.clone(), p.close))
        .collect()
}

fn daily(s: &StockSeries) -> Vec<(String, f64)> {
    s.points.iter().map(|p| (p.date.clone(), p.close)).collect()
}

fn plot_code(series: &[(String, Vec<(String, f64)>)], file: &str, data_name: &str) -> String {
    let mut code = String::from(
        "import matplotlib\nmatplotlib.use(\"Agg\")\nimport matplotlib.pyplot as plt\nfrom datetime import date\n\ndata = {\n",
    );
    for (ticker, points) in series {
        let rows: Vec<String> = points
            .iter()
            .map(|(d, c)| format!("(\"{d}\", {c:.2})"))
            .collect();
        code.push_str(&format!("    \"{ticker}\": [{}],\n", rows.join(", ")));
    }
    code.push_str(&format!(
        "}}\n\nfig, ax = plt.subplots(figsize=(8, 4.5), dpi=80)\n\
         for ticker, points in {data_name}.items():\n\
         \x20   ax.plot([date.fromisoformat(d) for d, _ in points], [c for _, c in points], label=ticker)\n\
         ax.set_title(\"Closing prices\")\nax.set_xlabel(\"Date\")\nax.set_ylabel(\"Close (USD)\")\nax.legend()\n\
         fig.autofmt_xdate()\nfig.tight_layout()\n\
         fig.savefig(\"{file}\", metadata={{\"Software\": None}})\nprint(\"Saved plot to {file}\")\n"
    ));
    code
}

fn stock(case: &GoldenCase, fx: &FixtureSet) -> Result<Workload, GoldenError> {
    let (names, tickers, file) = STOCK_SETS[case.instance];
    let series = tickers
        .iter()
        .map(|t| fixture_series(fx, t))
        .collect::<Result<Vec<_>, _>>()?;
    let history = Phase {
        server: "yfinance",
        stage: format!(
            "Retrieve one year of daily closing prices for {}, {} and {}",
            tickers[0], tickers[1], tickers[2]
        ),
        calls: tickers
            .iter()
            .map(|t| {
                Call::new(
                    "get_stock_history",
                    format!("Get the price history of {t}"),
                    json!({"ticker": t, "period": "1y"}),
                )
            })
            .collect(),
        failed: None,
        summary: {
            let lines: Vec<String> = series
                .iter()
                .map(|s| {
                    let pts: Vec<String> = weekly(s)
                        .iter()
                        .map(|(d, c)| format!("{d} {c:.2}"))
                        .collect();
                    format!("{}: {}", s.ticker, pts.join(", "))
                })
                .collect();
            format!(
                "Retrieved {} trading days per ticker. Weekly closes:\n{}",
                series[0].points.len(),
                lines.join("\n")
            )
        },
    };

    // The ReAct agent keeps the full tool output in context and plots every
    // day; the others only carry the weekly summary forward.
    let pick = if case.pattern == PatternKind::React {
        daily
    } else {
        weekly
    };
    let data: Vec<(String, Vec<(String, f64)>)> =
        series.iter().map(|s| (s.ticker.clone(), pick(s))).collect();
    let code_call = |code: String| {
        let mut args = json!({ "code": code });
        let mut plan = json!({});
        if case.profile == Profile::Faas {
            args["upload_prefix"] = json!(FAAS_PREFIX);
            plan["upload_prefix"] = json!(FAAS_PREFIX);
        }
        Call::new(
            "execute_code",
            format!("Plot the three series and save {file}"),
            args,
        )
        .planned(plan)
    };
    let failed = (case.instance == 0).then(|| {
        (
            vec![code_call(plot_code(&data, file, "prices"))],
            "The plotting script failed with NameError: name 'prices' is not defined. The data dictionary is called data."
                .to_string(),
        )
    });
    let target = match case.profile {
        Profile::Local => file.to_string(),
        Profile::Faas => format!("{FAAS_PREFIX}{file}"),
    };
    let plot = Phase {
        server: "code_executor",
        stage: format!("Plot the closing prices of the three stocks and save the figure as {file}"),
        calls: vec![code_call(plot_code(&data, file, "data"))],
        failed,
        summary: format!("Saved the plot to {target}."),
    };
    Ok(Workload {
        phases: vec![history, plot],
        final_answer: format!(
            "The plot of the stock prices of {}, {} and {} was saved to {target}.",
            names[0], names[1], names[2]
        ),
    })
}

/// The body of `heading` in a fixture paper: the lines after it up to the
/// next blank line.
fn section(text: &str, heading: &str) -> Option<String> {
    let mut lines = text.lines().skip_while(|l| l.trim() != heading);
    lines.next()?;
    let body: Vec<&str> = lines.take_while(|l| !l.trim().is_empty()).collect();
    (!body.is_empty()).then(|| body.join(" "))
}

fn research(case: &GoldenCase, fx: &FixtureSet) -> Result<Workload, GoldenError> {
    let title = PAPER_TITLES[case.instance];
    let catalog = Catalog::load(fx.clone())?;
    let article = catalog.find(title)?;
    let text = catalog.text(article)?;
    let id = article.id.clone();

    let search = Phase {
        server: "arxiv",
        stage: format!("Find the paper titled \"{title}\" on arXiv"),
        calls: vec![Call::new(
            "search_papers",
            "Search arXiv by title",
            json!({"query": title, "max_results": 1}),
        )],
        failed: None,
        summary: format!(
            "Found arXiv {id}, \"{}\" by {}, published {}.",
            article.title,
            article.authors.join(", "),
            article.published
        ),
    };
    let (dest, stored, path_key) = match case.profile {
        Profile::Local => (
            "papers/".to_string(),
            format!("papers/{id}.txt"),
            "file_path",
        ),
        Profile::Faas => (
            FAAS_PREFIX.to_string(),
            format!("{FAAS_PREFIX}{id}.txt"),
            "s3_uri",
        ),
    };
    let download = Phase {
        server: "arxiv",
        stage: "Download the full text of the paper".to_string(),
        calls: vec![Call::new(
            "download_article",
            format!("Download {id}"),
            json!({"title_or_id": id, "dest": dest}),
        )],
        failed: None,
        summary: format!("Downloaded the paper to {stored}."),
    };

    let mut found = Vec::new();
    for (heading, _) in SECTIONS {
        let body = section(&text, heading)
            .ok_or_else(|| GoldenError::MissingSection(id.clone(), heading.to_string()))?;
        found.push((heading, body));
    }
    let retrieve = Phase {
        server: "rag",
        stage: "Retrieve the core contributions, methodology, experimental results and limitations from the paper"
            .to_string(),
        calls: SECTIONS
            .iter()
            .map(|(heading, question)| {
                Call::new(
                    "document_retriever",
                    format!("Retrieve passages on {}", heading.to_lowercase()),
                    json!({ path_key: stored, "query": question }),
                )
            })
            .collect(),
        failed: None,
        summary: found.iter().map(|(h, b)| format!("{h}: {b}")).collect::<Vec<_>>().join("\n"),
    };

    let file = format!("{id}_report.txt");
    let mut report = format!("Report: {}\n", article.title);
    for (h, b) in &found {
        report.push_str(&format!("\n{h}\n{b}\n"));
    }
    let target = output_location(case.profile, &file);
    let write = Phase {
        server: if case.profile == Profile::Local {
            "filesystem"
        } else {
            "s3"
        },
        stage: format!("Write the report to {target}"),
        calls: vec![write_call(case.profile, &file, report)],
        failed: None,
        summary: format!("Saved the report to {target}."),
    };
    Ok(Workload {
        phases: vec![search, download, retrieve, write],
        final_answer: format!("The report on \"{}\" was saved to {target}.", article.title),
    })
}
