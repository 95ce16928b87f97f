//! Regenerates the search, fetch, arXiv and stock fixtures under
//! `crates/toolpack/fixtures/`. Output is a pure function of the seeds below.
//!
//!     cargo run -p agentx-toolpack --example gen_fixtures

use std::collections::BTreeMap;
use std::path::Path;

use agentx_toolpack::arxiv::Article;
use agentx_toolpack::search::{render, SearchIndexEntry, SearchResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAGE_CHARS: usize = 12_000;
const SEARCH_TOKEN_TARGET: usize = 883;
const STOCK_SEED: u64 = 20_240_101;

struct Topic {
    slug: &'static str,
    query: &'static str,
    sites: [(&'static str, &'static str); 8],
    sentences: &'static [&'static str],
}

const TOPICS: [Topic; 3] = [
    Topic {
        slug: "quantum",
        query: "Recent advancements in quantum computing hardware development",
        sites: [
            ("qubit-weekly.example", "Superconducting qubit roadmaps for the next decade"),
            ("photonics-lab.example", "Photonic quantum processors move toward room temperature"),
            ("trapped-ion-report.example", "Trapped-ion systems set new two-qubit fidelity records"),
            ("cryo-engineering.example", "Cryogenic control electronics shrink the wiring bottleneck"),
            ("error-correction-today.example", "Logical qubits below the surface-code threshold"),
            ("neutral-atoms.example", "Neutral-atom arrays scale to thousands of sites"),
            ("quantum-industry-news.example", "Hardware vendors publish modular system roadmaps"),
            ("spin-qubits.example", "Silicon spin qubits borrow from semiconductor fabs"),
        ],
        sentences: &[
            "Superconducting transmon processors now routinely exceed one hundred physical qubits on a single chip.",
            "Two-qubit gate fidelities above 99.9 percent have been reported for trapped-ion and neutral-atom platforms.",
            "Error-corrected logical qubits whose error rate falls as the code distance grows mark a turning point for the field.",
            "Cryogenic CMOS controllers placed inside the dilution refrigerator reduce the number of coaxial lines per qubit.",
            "Photonic architectures encode information in squeezed light and promise networking at telecom wavelengths.",
            "Neutral-atom machines rearrange optical tweezers mid-circuit, which enables flexible qubit connectivity.",
            "Silicon spin qubits can be manufactured with modified semiconductor processes, easing the path to volume production.",
            "Modular designs link several smaller processors through microwave or optical interconnects instead of one monolithic chip.",
            "Coherence times for fluxonium and tantalum-based transmons have improved by an order of magnitude over earlier devices.",
            "Vendors increasingly publish roadmaps measured in logical qubits rather than raw physical qubit counts.",
            "Benchmarks such as quantum volume and layer fidelity help compare machines built on very different physics.",
            "Leakage, crosstalk and cosmic-ray bursts remain practical obstacles that hardware teams must engineer around.",
            "Hybrid workflows pair quantum processors with classical accelerators for decoding and real-time feedback.",
            "Materials research on substrates and junction oxides is now a major lever for reducing two-level-system defects.",
        ],
    },
    Topic {
        slug: "edge",
        query: "Edge devices and their real-world use cases in 2025",
        sites: [
            ("edge-insider.example", "Where edge AI accelerators are deployed today"),
            ("factory-floor-tech.example", "Predictive maintenance with on-device inference"),
            ("smart-retail-review.example", "Cashierless checkout runs on in-store edge servers"),
            ("connected-health.example", "Wearables that screen for arrhythmia without the cloud"),
            ("autonomy-journal.example", "Vehicles as rolling edge data centers"),
            ("agritech-daily.example", "Edge sensors bring precision irrigation to small farms"),
            ("city-systems.example", "Traffic signals that adapt in real time at the intersection"),
            ("telco-edge.example", "Multi-access edge computing arrives with 5G standalone"),
        ],
        sentences: &[
            "Edge devices process data close to where it is produced, cutting round-trip latency and backhaul bandwidth.",
            "Neural processing units in phones, cameras and gateways now run vision and speech models locally.",
            "Factories attach vibration and thermal sensors to motors and flag anomalies before a breakdown stops the line.",
            "Retailers use shelf cameras and edge servers to track stock levels and enable checkout without cashiers.",
            "Smartwatches screen heart rhythm on the device and only upload alerts, which keeps raw health data private.",
            "Connected vehicles fuse lidar, radar and camera streams on board because a cloud round trip is too slow for braking.",
            "Farms deploy soil-moisture probes with low-power radios so irrigation decisions are made in the field.",
            "Cities place controllers at intersections that retime traffic lights from live camera counts.",
            "Telecom operators host compute at the base station under the multi-access edge computing model.",
            "Small language models quantized to four bits make on-device assistants practical on mid-range hardware.",
            "Fleet management tools push model updates over the air and roll back automatically when accuracy drops.",
            "Energy utilities run grid-edge analytics on smart meters to balance rooftop solar and battery storage.",
            "Security teams worry about physical tampering and patch cadence across thousands of distributed devices.",
            "Federated learning lets many devices improve a shared model while training data stays where it was collected.",
        ],
    },
    Topic {
        slug: "materials",
        query: "Latest trends in biodegradable materials for sustainable packaging",
        sites: [
            ("green-pack-news.example", "PLA and PHA move from niche to mainstream packaging"),
            ("circular-materials.example", "Seaweed films as a replacement for single-use plastic"),
            ("food-contact-review.example", "Barrier coatings that keep compostable pouches fresh"),
            ("mycelium-works.example", "Mushroom-grown foam for protective shipping inserts"),
            ("paper-innovation.example", "Molded fiber trays replace expanded polystyrene"),
            ("policy-and-packaging.example", "Regulation drives demand for certified compostables"),
            ("bioplastics-market.example", "Capacity expansions for bio-based polymers"),
            ("lab-to-shelf.example", "Starch blends tuned for strength and home composting"),
        ],
        sentences: &[
            "Polylactic acid made from fermented plant sugars is now the most widely produced compostable packaging polymer.",
            "Polyhydroxyalkanoates are synthesized by bacteria and break down in soil and marine environments.",
            "Seaweed-based films dissolve in warm water and can be eaten, which suits sachets and single-portion wraps.",
            "Mycelium grown on agricultural waste forms protective foam that replaces polystyrene inserts in shipping boxes.",
            "Molded pulp and bagasse trays made from sugarcane residue are replacing plastic clamshells for takeaway food.",
            "Water-based and chitosan coatings add moisture and oxygen barriers without blocking composting.",
            "Industrial composting standards such as EN 13432 define how quickly a material must disintegrate.",
            "Home-compostable certification is stricter because garden heaps run cooler than industrial facilities.",
            "Extended producer responsibility laws make brands pay for packaging waste and favor recyclable or compostable designs.",
            "Starch blends with plasticizers reach useful strength but remain sensitive to humidity during storage.",
            "Life-cycle assessments show that feedstock, transport and end-of-life handling decide the real environmental benefit.",
            "Contamination of recycling streams with compostable plastics is a concern that labeling schemes try to address.",
            "Cellulose nanofibers reinforce paper-based packaging so it can hold liquids and greasy foods.",
            "Producers are scaling capacity for bio-based polymers, which is expected to narrow the price gap with fossil plastics.",
        ],
    },
];

fn slugify(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '-'
            }
        })
        .collect::<String>()
        .split('-')
        .filter(|p| !p.is_empty())
        .collect::<Vec<_>>()
        .join("-")
}

fn page(topic: &Topic, title: &str, rng: &mut ChaCha8Rng) -> String {
    let mut text = format!("# {title}\n\n");
    let mut section = 1;
    while text.chars().count() < PAGE_CHARS {
        text.push_str(&format!("## Part {section}\n\n"));
        for _ in 0..3 {
            let n = rng.random_range(3..6);
            let para: Vec<&str> = (0..n)
                .map(|_| topic.sentences[rng.random_range(0..topic.sentences.len())])
                .collect();
            text.push_str(&para.join(" "));
            text.push_str("\n\n");
        }
        section += 1;
    }
    text.chars().take(PAGE_CHARS).collect()
}

fn snippet(topic: &Topic, i: usize, chars: usize) -> String {
    let mut s = String::new();
    let mut k = i;
    while s.len() < chars {
        if !s.is_empty() {
            s.push(' ');
        }
        s.push_str(topic.sentences[k % topic.sentences.len()]);
        k += 5;
    }
    let cut: String = s.chars().take(chars).collect();
    match cut.rfind(' ') {
        Some(at) if cut.len() < s.len() => format!("{}...", &cut[..at]),
        _ => cut,
    }
}

fn search_results(topic: &Topic) -> Vec<SearchResult> {
    let build = |chars: usize| -> Vec<SearchResult> {
        topic
            .sites
            .iter()
            .enumerate()
            .map(|(i, (host, title))| SearchResult {
                title: title.to_string(),
                link: format!("https://{host}/{}", slugify(title)),
                snippet: snippet(topic, i, chars),
            })
            .collect()
    };
    let tokens = |r: &[SearchResult]| render(r).chars().count().div_ceil(4);
    (60..800)
        .map(|c| (c, tokens(&build(c))))
        .min_by_key(|&(_, t)| t.abs_diff(SEARCH_TOKEN_TARGET))
        .map(|(c, _)| build(c))
        .expect("nonempty range")
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) {
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    std::fs::write(path, bytes).unwrap();
}

fn gen_web(root: &Path) {
    let mut index = Vec::new();
    let mut pages = BTreeMap::new();
    for (t, topic) in TOPICS.iter().enumerate() {
        let results = search_results(topic);
        let file = format!("{}.json", topic.slug);
        write(
            &root.join("serper").join(&file),
            serde_json::to_string_pretty(&results).unwrap(),
        );
        index.push(SearchIndexEntry {
            query: topic.query.into(),
            results: file,
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + t as u64);
        for r in &results {
            let rel = format!("pages/{}/{}.md", topic.slug, slugify(&r.title));
            write(
                &root.join("fetch").join(&rel),
                page(topic, &r.title, &mut rng),
            );
            pages.insert(r.link.clone(), rel);
        }
    }
    write(
        &root.join("serper/index.json"),
        serde_json::to_string_pretty(&index).unwrap(),
    );
    write(
        &root.join("fetch/index.json"),
        serde_json::to_string_pretty(&pages).unwrap(),
    );
}

struct Paper {
    id: &'static str,
    title: &'static str,
    authors: &'static [&'static str],
    published: &'static str,
    summary: &'static str,
    sections: [(&'static str, &'static [&'static str]); 4],
}

const PAPERS: [Paper; 3] = [
    Paper {
        id: "2503.13657",
        title: "Why Do Multi-Agent LLM Systems Fail?",
        authors: &["Mert Cemri", "Melissa Z. Pan", "Shuyi Yang"],
        published: "2025-03-17",
        summary: "A study of failure modes in multi-agent systems built on large language models. The authors collect execution traces from several open-source frameworks, derive a taxonomy of failures, and evaluate whether simple interventions reduce them.",
        sections: [
            ("Core Contributions", &[
                "The work introduces a taxonomy of failure modes for multi-agent LLM systems, grouped into specification problems, inter-agent misalignment, and weak task verification.",
                "It releases an annotated dataset of execution traces so that other researchers can measure failures consistently.",
                "It proposes an LLM-based annotator that labels traces with the taxonomy and reports its agreement with human experts.",
            ]),
            ("Methodology", &[
                "Traces were gathered from several popular multi-agent frameworks running programming and math tasks.",
                "Expert annotators followed a grounded-theory process, iterating on category definitions until inter-annotator agreement was high.",
                "The automated annotator was calibrated against the human labels and then applied to a larger set of traces.",
                "Two intervention styles were tested: improved role specifications in prompts and stronger orchestration with explicit verification steps.",
            ]),
            ("Experimental Results", &[
                "Failure rates were substantial across all studied frameworks, with no framework consistently reliable.",
                "Specification and system design issues accounted for a large share of failures, followed by coordination breakdowns between agents.",
                "Verification failures, such as accepting incorrect intermediate results, were frequent and often decisive.",
                "The prompt and orchestration interventions helped in some cases, but gains were modest and did not remove the main failure categories.",
            ]),
            ("Limitations", &[
                "The taxonomy is derived from a limited set of frameworks and task types and may not cover every deployment setting.",
                "Annotation remains partly subjective even with high agreement scores.",
                "The interventions studied are lightweight; structural redesigns of agent organization were left to future work.",
            ]),
        ],
    },
    Paper {
        id: "2501.07834",
        title: "Flow: Modularized Agentic Workflow Automation",
        authors: &["Boye Niu", "Yiliao Song", "Kai Lian"],
        published: "2025-01-14",
        summary: "A multi-agent framework that represents a workflow as an activity-on-vertex graph and refines it during execution. Modularity of the graph is encouraged so that subtasks can run concurrently and failures stay local.",
        sections: [
            ("Core Contributions", &[
                "Flow models an agentic workflow as an activity-on-vertex graph whose nodes are subtasks and whose edges are dependencies.",
                "The framework updates the workflow dynamically while it executes, using results of completed subtasks to revise remaining ones.",
                "It defines measures of parallelism and dependency complexity and prefers modular graphs that score well on both.",
            ]),
            ("Methodology", &[
                "An initial workflow is generated by an LLM, and several candidate graphs are compared using the modularity measures.",
                "Agents are assigned to subtasks and run concurrently whenever the dependency graph allows it.",
                "After each subtask finishes, a refinement step checks progress and may add, remove or rewrite pending subtasks.",
                "Updates are kept local to affected regions of the graph so that unrelated branches continue without interruption.",
            ]),
            ("Experimental Results", &[
                "The evaluation covers coding tasks such as building small games, web pages and data tools.",
                "Flow achieves higher success rates than the compared multi-agent baselines on most tasks.",
                "Dynamic refinement reduces time spent on failed branches and improves robustness when a subtask goes wrong.",
                "Ablations show that both the modularity criteria and the update mechanism contribute to the gains.",
            ]),
            ("Limitations", &[
                "Workflow generation and refinement add LLM calls, which increases cost for small tasks.",
                "The measures of modularity are heuristics and may not reflect actual runtime parallelism on every platform.",
                "Experiments focus on software-oriented tasks, so transfer to other domains is not demonstrated.",
            ]),
        ],
    },
    Paper {
        id: "2411.04468",
        title: "Magentic-One: A Generalist Multi-Agent System for Solving Complex Tasks",
        authors: &["Adam Fourney", "Gagan Bansal", "Hussein Mozannar"],
        published: "2024-11-07",
        summary: "A generalist multi-agent system in which a lead orchestrator plans, tracks progress and delegates to specialized agents for web browsing, file handling, coding and terminal execution.",
        sections: [
            ("Core Contributions", &[
                "Magentic-One introduces an orchestrator agent that keeps a task ledger of facts and a plan, and a progress ledger for step-by-step delegation.",
                "Specialized agents cover web surfing, file reading, code writing and command execution, and can be added or removed without retraining.",
                "The system is released as open source together with an evaluation tool for agentic benchmarks.",
            ]),
            ("Methodology", &[
                "The orchestrator first gathers known facts, facts to look up, facts to derive and educated guesses, then drafts a plan.",
                "In an inner loop it selects the next agent, issues an instruction and checks whether the task is complete or stalled.",
                "When progress stalls, an outer loop revises the facts and the plan before continuing.",
                "All agents use the same underlying model in the default configuration, though the design allows mixing models.",
            ]),
            ("Experimental Results", &[
                "The system was evaluated on several agentic benchmarks covering web navigation, file handling and general assistance tasks.",
                "It reaches performance that is statistically competitive with the strongest specialized systems at the time of publication.",
                "Ablations show that removing the orchestrator ledgers or individual agents lowers task completion.",
            ]),
            ("Limitations", &[
                "Runs are long and expensive because many LLM calls are spent on planning and progress tracking.",
                "Agents acting on the open web raise safety risks, so the authors recommend sandboxing and human oversight.",
                "Errors can compound when the orchestrator accepts wrong intermediate results from an agent.",
            ]),
        ],
    },
];

fn gen_arxiv(root: &Path) {
    let mut index = Vec::new();
    for p in &PAPERS {
        let mut text = format!(
            "{}\n{}\n\nAbstract\n{}\n",
            p.title,
            p.authors.join(", "),
            p.summary
        );
        for (heading, paras) in &p.sections {
            text.push_str(&format!("\n{heading}\n"));
            for para in paras.iter() {
                text.push_str(para);
                text.push('\n');
            }
        }
        let file = format!("papers/{}.txt", p.id);
        write(&root.join("arxiv").join(&file), &text);
        index.push(Article {
            id: p.id.into(),
            title: p.title.into(),
            authors: p.authors.iter().map(|a| a.to_string()).collect(),
            published: p.published.into(),
            summary: p.summary.into(),
            file,
        });
    }
    write(
        &root.join("arxiv/index.json"),
        serde_json::to_string_pretty(&index).unwrap(),
    );
}

const HOLIDAYS_2024: [(u32, u32); 10] = [
    (1, 1),
    (1, 15),
    (2, 19),
    (3, 29),
    (5, 27),
    (6, 19),
    (7, 4),
    (9, 2),
    (11, 28),
    (12, 25),
];

fn trading_days_2024() -> Vec<String> {
    use agentx_toolpack::stocks::civil_from_days;
    // 2024-01-01 is day 19723 and a Monday.
    (19_723..19_723 + 366)
        .filter_map(|d: i64| {
            let weekday = (d + 3).rem_euclid(7); // 0 = Monday
            let (y, m, day) = civil_from_days(d);
            (weekday < 5 && !HOLIDAYS_2024.contains(&(m, day)))
                .then(|| format!("{y:04}-{m:02}-{day:02}"))
        })
        .collect()
}

fn gen_stocks(root: &Path) {
    let starts = [185.0, 139.0, 370.0, 480.0, 90.0, 150.0, 59.0, 169.0, 72.0];
    let days = trading_days_2024();
    assert_eq!(days.len(), 252);
    for (i, (ticker, start)) in agentx_toolpack::stocks::UNIVERSE
        .iter()
        .zip(starts)
        .enumerate()
    {
        let mut rng = ChaCha8Rng::seed_from_u64(STOCK_SEED + i as u64);
        let mut price: f64 = start;
        let mut csv = String::from("Date,Close\n");
        for d in &days {
            let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-12), rng.random());
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            price *= (0.0004 + 0.015 * z).exp();
            csv.push_str(&format!("{d},{price:.2}\n"));
        }
        write(&root.join(format!("yfinance/{ticker}.csv")), csv);
    }
}

fn main() {
    let root = agentx_toolpack::default_fixture_root();
    gen_web(&root);
    gen_arxiv(&root);
    gen_stocks(&root);
    println!("fixtures written to {}", root.display());
}
