//! Regenerates `golden/` and records the code-executor fixtures the golden
//! runs need.
//!
//! cargo run -p agentx-engine --example gen_golden

use agentx_engine::golden::{code_sources, golden_root, script, GoldenCase};
use agentx_toolpack::code::{record, run_live, source_key, CodeConfig, CodeMode};
use agentx_toolpack::default_fixture_root;
use agentx_toolpack::fixtures::FixtureSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fx = FixtureSet::new(default_fixture_root());
    let root = golden_root();
    let code_cfg = CodeConfig {
        mode: CodeMode::Record,
        ..CodeConfig::default()
    };
    let mut recorded = 0;
    for case in GoldenCase::all() {
        let path = case.path(&root);
        std::fs::create_dir_all(
            path.parent()
                .expect("golden files live in a pattern directory"),
        )?;
        std::fs::write(&path, script(&case, &fx)?.to_json_pretty() + "\n")?;
        for code in code_sources(&case, &fx)? {
            if fx
                .path("code_executor", &format!("{}.json", source_key(&code)))
                .exists()
            {
                continue;
            }
            let ws = tempfile::tempdir()?;
            let exec = run_live(&code_cfg, ws.path(), &code)?;
            record(&fx, &code, &exec)?;
            recorded += 1;
        }
    }
    println!(
        "wrote {} scripts, recorded {recorded} executions",
        GoldenCase::all().len()
    );
    Ok(())
}
