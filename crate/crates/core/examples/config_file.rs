//! Runs a scenario described by a JSON file, as the command-line tool does.
use std::path::PathBuf;

use adaptive_autopilot::scenario::{load_config, parse_config, run_scenario, to_json, write_report};

const SAMPLE: &str = r#"{
  "scenario": "step",
  "variants": ["fixed"],
  "autopilot": { "alpha_tla": 0.5 },
  "simulation": { "sample_time_s": 0.005, "duration_s": 4.0 }
}"#;

fn main() -> adaptive_autopilot::Result<()> {
    let cfg = match std::env::args().nth(1) {
        Some(path) => load_config(&PathBuf::from(path))?,
        None => parse_config(SAMPLE)?,
    };
    println!("{}", to_json(&cfg));
    let report = run_scenario(&cfg)?;
    let out = std::env::temp_dir().join("config_file_example");
    write_report(&report, &out)?;
    println!("{} run(s) written to {}", report.summary.runs.len(), out.display());
    Ok(())
}
