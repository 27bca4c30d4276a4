//! Tracking a 10g sinusoid and writing the trajectories as CSV.
use std::path::PathBuf;

use adaptive_autopilot::scenario::{run_scenario, write_report, ScenarioConfig, ScenarioKind};

fn main() -> adaptive_autopilot::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("harmonic"));
    let cfg = ScenarioConfig::new(ScenarioKind::Harmonic);
    let report = run_scenario(&cfg)?;
    write_report(&report, &out)?;
    for run in &report.summary.runs {
        println!(
            "{:<18} mean |z| = {:.3} m/s^2, max |q_dot| = {:.3} rad/s^2",
            run.label, run.mean_abs_z_m_s2, run.max_abs_q_dot_rad_s2
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
