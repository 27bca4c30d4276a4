//! Miss distance as the fin-deflection and angle-of-attack coefficients are scaled.
use adaptive_autopilot::scenario::{run_scenario, ScenarioConfig, ScenarioKind, SweepTarget};

fn main() -> adaptive_autopilot::Result<()> {
    let mut cfg = ScenarioConfig::new(ScenarioKind::Sweep);
    cfg.sweep.target = SweepTarget::AlphaX;
    let report = run_scenario(&cfg)?;
    for run in &report.summary.runs {
        let point = run.sweep.as_ref().expect("sweep run");
        match run.miss_distance_m {
            Some(m) => println!(
                "{:<16} {:>5} {:<9} miss {m:.4} m",
                point.parameter,
                point.factor,
                format!("{:?}", run.variant)
            ),
            None => println!(
                "{:<16} {:>5} {:<9} failed: {}",
                point.parameter,
                point.factor,
                format!("{:?}", run.variant),
                run.error.as_deref().unwrap_or("")
            ),
        }
    }
    Ok(())
}
