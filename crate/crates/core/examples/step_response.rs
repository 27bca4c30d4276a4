//! Fixed and adaptive autopilots tracking a 10g step, nominal and with gains cut to 20%.
use adaptive_autopilot::scenario::{run_scenario, ScenarioConfig, ScenarioKind};

fn main() -> adaptive_autopilot::Result<()> {
    for alpha in [1.0, 0.2] {
        let mut cfg = ScenarioConfig::new(ScenarioKind::Step);
        cfg.autopilot.alpha_tla = alpha;
        let report = run_scenario(&cfg)?;
        for (run, traj) in report.summary.runs.iter().zip(&report.trajectories) {
            let trace: Vec<String> = traj
                .records
                .iter()
                .step_by(200)
                .map(|r| format!("{:.2}", r.imu.a_z / 9.80665))
                .collect();
            println!(
                "alpha_tla {alpha} {:<14} a_z/g every 1 s: {}",
                run.label,
                trace.join(" ")
            );
            if let Some(e) = &run.error {
                println!("  stopped at t = {:.2} s: {e}", run.end_time_s);
            }
        }
    }
    Ok(())
}
