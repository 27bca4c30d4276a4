//! Particle swarm on a test function, then a short hyperparameter search on the training command.
use adaptive_autopilot::pso::{optimize, PsoConfig};
use adaptive_autopilot::scenario::{run_scenario, ScenarioConfig, ScenarioKind};

fn main() -> adaptive_autopilot::Result<()> {
    let sphere = |x: &[f64]| (x[0] - 1.5).powi(2) + (x[1] + 2.0).powi(2);
    let r = optimize(
        sphere,
        &PsoConfig {
            swarm_size: 30,
            iterations: 100,
            bounds: vec![(-10.0, 10.0); 2],
            seed: 7,
            ..Default::default()
        },
    )?;
    println!(
        "sphere minimum near ({:.5}, {:.5}), cost {:.2e}",
        r.best_position[0], r.best_position[1], r.best_cost
    );

    let mut cfg = ScenarioConfig::new(ScenarioKind::Tune);
    cfg.tune.swarm_size = 4;
    cfg.tune.iterations = 3;
    cfg.simulation.duration_s = Some(5.0);
    cfg.seed = 11;
    let report = run_scenario(&cfg)?;
    let t = report.summary.tune.expect("tuning summary");
    for it in &t.history {
        println!(
            "iteration {:>2}: best cost {:.9} at {:?}",
            it.iteration, it.best_cost, it.best_position
        );
    }
    println!("best r_u {:.5}, log10 r_theta {:.4}", t.best_r_u, t.best_log10_r_theta);
    Ok(())
}
