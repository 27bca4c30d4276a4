//! Pursuit of a climbing evader by the ideal, fixed-gain and adaptive pursuers.
use adaptive_autopilot::autopilot::{scale_gains, TlaGains};
use adaptive_autopilot::guidance::{run_engagement, EngagementSetup, PursuerKind};

fn main() {
    for alpha in [1.0, 0.2] {
        let mut setup = EngagementSetup::default();
        setup.controller.gains = scale_gains(&TlaGains::default(), alpha);
        for kind in [PursuerKind::Ideal, PursuerKind::Fixed, PursuerKind::Adaptive] {
            match run_engagement(&setup, kind) {
                Ok(r) => println!(
                    "alpha_tla {alpha} {kind:?}: miss {:.3} m at t = {:.3} s",
                    r.miss_distance, r.flight_time
                ),
                Err(e) => {
                    let closest = e
                        .trajectory
                        .records
                        .iter()
                        .filter_map(|r| r.engagement.map(|g| g.range))
                        .fold(f64::INFINITY, f64::min);
                    println!(
                        "alpha_tla {alpha} {kind:?}: lost at t = {:.3} s (closest {closest:.1} m): {}",
                        e.t, e.error
                    );
                }
            }
        }
    }
}
