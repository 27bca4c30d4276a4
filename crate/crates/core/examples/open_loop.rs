//! Uncontrolled flight from the step-scenario initial condition with the fins held at zero.
use adaptive_autopilot::airframe::{evaluate, MissileParams, MissileState};
use adaptive_autopilot::simcore::{integrate_interval, IntegratorConfig};

fn main() -> adaptive_autopilot::Result<()> {
    let p = MissileParams::default();
    let mut y = MissileState {
        mach: 2.5,
        gamma: 45f64.to_radians(),
        theta: 45f64.to_radians(),
        h: 3500.0,
        ..Default::default()
    }
    .to_array()
    .to_vec();
    let mut rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let e = evaluate(&MissileState::from_slice(y), 3800.0, 0.0, &p)?;
        dy.copy_from_slice(&e.derivative.to_array());
        Ok(())
    };
    println!("{:>5} {:>7} {:>9} {:>9} {:>9}", "t", "mach", "alpha", "h", "a_z/g");
    for k in 0..=10 {
        let t = k as f64;
        if k > 0 {
            y = integrate_interval(&mut rhs, &y, t - 1.0, t, &IntegratorConfig::default())?;
        }
        let s = MissileState::from_slice(&y);
        let e = evaluate(&s, 3800.0, 0.0, &p)?;
        println!(
            "{t:>5.1} {:>7.3} {:>9.4} {:>9.1} {:>9.3}",
            s.mach,
            s.theta - s.gamma,
            s.h,
            e.imu.a_z / 9.80665
        );
    }
    Ok(())
}
