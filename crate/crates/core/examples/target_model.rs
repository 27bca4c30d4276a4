//! Linearizes the airframe at the step-scenario start and builds the adaptive target filter.
use adaptive_autopilot::airframe::{MissileParams, MissileState};
use adaptive_autopilot::linearize::{
    airframe_model, build_gf, markov_parameters, nmp_zeros, transmission_zeros, FilterOptions, StateSet,
};

fn main() -> adaptive_autopilot::Result<()> {
    let state = MissileState {
        mach: 2.5,
        gamma: 45f64.to_radians(),
        theta: 45f64.to_radians(),
        h: 3500.0,
        ..Default::default()
    };
    let t_s = 0.005;
    for states in [StateSet::Full, StateSet::ShortPeriod] {
        let model = airframe_model(&state, 3800.0, 0.0, &MissileParams::default(), states)?;
        let zeros = transmission_zeros(&model)?;
        println!("{states:?}: {} states", model.order());
        for z in &zeros {
            println!("  zero {:+.4} {:+.4}i", z.re, z.im);
        }
        let h = markov_parameters(&model, t_s, 3);
        println!("  first Markov parameters {:.4e} {:.4e} {:.4e}", h[0], h[1], h[2]);
        let opts = FilterOptions::default();
        println!(
            "  filtered zeros {:?}",
            nmp_zeros(&zeros, opts).iter().map(|z| z.re).collect::<Vec<_>>()
        );
        let gf = build_gf(&zeros, &model, t_s, opts)?;
        for (lag, c) in gf.taps() {
            println!("  G_f tap q^-{lag}: {c:+.6}");
        }
    }
    Ok(())
}
