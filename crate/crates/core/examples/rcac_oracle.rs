//! Recursive gains against the batch minimizer on a random sequence.
use adaptive_autopilot::linearize::FirFilter;
use adaptive_autopilot::rcac::{batch_minimizer, rcac_update, RcacConfig, RcacState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> adaptive_autopilot::Result<()> {
    let cfg = RcacConfig {
        n_c: 2,
        r_u: 0.3,
        r_theta: 1.0,
        ..Default::default()
    };
    let filter = FirFilter::new(vec![(1, 1.0), (2, -0.4)])?;
    let mut state = RcacState::new(&cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut history = Vec::new();
    for k in 0..20 {
        history.push(rcac_update(&mut state, &cfg, rng.gen_range(-1.0..1.0), &filter)?);
        let batch = batch_minimizer(&history, &cfg)?;
        let rel = (state.theta() - &batch).norm() / batch.norm().max(1e-300);
        println!(
            "k = {k:>2}  |theta| = {:.6}  relative gap to batch = {rel:.2e}",
            state.theta().norm()
        );
    }
    Ok(())
}
