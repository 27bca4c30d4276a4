//! Prints the standard atmosphere over the troposphere.
use adaptive_autopilot::environment::isa_at;

fn main() -> adaptive_autopilot::Result<()> {
    println!("{:>8} {:>10} {:>10} {:>10}", "h_m", "T_K", "rho", "a_m_s");
    for h in (0..=11_000).step_by(1000) {
        let s = isa_at(h as f64)?;
        println!(
            "{h:>8} {:>10.2} {:>10.4} {:>10.2}",
            s.temperature, s.density, s.speed_of_sound
        );
    }
    Ok(())
}
