//! Access probabilities and per-tier moments of a two-tier network for three
//! bias settings, including the mean local delay and its phase transition.

use hetnet_meta::{analytics, from_db, NetworkConfig, Scope};

fn main() -> hetnet_meta::Result<()> {
    for b2 in [0.1, 1.0, 10.0] {
        let net = NetworkConfig::two_tier(4.0, 5.0, 0.2, b2)?;
        let pa = net.access_probabilities();
        println!("B2 = {b2}: access probabilities {:.4} / {:.4}", pa[0], pa[1]);
        println!("  {:>8} {:>9} {:>9} {:>9} {:>9} {:>9}", "theta_dB", "M1", "M1|(1)", "M1|(2)", "V|(1)", "V|(2)");
        for db in [-10.0, 0.0, 10.0] {
            let theta = from_db(db);
            let m = analytics::two_tier_moments(&net, theta)?;
            println!(
                "  {db:>8} {:>9.5} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
                m.m1_overall, m.m1[0], m.m1[1], m.variance[0], m.variance[1]
            );
        }
        for tier in 0..2 {
            let tc = analytics::delay_phase_threshold(&net, tier)?;
            println!(
                "  tier {} mean local delay: finite below theta = {tc:.4} (at 0.9x: {:?})",
                tier + 1,
                analytics::mean_local_delay_tier(&net, tier, 0.9 * tc)?
            );
        }
    }

    // an imaginary order, as used by the inversion of the meta distribution
    let net = NetworkConfig::two_tier(4.0, 5.0, 0.2, 10.0)?;
    let m = analytics::moment(&net, Scope::Overall, 1.0, hetnet_meta::Complex64::new(0.0, 5.0))?;
    println!("\nM_(5j) overall at 0 dB: {:.6}", m.value);
    Ok(())
}
