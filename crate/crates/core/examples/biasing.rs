//! How the tier-2 bias moves the overall mean and variance of the link
//! reliability, and where the per-tier means cross.

use hetnet_meta::{analytics, from_db, NetworkConfig};

fn main() -> hetnet_meta::Result<()> {
    let net = NetworkConfig::two_tier(4.0, 4.0, 0.2, 1.0)?;
    let grid = [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];
    for db in [-10.0, 0.0, 10.0] {
        let r = analytics::biasing_diagnostics(&net, from_db(db), &grid)?;
        println!(
            "theta {db:>5} dB: dM1/dB2 = {:.1e}, dV/dB2 = {:.1e}, d2M1/dB2^2 = {:.4}, d2V/dB2^2 = {:.4}, tier ordering consistent: {}",
            r.dm1_db2, r.dv_db2, r.d2m1_db2, r.d2v_db2, r.ordering_consistent
        );
        for p in &r.curve {
            println!(
                "    B2 = {:>6}: M1 {:.5}  V {:.5}  M1|(1) {:.5}  M1|(2) {:.5}",
                p.relative_bias, p.m1, p.variance, p.m1_tier1, p.m1_tier2
            );
        }
    }

    println!("\ntier-2 limits as B2 grows (lambda2 = 5)");
    let base = NetworkConfig::two_tier(4.0, 5.0, 0.2, 1.0)?;
    for db in [-10.0, 0.0, 10.0, 20.0] {
        let theta = from_db(db);
        let lim = analytics::asymptotic_closed_access(&base, theta)?;
        let far = analytics::two_tier_moments(&base.with_bias(1, 1e4)?, theta)?;
        println!(
            "  theta {db:>4} dB: M1|(2) {:.5} -> limit {:.5};  V|(2) {:.5} -> limit {:.5}",
            far.m1[1], lim.m1_tier2, far.variance[1], lim.variance_tier2
        );
    }
    Ok(())
}
