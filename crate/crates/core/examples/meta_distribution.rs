//! Exact and beta-approximated meta distributions of a biased two-tier
//! network at θ = 0 dB, with the 5% user of each population.

use std::time::Instant;

use hetnet_meta::meta::{self, GilPelaezOptions};
use hetnet_meta::{analytics, NetworkConfig, Scope};

fn main() -> hetnet_meta::Result<()> {
    let net = NetworkConfig::two_tier(4.0, 5.0, 0.2, 10.0)?;
    let theta = 1.0;
    let grid = meta::default_reliability_grid();
    let scopes = [Scope::Overall, Scope::Tier(0), Scope::Tier(1)];

    let start = Instant::now();
    let exact = meta::gil_pelaez_ccdf_with(&net, &scopes, theta, &grid, &GilPelaezOptions::default())?;
    println!("inversion of {} scopes took {:.2?}", scopes.len(), start.elapsed());

    println!("{:>8} {:>10} {:>10} {:>10} {:>10} {:>10}", "scope", "M1", "mean(F)", "sup|gap|", "5% exact", "5% beta");
    for curve in &exact {
        let (_, beta) = meta::beta_curve(&net, curve.scope, theta, &grid)?;
        let m1 = analytics::moment(&net, curve.scope, theta, 1.0.into())?.value.re;
        println!(
            "{:>8} {:>10.6} {:>10.6} {:>10.6} {:>10.4} {:>10.4}",
            curve.scope.to_string(),
            m1,
            curve.mean(),
            meta::sup_gap(curve, &beta)?,
            meta::percentile_user(curve, 0.05)?.reliability,
            meta::percentile_user(&beta, 0.05)?.reliability,
        );
        println!(
            "         clip violation {:.1e}, repaired {}, conjugate residue {:.1e}",
            curve.max_clip_violation, curve.monotone_repaired, curve.conjugate_residue
        );
    }
    Ok(())
}
