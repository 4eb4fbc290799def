//! Random activity of interferers: moments, mean local delay and the
//! two-tier activity region in which the delay of each tier stays finite.

use hetnet_meta::aloha::{self, AlohaConfig, SeriesTruncation};
use hetnet_meta::{analytics, NetworkConfig, Scope};

fn main() -> hetnet_meta::Result<()> {
    let net = NetworkConfig::two_tier(4.0, 25.0, 0.005, 10.0)?;
    let trunc = SeriesTruncation::default();

    for tier in 0..2 {
        println!("delay phase threshold, tier {}: {:.4}", tier + 1, analytics::delay_phase_threshold(&net, tier)?);
    }

    let full = AlohaConfig::new(net.clone(), vec![1.0, 1.0])?;
    let half = full.with_activity(vec![0.5, 0.5])?;
    println!("\n{:>6} {:>12} {:>12} {:>12}", "theta", "M1 (p=1)", "M1 closed", "M1 (p=.5)");
    for theta in [0.1, 1.0, 10.0] {
        println!(
            "{theta:>6} {:>12.8} {:>12.8} {:>12.8}",
            aloha::aloha_moment(&full, Scope::Overall, theta, 1.0.into(), &trunc)?.value.re,
            analytics::moment(&net, Scope::Overall, theta, 1.0.into())?.value.re,
            aloha::aloha_moment(&half, Scope::Overall, theta, 1.0.into(), &trunc)?.value.re,
        );
    }

    println!("\nmean local delay at p = (0.5, 0.5)");
    for theta in [0.1, 0.5, 1.0, 5.0] {
        println!(
            "theta {theta:>4}: tier1 {:?}, tier2 {:?}",
            aloha::aloha_mean_local_delay(&half, 0, theta)?,
            aloha::aloha_mean_local_delay(&half, 1, theta)?
        );
    }

    for theta in [0.1, 1.0, 4.0] {
        println!("\ntheta = {theta}");
        for tier in 0..2 {
            let exact = aloha::region_boundary_exact(&net, tier, theta, 201)?;
            let lower = aloha::region_boundary_lower(&net, tier, theta, 201)?;
            let area: f64 = exact.heights.iter().sum::<f64>() / exact.heights.len() as f64;
            println!(
                "  S{}: full {} area {:.4}, lower bound inside {}, max gap {:.4}",
                tier + 1,
                exact.full_cube,
                area,
                lower.is_inside(&exact, 1e-12),
                exact.gap(&lower)?
            );
        }
        let s = aloha::intersection_region(&net, theta, 201)?;
        let s2 = aloha::region_boundary_exact(&net, 1, theta, 201)?;
        println!("  S equals S2: {}", s.heights == s2.heights);
        for p in s.points.iter().step_by(40) {
            println!("    ({:.3}, {:.6})", p.0, p.1);
        }
    }
    Ok(())
}
