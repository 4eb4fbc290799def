//! Simulated moments, variances and access frequencies next to their closed
//! forms, with z-scores from batch-means standard errors.

use std::time::Instant;

use hetnet_meta::sim::{self, SimConfig};
use hetnet_meta::{from_db, NetworkConfig};

fn main() -> hetnet_meta::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let net = NetworkConfig::two_tier(4.0, 5.0, 0.2, 10.0)?;
    let cfg = SimConfig::new(net, n, 2024)?;
    let thetas: Vec<f64> = [-10.0, 0.0, 10.0].iter().map(|&d| from_db(d)).collect();

    let start = Instant::now();
    let stats = sim::run_simulation(&cfg, &thetas, &[1.0, 2.0], &[0.5, 0.9])?;
    println!(
        "{} realizations, window radius {:.2}, {:.2?}",
        stats.n_realizations,
        stats.window_radius,
        start.elapsed()
    );

    println!("{:>8} {:>8} {:>7} {:>10} {:>10} {:>9} {:>6}", "theta", "scope", "qty", "analytic", "empirical", "se", "z");
    for c in sim::compare_with_analytics(&cfg, &stats)? {
        println!(
            "{:>8.3} {:>8} {:>7} {:>10.6} {:>10.6} {:>9.2e} {:>6.2}",
            c.theta,
            c.scope.to_string(),
            c.quantity,
            c.analytic,
            c.empirical,
            c.std_error,
            c.z
        );
    }
    Ok(())
}
