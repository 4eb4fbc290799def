mod common;

use common::fig1;
use hetnet_meta::analytics::{self, Scope};
use hetnet_meta::meta;
use hetnet_meta::sim::{self, SimConfig};
use hetnet_meta::{NetworkConfig, TierParams};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let cfg = SimConfig::new(fig1(10.0), 3000, 11).unwrap().with_window_radius(12.0).unwrap();
    let run = || sim::run_simulation(&cfg, &[0.5, 2.0], &[1.0, 2.0], &[0.2, 0.8]).unwrap();
    let a = pool(1).install(run);
    let b = pool(3).install(run);
    assert_eq!(a, b);
    let other = SimConfig { rng_seed: 12, ..cfg.clone() };
    let c = sim::run_simulation(&other, &[0.5, 2.0], &[1.0, 2.0], &[0.2, 0.8]).unwrap();
    assert_ne!(a, c);
}

#[test]
fn association_frequencies_match_access_probabilities() {
    for net in [fig1(10.0), fig1(0.1)] {
        let cfg = SimConfig::new(net.clone(), 100_000, 3).unwrap().with_window_radius(3.0).unwrap();
        let stats = sim::run_simulation(&cfg, &[1.0], &[], &[]).unwrap();
        for a in &stats.access {
            let want = net.access_probability(a.tier).unwrap();
            let z = (a.estimate.value - want) / a.estimate.std_error;
            assert!(z.abs() < 3.0, "tier {}: {} vs {want}", a.tier, a.estimate.value);
        }
    }
}

#[test]
fn identical_tiers_split_users_evenly() {
    let net = NetworkConfig::new(4.0, vec![TierParams::new(2.0, 1.0, 1.0); 2]).unwrap();
    let cfg = SimConfig::new(net, 40_000, 5).unwrap().with_window_radius(3.0).unwrap();
    let stats = sim::run_simulation(&cfg, &[1.0], &[], &[]).unwrap();
    for a in &stats.access {
        assert!(((a.estimate.value - 0.5) / a.estimate.std_error).abs() < 3.0);
    }
}

#[test]
fn moments_agree_with_analysis() {
    for (b2, seed) in [(0.1, 9), (10.0, 10)] {
        let cfg = SimConfig::new(fig1(b2), 10_000, seed).unwrap();
        let stats = sim::run_simulation(&cfg, &[0.1, 1.0, 10.0], &[1.0, 2.0, 3.0], &[]).unwrap();
        let rows = sim::compare_with_analytics(&cfg, &stats).unwrap();
        assert_eq!(rows.len(), 2 + 3 * 3 * 4);
        for r in &rows {
            assert!(r.z.abs() < 3.0, "B₂={b2} {} {} θ={}: z={}", r.quantity, r.scope, r.theta, r.z);
        }
        for s in &stats.scopes {
            assert!(s.moment(2.0).unwrap().value >= s.moment(1.0).unwrap().value.powi(2));
        }
    }
}

#[test]
fn first_moment_agrees_with_analysis() {
    let net = fig1(1.0);
    let cfg = SimConfig::new(net.clone(), 20_000, 9).unwrap();
    let stats = sim::run_simulation(&cfg, &[1.0], &[1.0], &[]).unwrap();
    let o = stats.get(Scope::Overall, 1.0).unwrap();
    let want = analytics::moment_overall(&net, 1.0, 1.0.into()).unwrap().value.re;
    assert!((o.moment(1.0).unwrap().value - want).abs() < 3.0 * o.moment(1.0).unwrap().std_error);
}

#[test]
fn doubling_the_window_changes_little() {
    let net = fig1(10.0);
    let r = sim::default_window_radius(&net, 1.0).unwrap();
    let a = SimConfig::new(net.clone(), 20_000, 21).unwrap().with_window_radius(r).unwrap();
    let b = a.clone().with_window_radius(2.0 * r).unwrap();
    let ma = sim::run_simulation(&a, &[1.0], &[1.0], &[]).unwrap();
    let mb = sim::run_simulation(&b, &[1.0], &[1.0], &[]).unwrap();
    let ea = ma.get(Scope::Overall, 1.0).unwrap().moment(1.0).unwrap();
    let eb = mb.get(Scope::Overall, 1.0).unwrap().moment(1.0).unwrap();
    // same seed, so the inner points coincide and the difference is far below the noise
    assert!((ea.value - eb.value).abs() < ea.std_error);
}

#[test]
fn window_heuristic_meets_its_bound() {
    let net = fig1(10.0);
    let r1 = sim::default_window_radius(&net, 1.0).unwrap();
    let r10 = sim::default_window_radius(&net, 10.0).unwrap();
    assert!(r10 >= r1);
    assert!(r1 * r1 * std::f64::consts::PI * 1.0 >= sim::MIN_POINTS_SPARSEST);
    assert!(sim::default_window_radius(&net, 0.0).is_err());
}

#[test]
fn single_tier_ccdf_agrees_with_inversion() {
    let net = NetworkConfig::single_tier(4.0).unwrap();
    let cfg = SimConfig::new(net.clone(), 10_000, 17).unwrap();
    let t = [0.2, 0.5, 0.8];
    let stats = sim::run_simulation(&cfg, &[1.0], &[], &t).unwrap();
    let e = stats.get(Scope::Overall, 1.0).unwrap();
    let exact = meta::gil_pelaez_ccdf(&net, Scope::Overall, 1.0, &t).unwrap();
    for k in 0..t.len() {
        let z = (e.ccdf[k] - exact.ccdf[k]) / e.ccdf_std_error[k];
        assert!(z.abs() < 3.0, "t={}: {} vs {}", t[k], e.ccdf[k], exact.ccdf[k]);
    }
}

#[test]
fn aloha_simulation_agrees_with_series() {
    let cfg = SimConfig::new(fig1(10.0), 20_000, 4)
        .unwrap()
        .with_window_radius(20.0)
        .unwrap()
        .with_activity(vec![0.5, 0.3])
        .unwrap();
    let stats = sim::run_simulation(&cfg, &[0.5, 2.0], &[1.0], &[]).unwrap();
    for r in sim::compare_with_analytics(&cfg, &stats).unwrap() {
        assert!(r.z.abs() < 3.5, "{} {} θ={}: z={}", r.quantity, r.scope, r.theta, r.z);
    }
    assert!(SimConfig::new(fig1(10.0), 10, 1).unwrap().with_activity(vec![0.5]).is_err());
}

#[test]
fn realizations_are_reproducible() {
    let cfg = SimConfig::new(fig1(10.0), 10, 8).unwrap().with_window_radius(6.0).unwrap();
    let a = sim::sample_realization(&cfg, 3).unwrap();
    let b = sim::sample_realization(&cfg, 3).unwrap();
    assert_eq!(a, b);
    assert!(a.points.iter().all(|p| p.position[0].hypot(p.position[1]) <= 6.0));
    let s = &a.points[a.serving];
    assert_eq!(s.tier, a.serving_tier);
    assert!((s.position[0].hypot(s.position[1]) - a.serving_distance).abs() < 1e-12);
    // the serving station maximizes the biased received power
    let t = cfg.network.tiers();
    let biased = |p: &sim::BsPoint| t[p.tier].power * t[p.tier].bias * p.position[0].hypot(p.position[1]).powf(-4.0);
    assert!(a.points.iter().all(|p| biased(p) <= biased(s)));
    let ps = sim::conditional_success_prob(&a, &cfg.network, 1.0, None).unwrap();
    assert!(ps > 0.0 && ps <= 1.0);
}

#[test]
fn raw_dump_has_one_row_per_draw_and_threshold() {
    let cfg = SimConfig::new(fig1(10.0), 50, 2).unwrap().with_window_radius(6.0).unwrap();
    let (stats, raw) = sim::run_simulation_with_raw(&cfg, &[0.5, 1.0, 2.0], &[1.0], &[], true).unwrap();
    assert_eq!(raw.len(), 150);
    assert!(raw.iter().all(|r| r.tier == 1 || r.tier == 2));
    let mean = raw.iter().filter(|r| r.theta == 1.0).map(|r| r.ps).sum::<f64>() / 50.0;
    assert!((mean - stats.get(Scope::Overall, 1.0).unwrap().moment(1.0).unwrap().value).abs() < 1e-12);
    let mut buf = Vec::new();
    sim::write_raw_csv(&raw, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("index,tier,theta,ps\n"));
    assert_eq!(text.lines().count(), 151);
}

#[test]
fn invalid_runs_are_rejected() {
    let cfg = SimConfig::new(fig1(10.0), 10, 1).unwrap();
    assert!(sim::run_simulation(&cfg, &[], &[1.0], &[]).is_err());
    assert!(sim::run_simulation(&cfg, &[-1.0], &[1.0], &[]).is_err());
    assert!(sim::run_simulation(&cfg, &[1.0], &[1.0], &[1.5]).is_err());
    assert!(SimConfig::new(fig1(10.0), 0, 1).is_err());
    assert!(cfg.with_window_radius(0.0).is_err());
}
