mod common;

use common::{fig1, hyp2f1_oracle, moment_tier_oracle};
use hetnet_meta::gains::{self, GainRegime};
use hetnet_meta::{to_db, Complex64, NetworkConfig, TierParams};

fn gdb(g: Complex64) -> f64 {
    to_db(g.re)
}

#[test]
fn reference_gains() {
    let n = fig1(10.0);
    let want = [
        // tier, order, G₀ dB, G∞ dB
        (0, 1.0, 6.7467, 7.9383),
        (1, 1.0, -3.2533, -2.0617),
        (0, 2.0, 3.7364, 4.4164),
        (1, 2.0, -6.2636, -5.5836),
    ];
    for (tier, b, g0, ginf) in want {
        let s = gains::gain_set(&n, tier, b.into()).unwrap();
        assert!((s.g0_db.unwrap() - g0).abs() < 5e-4, "tier {tier} b={b}: {:?}", s.g0_db);
        assert!((s.ginf_db.unwrap() - ginf).abs() < 5e-4, "tier {tier} b={b}: {:?}", s.ginf_db);
    }
}

#[test]
fn equal_biases_give_no_gain() {
    let n = NetworkConfig::new(
        3.0,
        vec![TierParams::new(1.0, 1.0, 2.0), TierParams::new(7.0, 0.01, 2.0), TierParams::new(0.5, 3.0, 2.0)],
    )
    .unwrap();
    for i in 0..3 {
        let s = gains::gain_set(&n, i, 1.0.into()).unwrap();
        assert!(s.g0_db.unwrap().abs() < 1e-12);
        assert!(s.ginf_db.unwrap().abs() < 1e-12);
    }
}

#[test]
fn offloading_helps_the_donor_tier() {
    for b2 in [2.0, 10.0, 100.0] {
        let n = fig1(b2);
        for g in [gains::gain_zero, gains::gain_infinity] {
            assert!(g(&n, 0, 1.0.into()).unwrap().re > 1.0);
            assert!(g(&n, 1, 1.0.into()).unwrap().re < 1.0);
        }
    }
}

#[test]
fn order_scaling_and_views() {
    let n = fig1(10.0);
    for i in 0..2 {
        for b in [0.5, 1.0, 3.0] {
            let g = gains::gain_zero(&n, i, b.into()).unwrap();
            let g2 = gains::gain_zero(&n, i, (2.0 * b).into()).unwrap();
            assert!((g2 * 2.0 - g).norm() < 1e-14 * g.norm());
        }
    }
    // the two tiers see reciprocal bias ratios
    let d = gdb(gains::gain_zero(&n, 0, 1.0.into()).unwrap()) - gdb(gains::gain_zero(&n, 1, 1.0.into()).unwrap());
    assert!((d - 10.0).abs() < 1e-12);
    let c = gains::gain_set(&n, 0, Complex64::new(1.0, 2.0)).unwrap();
    assert!(c.g0_db.is_none() && c.ginf_db.is_none());
    assert!(gains::gain_zero(&n, 0, 0.0.into()).is_err());
    assert!(gains::gain_zero(&n, 3, 1.0.into()).is_err());
}

#[test]
fn gains_are_limit_ratios() {
    // θ → 0: 1 - M_{b|(i)}(θ) ≈ κθ/G₀
    let n = fig1(10.0);
    let delta = 0.5;
    let kappa = delta / (1.0 - delta);
    for i in 0..2 {
        for b in [1.0, 2.0] {
            let theta = 1e-4;
            let m = moment_tier_oracle(n.tiers(), 4.0, i, theta, b.into()).re;
            let g0 = gains::gain_zero(&n, i, b.into()).unwrap().re;
            let ratio = (1.0 - m) / (kappa * theta / g0);
            assert!((ratio - 1.0).abs() < 0.01, "tier {i} b={b}: {ratio}");
        }
    }
    // θ → ∞: M_{b|(i)}(θ) ≈ M_{1,PPP}(θ/G∞)
    for i in 0..2 {
        for b in [1.0, 2.0] {
            let theta = 1e6;
            let m = moment_tier_oracle(n.tiers(), 4.0, i, theta, b.into()).re;
            let ginf = gains::gain_infinity(&n, i, b.into()).unwrap().re;
            let ppp = 1.0 / hyp2f1_oracle(1.0.into(), delta, theta / ginf).re;
            assert!((m / ppp - 1.0).abs() < 0.01, "tier {i} b={b}: {}", m / ppp);
        }
    }
}

#[test]
fn shifted_approximation_errors() {
    let n = fig1(10.0);
    for i in 0..2 {
        let lo = gains::shifted_moment_approx(&n, i, 1.0, 1e-3).unwrap();
        assert_eq!(lo.regime, GainRegime::Low);
        assert!(lo.rel_error < 0.01, "tier {i}: {}", lo.rel_error);
        let hi = gains::shifted_moment_approx(&n, i, 1.0, 1e3).unwrap();
        assert_eq!(hi.regime, GainRegime::High);
        assert!(hi.rel_error < 0.05, "tier {i}: {}", hi.rel_error);
        assert!((hi.exact - moment_tier_oracle(n.tiers(), 4.0, i, 1e3, 1.0.into()).re).abs() < 1e-8 * hi.exact);
    }
    assert!(gains::shifted_moment_approx(&n, 0, -1.0, 1.0).is_err());
    assert!(gains::shifted_moment_approx_in(&n, 0, 1.0, 0.0, GainRegime::Low).is_err());
}

#[test]
fn variance_shift_limits() {
    let n = fig1(10.0);
    let grid: Vec<f64> = (-40..=40).map(|k| k as f64).collect();
    for i in 0..2 {
        let r = gains::variance_shift_check(&n, i, &grid).unwrap();
        let (g0, ginf) = gains::variance_gains(&n, i).unwrap();
        assert!((r.g0_db - to_db(g0)).abs() < 1e-12 && (r.ginf_db - to_db(ginf)).abs() < 1e-12);
        // at the low end the measured shift approaches the exact small-θ limit
        let first = r.points.first().unwrap();
        assert!((first.measured_shift_db.unwrap() - r.low_theta_limit_db).abs() < 0.05);
        // at the high end it approaches G∞
        let last = r.points.last().unwrap();
        assert!((last.measured_shift_db.unwrap() - r.ginf_db).abs() < 0.05);
        assert!(r.low_theta_limit_db < r.g0_db + 1e-12);
    }
    // equal biases: every shift limit coincides with G₀
    let eq = fig1(1.0);
    let r = gains::variance_shift_check(&eq, 0, &[-40.0]).unwrap();
    assert!((r.low_theta_limit_db - r.g0_db).abs() < 1e-12);
}
