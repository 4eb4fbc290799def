use hetnet_meta::aloha::{self, AlohaConfig, SeriesTruncation};
use hetnet_meta::analytics::{self, Scope};
use hetnet_meta::meta;
use hetnet_meta::sim::{self, SimConfig};
use hetnet_meta::specfun::{self, PathLoss};
use hetnet_meta::{from_db, gains, to_db, Complex64, NetworkConfig, TierParams};
use proptest::prelude::*;

fn tier() -> impl Strategy<Value = TierParams> {
    (0.05f64..20.0, 0.001f64..10.0, 0.05f64..20.0).prop_map(|(l, p, b)| TierParams::new(l, p, b))
}

fn network(max_tiers: usize) -> impl Strategy<Value = NetworkConfig> {
    (2.2f64..6.0, prop::collection::vec(tier(), 1..=max_tiers)).prop_map(|(a, t)| NetworkConfig::new(a, t).unwrap())
}

fn two_tier() -> impl Strategy<Value = NetworkConfig> {
    (2.5f64..5.0, tier(), tier()).prop_map(|(a, x, y)| NetworkConfig::new(a, vec![x, y]).unwrap())
}

fn theta() -> impl Strategy<Value = f64> {
    (-20.0f64..20.0).prop_map(from_db)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hyp2f1_nondecreasing_in_z(b in 0.1f64..6.0, delta in 0.2f64..0.9, z in 1e-3f64..1e3, f in 1.0f64..4.0) {
        let pl = PathLoss::from_delta(delta).unwrap();
        let a = specfun::hyp2f1_moment(b.into(), pl, z).unwrap();
        let c = specfun::hyp2f1_moment(b.into(), pl, z * f).unwrap();
        prop_assert!(c.re >= a.re);
        prop_assert!(a.im.abs() <= 1e-12 * a.re);
    }

    #[test]
    fn hyp2f1_conjugate_symmetry(re in -0.5f64..3.0, im in -30.0f64..30.0, delta in 0.2f64..0.9, z in 1e-3f64..1e3) {
        let pl = PathLoss::from_delta(delta).unwrap();
        let b = Complex64::new(re, im);
        let v = specfun::hyp2f1_moment(b, pl, z).unwrap();
        let w = specfun::hyp2f1_moment(b.conj(), pl, z).unwrap();
        prop_assert!((v.conj() - w).norm() <= 1e-12 * v.norm().max(1.0));
    }

    #[test]
    fn access_probabilities_sum_to_one(net in network(5)) {
        let s: f64 = net.access_probabilities().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-13);
        let r = net.ratios();
        for i in 0..net.num_tiers() {
            prop_assert_eq!(r.b_hat[i][i], 1.0);
            for j in 0..net.num_tiers() {
                prop_assert!((r.p_hat[i][j] * r.p_hat[j][i] - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn common_scaling_changes_nothing(net in network(4), sl in 0.01f64..100.0, sp in 0.01f64..100.0, sb in 0.01f64..100.0, th in theta()) {
        let scaled = NetworkConfig::new(
            net.alpha(),
            net.tiers().iter().map(|t| TierParams::new(t.density * sl, t.power * sp, t.bias * sb)).collect(),
        ).unwrap();
        for (a, b) in net.access_probabilities().iter().zip(scaled.access_probabilities()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let m = analytics::moment_overall(&net, th, 1.0.into()).unwrap().value.re;
        let ms = analytics::moment_overall(&scaled, th, 1.0.into()).unwrap().value.re;
        prop_assert!((m - ms).abs() < 1e-10);
    }

    #[test]
    fn moments_ordered_and_bounded(net in network(3), th in theta(), b1 in 0.2f64..4.0, db in 0.05f64..3.0) {
        for i in 0..net.num_tiers() {
            let s = Scope::Tier(i);
            let lo = analytics::moment(&net, s, th, b1.into()).unwrap().value.re;
            let hi = analytics::moment(&net, s, th, (b1 + db).into()).unwrap().value.re;
            prop_assert!(lo > 0.0 && lo <= 1.0);
            prop_assert!(hi <= lo * (1.0 + 1e-12));
            let m1 = analytics::moment(&net, s, th, 1.0.into()).unwrap().value.re;
            let m2 = analytics::moment(&net, s, th, 2.0.into()).unwrap().value.re;
            prop_assert!(m2 >= m1 * m1);
            let later = analytics::moment(&net, s, th * 1.5, 1.0.into()).unwrap().value.re;
            prop_assert!(later < m1);
        }
    }

    #[test]
    fn overall_decomposes_over_tiers(net in network(4), th in theta(), im in -5.0f64..5.0) {
        let b = Complex64::new(1.0, im);
        let o = analytics::moment_overall(&net, th, b).unwrap().value;
        let s: Complex64 = (0..net.num_tiers())
            .map(|i| net.access_probability(i).unwrap() * analytics::moment_tier(&net, i, th, b).unwrap().value)
            .sum();
        prop_assert!((o - s).norm() <= 1e-12 * o.norm().max(1.0));
    }

    #[test]
    fn equal_biases_collapse(alpha in 2.5f64..5.0, tiers in prop::collection::vec((0.05f64..20.0, 0.001f64..10.0), 1..5), bias in 0.1f64..10.0, th in theta()) {
        let net = NetworkConfig::new(alpha, tiers.iter().map(|&(l, p)| TierParams::new(l, p, bias)).collect()).unwrap();
        let single = analytics::moment_overall(&NetworkConfig::single_tier(alpha).unwrap(), th, 1.0.into()).unwrap().value.re;
        for i in 0..net.num_tiers() {
            let m = analytics::moment_tier(&net, i, th, 1.0.into()).unwrap().value.re;
            prop_assert!((m - single).abs() < 1e-12);
        }
    }

    #[test]
    fn small_gain_scales_inversely_with_order(net in network(3), b in 0.1f64..5.0) {
        for i in 0..net.num_tiers() {
            let g = gains::gain_zero(&net, i, b.into()).unwrap();
            let g2 = gains::gain_zero(&net, i, (2.0 * b).into()).unwrap();
            prop_assert!((2.0 * g2 - g).norm() <= 1e-13 * g.norm());
            prop_assert!(g.re > 0.0 && gains::gain_infinity(&net, i, b.into()).unwrap().re > 0.0);
        }
    }

    #[test]
    fn beta_fit_matches_moments(a in 0.1f64..50.0, b in 0.1f64..50.0) {
        let m1 = a / (a + b);
        let m2 = m1 * (a + 1.0) / (a + b + 1.0);
        prop_assume!(m2 - m1 * m1 > 1e-10);
        let fit = meta::beta_fit(m1, m2).unwrap();
        let fm1 = fit.shape_a / (fit.shape_a + fit.shape_b);
        let fm2 = fm1 * (fit.shape_a + 1.0) / (fit.shape_a + fit.shape_b + 1.0);
        prop_assert!((fm1 - m1).abs() < 1e-12 && (fm2 - m2).abs() < 1e-12);
        prop_assert!(fit.shape_a > 0.0 && fit.shape_b > 0.0);
    }

    #[test]
    fn full_activity_is_the_base_model(alpha in 2.5f64..5.0, th in theta(), b in 1usize..=2) {
        let net = NetworkConfig::single_tier(alpha).unwrap();
        let c = AlohaConfig::new(net.clone(), vec![1.0]).unwrap();
        let a = aloha::aloha_moment_tier(&c, 0, th, (b as f64).into(), &SeriesTruncation::default()).unwrap().value.re;
        let f = specfun::hyp2f1_moment((b as f64).into(), net.pathloss(), th).unwrap().re;
        prop_assert!((a - 1.0 / f).abs() < 1e-9 / f);
    }

    #[test]
    fn delay_denominator_monotone(net in two_tier(), th in theta(), p in (0.0f64..1.0, 0.0f64..1.0), dp in 0.0f64..0.5) {
        for i in 0..2 {
            let d = |p1: f64, p2: f64| aloha::delay_denominator(&AlohaConfig::new(net.clone(), vec![p1, p2]).unwrap(), i, th).unwrap();
            let base = d(p.0, p.1);
            let scale = net.weight_sum(i).max(1.0);
            prop_assert!(d((p.0 + dp).min(1.0), p.1) <= base + 1e-12 * scale);
            prop_assert!(d(p.0, (p.1 + dp).min(1.0)) <= base + 1e-12 * scale);
            let lower = aloha::delay_denominator_lower(&AlohaConfig::new(net.clone(), vec![p.0, p.1]).unwrap(), i, th).unwrap();
            prop_assert!(lower <= base + 1e-12 * scale);
        }
    }

    #[test]
    fn aloha_moment_nonincreasing_in_activity(net in two_tier(), th in theta(), p in 0.0f64..0.8, dp in 0.01f64..0.2) {
        let t = SeriesTruncation::default();
        for i in 0..2 {
            let m = |q: f64| aloha::aloha_moment_tier(&AlohaConfig::new(net.clone(), vec![q, p]).unwrap(), i, th, 1.0.into(), &t).unwrap().value.re;
            prop_assert!(m(p + dp) <= m(p) * (1.0 + 1e-10));
        }
    }

    #[test]
    fn serving_station_has_the_strongest_biased_signal(net in two_tier(), seed in any::<u64>(), index in 0u64..1000) {
        let cfg = SimConfig::new(net.clone(), 1, seed).unwrap().with_window_radius(4.0).unwrap();
        let r = sim::sample_realization(&cfg, index).unwrap();
        let t = net.tiers();
        let alpha = net.alpha();
        let score = |p: &sim::BsPoint| t[p.tier].power * t[p.tier].bias * p.position[0].hypot(p.position[1]).powf(-alpha);
        let best = score(&r.points[r.serving]);
        prop_assert!(r.points.iter().all(|p| score(p) <= best));
        let ps = sim::conditional_success_prob(&r, &net, 1.0, None).unwrap();
        prop_assert!(ps > 0.0 && ps <= 1.0);
    }

    #[test]
    fn db_round_trip(x in -80.0f64..80.0) {
        prop_assert!((to_db(from_db(x)) - x).abs() < 1e-12);
    }
}
