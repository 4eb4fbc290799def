//! Independent numerical oracles for the integration tests. None of these
//! call into the library's quadrature or hypergeometric code.
#![allow(dead_code)]

use std::f64::consts::FRAC_PI_2;

use hetnet_meta::{Complex64, NetworkConfig, TierParams};

/// Tanh-sinh quadrature on [0, 1], halving the step until two levels agree.
/// Tolerates integrable endpoint singularities.
pub fn tanh_sinh(f: impl Fn(f64) -> Complex64) -> Complex64 {
    let t_max = 4.5;
    let eval = |h: f64, odd_only: bool| -> Complex64 {
        let n = (t_max / h).ceil() as i64;
        let mut s = Complex64::new(0.0, 0.0);
        for k in -n..=n {
            if odd_only && k % 2 == 0 {
                continue;
            }
            let t = k as f64 * h;
            let sh = FRAC_PI_2 * t.sinh();
            let ch = FRAC_PI_2 * t.cosh();
            // x and 1 - x without cancellation
            let e = (-2.0 * sh.abs()).exp();
            let small = e / (1.0 + e);
            let (x, _) = if sh < 0.0 { (small, 1.0 - small) } else { (1.0 - small, small) };
            if x <= 0.0 || x >= 1.0 {
                continue;
            }
            let w = ch / (sh.cosh() * sh.cosh()) * 0.5;
            s += f(x) * w;
        }
        s * h
    };
    let mut h = 0.5;
    let mut prev = eval(h, false);
    for _ in 0..9 {
        h *= 0.5;
        let next = prev * 0.5 + eval(h, true);
        if (next - prev).norm() <= 1e-14 * next.norm().max(1e-300) {
            return next;
        }
        prev = next;
    }
    prev
}

fn expm1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-3 {
        w * (1.0 + w / 2.0 * (1.0 + w / 3.0 * (1.0 + w / 4.0)))
    } else {
        w.exp() - 1.0
    }
}

/// `₂F₁(b, -δ; 1-δ; -z) = 1 + ∫₀¹ (1 - (1 + z u^(1/δ))^(-b)) u^(-2) du`.
pub fn hyp2f1_oracle(b: Complex64, delta: f64, z: f64) -> Complex64 {
    1.0 + tanh_sinh(|u| {
        let x = z * u.powf(1.0 / delta);
        -expm1(-b * x.ln_1p()) / (u * u)
    })
}

/// Per-tier interference factor under activity `p`:
/// `1 + ∫₀¹ (1 - (p/(1 + z u^(1/δ)) + 1 - p)^b) u^(-2) du`.
pub fn activity_factor_oracle(b: Complex64, p: f64, delta: f64, z: f64) -> Complex64 {
    1.0 + tanh_sinh(|u| {
        let x = z * u.powf(1.0 / delta);
        let lg = (-p * x / (1.0 + x)).ln_1p();
        -expm1(b * lg) / (u * u)
    })
}

/// `₂F₁(1, 1-δ; 2-δ; -z) = (1-δ) ∫₀¹ t^(-δ) (1 + z t)^(-1) dt`.
pub fn delay_hyp_oracle(delta: f64, z: f64) -> f64 {
    (1.0 - delta) * tanh_sinh(|t| Complex64::new(t.powf(-delta) / (1.0 + z * t), 0.0)).re
}

/// `λ̂_ij (P̂_ij B̂_ij)^δ` from raw tier parameters.
pub fn weight(tiers: &[TierParams], delta: f64, i: usize, j: usize) -> f64 {
    let (a, b) = (&tiers[i], &tiers[j]);
    b.density / a.density * (b.power * b.bias / (a.power * a.bias)).powf(delta)
}

/// `M_{b|(i)}` assembled from the integral oracle.
pub fn moment_tier_oracle(tiers: &[TierParams], alpha: f64, i: usize, theta: f64, b: Complex64) -> Complex64 {
    let delta = 2.0 / alpha;
    let mut num = 0.0;
    let mut den = Complex64::new(0.0, 0.0);
    for j in 0..tiers.len() {
        let w = weight(tiers, delta, i, j);
        let bh = tiers[j].bias / tiers[i].bias;
        num += w;
        den += w * hyp2f1_oracle(b, delta, theta / bh);
    }
    num / den
}

/// Single-tier `1/₂F₁(b, -δ; 1-δ; -θ)`.
pub fn ppp_moment_oracle(alpha: f64, theta: f64, b: f64) -> f64 {
    1.0 / hyp2f1_oracle(b.into(), 2.0 / alpha, theta).re
}

/// The two-tier setting used by most figures: `α = 4`, `λ₂ = 5`, `P₂ = 0.2`.
pub fn fig1(b2: f64) -> NetworkConfig {
    NetworkConfig::two_tier(4.0, 5.0, 0.2, b2).unwrap()
}

/// `α = 4`, `λ₂/λ₁ = 25`, `P₁/P₂ = 200`, `B₂/B₁ = 10`.
pub fn fig9() -> NetworkConfig {
    NetworkConfig::two_tier(4.0, 25.0, 0.005, 10.0).unwrap()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
