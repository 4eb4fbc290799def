//! Moments of the conditional success probability, variance, mean local
//! delay and the biasing diagnostics of the two-tier case.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::specfun::{self, quad::Tolerance, sinc};

/// Which user population a moment refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Scope {
    /// The typical user, unconditioned on its serving tier.
    Overall,
    /// Users served by tier `i` (0-based).
    Tier(usize),
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Overall => write!(f, "overall"),
            Scope::Tier(i) => write!(f, "tier{}", i + 1),
        }
    }
}

impl FromStr for Scope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "overall" {
            return Ok(Scope::Overall);
        }
        let idx = s
            .strip_prefix("tier")
            .and_then(|d| d.parse::<usize>().ok())
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::Config(format!("unknown scope '{s}', expected 'overall' or 'tierN'")))?;
        Ok(Scope::Tier(idx - 1))
    }
}

impl From<Scope> for String {
    fn from(s: Scope) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for Scope {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub theta: f64,
    pub order: Complex64,
    pub scope: Scope,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentValue {
    pub value: Complex64,
    pub query: MomentQuery,
}

/// Mean local delay; infinite beyond the phase transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MeanLocalDelay {
    Finite(f64),
    Infinite,
}

impl MeanLocalDelay {
    pub fn is_finite(&self) -> bool {
        matches!(self, MeanLocalDelay::Finite(_))
    }

    /// The delay as a float, `+∞` when infinite.
    pub fn as_f64(&self) -> f64 {
        match self {
            MeanLocalDelay::Finite(v) => *v,
            MeanLocalDelay::Infinite => f64::INFINITY,
        }
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("SIR threshold must be positive and finite, got {theta}")))
    }
}

/// `Σ_j λ̂_ij (P̂_ij B̂_ij)^δ ₂F₁(b, -δ; 1-δ; -θ/B̂_ij)` for every tier `i`.
pub(crate) fn tier_denominators(net: &NetworkConfig, theta: f64, b: Complex64, tol: &Tolerance) -> Result<Vec<Complex64>> {
    let k = net.num_tiers();
    let delta = net.delta();
    let mut out = vec![Complex64::new(0.0, 0.0); k];
    // identical bias ratios share one hypergeometric evaluation
    let mut cache: Vec<(f64, Complex64)> = Vec::with_capacity(k * k);
    for (i, slot) in out.iter_mut().enumerate() {
        for j in 0..k {
            let z = theta / net.b_hat(i, j);
            let f = match cache.iter().find(|(zz, _)| *zz == z) {
                Some(&(_, f)) => f,
                None => {
                    let f = specfun::hyp2f1_moment_with(b, delta, z, tol)?;
                    cache.push((z, f));
                    f
                }
            };
            *slot += net.weight(i, j) * f;
        }
    }
    Ok(out)
}

/// `M_{b|(i)}`, the b-th moment for users served by tier `i`.
pub fn moment_tier(net: &NetworkConfig, tier: usize, theta: f64, b: Complex64) -> Result<MomentValue> {
    moment(net, Scope::Tier(tier), theta, b)
}

/// `M_b` of the typical user.
pub fn moment_overall(net: &NetworkConfig, theta: f64, b: Complex64) -> Result<MomentValue> {
    moment(net, Scope::Overall, theta, b)
}

pub fn moment(net: &NetworkConfig, scope: Scope, theta: f64, b: Complex64) -> Result<MomentValue> {
    moment_with(net, scope, theta, b, &Tolerance::default())
}

pub fn moment_with(net: &NetworkConfig, scope: Scope, theta: f64, b: Complex64, tol: &Tolerance) -> Result<MomentValue> {
    check_theta(theta)?;
    if let Scope::Tier(i) = scope {
        net.tier(i)?;
    }
    let d = tier_denominators(net, theta, b, tol)?;
    Ok(MomentValue {
        value: combine(net, scope, &d),
        query: MomentQuery { theta, order: b, scope },
    })
}

pub(crate) fn combine(net: &NetworkConfig, scope: Scope, denominators: &[Complex64]) -> Complex64 {
    match scope {
        Scope::Tier(i) => net.weight_sum(i) / denominators[i],
        Scope::Overall => denominators.iter().map(|d| d.inv()).sum(),
    }
}

fn real_moment(net: &NetworkConfig, scope: Scope, theta: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    moment_with(net, scope, theta, b.into(), tol).map(|m| m.value.re)
}

/// `V = M₂ - M₁²` for the given scope.
pub fn variance(net: &NetworkConfig, scope: Scope, theta: f64) -> Result<f64> {
    variance_with(net, scope, theta, &Tolerance::default())
}

fn variance_with(net: &NetworkConfig, scope: Scope, theta: f64, tol: &Tolerance) -> Result<f64> {
    let m1 = real_moment(net, scope, theta, 1.0, tol)?;
    let m2 = real_moment(net, scope, theta, 2.0, tol)?;
    Ok(m2 - m1 * m1)
}

pub fn variance_tier(net: &NetworkConfig, tier: usize, theta: f64) -> Result<f64> {
    variance(net, Scope::Tier(tier), theta)
}

/// Mean local delay `M_{-1|(i)}` in closed form; infinite at and beyond the
/// phase transition.
pub fn mean_local_delay_tier(net: &NetworkConfig, tier: usize, theta: f64) -> Result<MeanLocalDelay> {
    net.tier(tier)?;
    check_theta(theta)?;
    let delta = net.delta();
    let k = net.num_tiers();
    let denom: f64 = (0..k)
        .map(|j| net.weight(tier, j) * (1.0 - delta - delta * theta / net.b_hat(tier, j)))
        .sum();
    if denom <= 0.0 {
        return Ok(MeanLocalDelay::Infinite);
    }
    Ok(MeanLocalDelay::Finite((1.0 - delta) * net.weight_sum(tier) / denom))
}

/// Mean local delay of the typical user, `Σ_i p_a^(i) M_{-1|(i)}`.
pub fn mean_local_delay_overall(net: &NetworkConfig, theta: f64) -> Result<MeanLocalDelay> {
    let mut total = 0.0;
    for i in 0..net.num_tiers() {
        match mean_local_delay_tier(net, i, theta)? {
            MeanLocalDelay::Finite(v) => total += v / net.weight_sum(i),
            MeanLocalDelay::Infinite => return Ok(MeanLocalDelay::Infinite),
        }
    }
    Ok(MeanLocalDelay::Finite(total))
}

/// Threshold `θ_c|(i)` at which the mean local delay of tier `i` diverges.
pub fn delay_phase_threshold(net: &NetworkConfig, tier: usize) -> Result<f64> {
    net.tier(tier)?;
    let delta = net.delta();
    let k = net.num_tiers();
    let den: f64 = (0..k)
        .map(|j| net.weight(tier, j) / net.b_hat(tier, j))
        .sum();
    Ok((1.0 - delta) * net.weight_sum(tier) / (delta * den))
}

/// First moments and variances of a two-tier network, per tier and overall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoTierMoments {
    pub theta: f64,
    pub m1: [f64; 2],
    pub variance: [f64; 2],
    pub m1_overall: f64,
    pub variance_overall: f64,
}

pub fn two_tier_moments(net: &NetworkConfig, theta: f64) -> Result<TwoTierMoments> {
    require_two_tiers(net)?;
    let tol = Tolerance::default();
    let d1 = tier_denominators(net, theta, 1.0.into(), &tol)?;
    let d2 = tier_denominators(net, theta, 2.0.into(), &tol)?;
    let m = |d: &[Complex64], s| combine(net, s, d).re;
    let m1 = [m(&d1, Scope::Tier(0)), m(&d1, Scope::Tier(1))];
    let m2 = [m(&d2, Scope::Tier(0)), m(&d2, Scope::Tier(1))];
    let m1o = m(&d1, Scope::Overall);
    Ok(TwoTierMoments {
        theta,
        m1,
        variance: [m2[0] - m1[0] * m1[0], m2[1] - m1[1] * m1[1]],
        m1_overall: m1o,
        variance_overall: m(&d2, Scope::Overall) - m1o * m1o,
    })
}

fn require_two_tiers(net: &NetworkConfig) -> Result<()> {
    if net.num_tiers() != 2 {
        return Err(Error::domain(format!("this analysis needs exactly two tiers, got {}", net.num_tiers())));
    }
    Ok(())
}

/// One point of the overall `M₁(B₂)`, `V(B₂)` curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasPoint {
    /// Bias of tier 2 relative to tier 1.
    pub relative_bias: f64,
    pub m1: f64,
    pub variance: f64,
    pub m1_tier1: f64,
    pub m1_tier2: f64,
    /// Sign of `M_{1|(1)} - M_{1|(2)}`.
    #[serde(serialize_with = "ser_ordering")]
    pub tier_order: Ordering,
}

fn ser_ordering<S: serde::Serializer>(o: &Ordering, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(match o {
        Ordering::Less => "less",
        Ordering::Equal => "equal",
        Ordering::Greater => "greater",
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasingReport {
    pub theta: f64,
    pub dm1_db2: f64,
    pub dv_db2: f64,
    pub d2m1_db2: f64,
    pub d2v_db2: f64,
    pub curve: Vec<BiasPoint>,
    /// True when `M_{1|(1)} > M_{1|(2)}` exactly for the grid points with
    /// `B₂ > B₁` (and equality at `B₂ = B₁`).
    pub ordering_consistent: bool,
}

const DIAG_TOL: Tolerance = Tolerance {
    abs: 1e-16,
    rel: 1e-13,
    max_intervals: 4000,
};

fn bias_point(net: &NetworkConfig, theta: f64, rel_bias: f64) -> Result<BiasPoint> {
    let b1 = net.tiers()[0].bias;
    let n = net.with_bias(1, rel_bias * b1)?;
    let d1 = tier_denominators(&n, theta, 1.0.into(), &DIAG_TOL)?;
    let d2 = tier_denominators(&n, theta, 2.0.into(), &DIAG_TOL)?;
    let m1 = combine(&n, Scope::Overall, &d1).re;
    let m2 = combine(&n, Scope::Overall, &d2).re;
    let t1 = combine(&n, Scope::Tier(0), &d1).re;
    let t2 = combine(&n, Scope::Tier(1), &d1).re;
    let tier_order = if (t1 - t2).abs() <= 1e-13 * t1.max(t2) {
        Ordering::Equal
    } else {
        t1.partial_cmp(&t2).unwrap_or(Ordering::Equal)
    };
    Ok(BiasPoint {
        relative_bias: rel_bias,
        m1,
        variance: m2 - m1 * m1,
        m1_tier1: t1,
        m1_tier2: t2,
        tier_order,
    })
}

/// Central differences in `B₂` at `B₂ = B₁` with one Richardson step.
fn derivatives_at_one(net: &NetworkConfig, theta: f64, h: f64) -> Result<[f64; 4]> {
    let eval = |x: f64| -> Result<(f64, f64)> {
        let p = bias_point(net, theta, x)?;
        Ok((p.m1, p.variance))
    };
    let (m0, v0) = eval(1.0)?;
    let first = |step: f64| -> Result<[f64; 4]> {
        let (mp, vp) = eval(1.0 + step)?;
        let (mm, vm) = eval(1.0 - step)?;
        Ok([
            (mp - mm) / (2.0 * step),
            (vp - vm) / (2.0 * step),
            (mp - 2.0 * m0 + mm) / (step * step),
            (vp - 2.0 * v0 + vm) / (step * step),
        ])
    };
    let coarse = first(h)?;
    // the second difference needs a larger step to stay above roundoff
    let coarse2 = first(100.0 * h)?;
    let fine2 = first(50.0 * h)?;
    let fine = first(h / 2.0)?;
    let rich = |c: f64, f: f64| (4.0 * f - c) / 3.0;
    Ok([
        rich(coarse[0], fine[0]),
        rich(coarse[1], fine[1]),
        rich(coarse2[2], fine2[2]),
        rich(coarse2[3], fine2[3]),
    ])
}

/// `M₁(B₂)` and `V(B₂)` of the typical user of a two-tier network, with
/// finite-difference derivatives at `B₂ = B₁` and the tier ordering verdicts.
/// Grid values are biases of tier 2 relative to tier 1.
pub fn biasing_diagnostics(net: &NetworkConfig, theta: f64, relative_bias_grid: &[f64]) -> Result<BiasingReport> {
    require_two_tiers(net)?;
    check_theta(theta)?;
    let [dm1, dv, d2m1, d2v] = derivatives_at_one(net, theta, 1e-4)?;
    let curve = relative_bias_grid
        .iter()
        .map(|&x| bias_point(net, theta, x))
        .collect::<Result<Vec<_>>>()?;
    let ordering_consistent = curve.iter().all(|p| {
        let expect = p.relative_bias.partial_cmp(&1.0).unwrap_or(Ordering::Equal);
        p.tier_order == expect
    });
    Ok(BiasingReport {
        theta,
        dm1_db2: dm1,
        dv_db2: dv,
        d2m1_db2: d2m1,
        d2v_db2: d2v,
        curve,
        ordering_consistent,
    })
}

/// Limits of the per-tier moments of a two-tier network as `B₂ → ∞`
/// (tier 1 effectively closed access).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedAccessLimits {
    pub theta: f64,
    pub m1_tier1: f64,
    pub m1_tier2: f64,
    pub variance_tier1: f64,
    pub variance_tier2: f64,
    /// Further `θ → ∞` forms.
    pub m1_tier2_large_theta: f64,
    pub variance_tier2_large_theta: f64,
}

/// With `c = λ₂ P₂^δ` (relative to tier 1), tier-2 users see
/// `M_{b|(2)} → 1/(f_b(θ) + T(b) θ^δ / c)`.
pub fn asymptotic_closed_access(net: &NetworkConfig, theta: f64) -> Result<ClosedAccessLimits> {
    require_two_tiers(net)?;
    check_theta(theta)?;
    let pl = net.pathloss();
    let delta = pl.delta();
    let (t1, t2) = (&net.tiers()[0], &net.tiers()[1]);
    let c = t2.density / t1.density * (t2.power / t1.power).powf(delta);
    let s = sinc(delta);
    let f1 = specfun::hyp2f1_moment(1.0.into(), pl, theta)?.re;
    let f2 = specfun::hyp2f1_moment(2.0.into(), pl, theta)?.re;
    let td = theta.powf(delta);
    let m1 = c * s / (f1 * c * s + td);
    let m2 = 1.0 / (f2 + (1.0 + delta) * td / (c * s));
    let m1_inf = c * s / (td * (1.0 + c));
    let v_inf = c * s / (td * (1.0 + delta) * (1.0 + c)) - m1_inf * m1_inf;
    Ok(ClosedAccessLimits {
        theta,
        m1_tier1: 1.0,
        m1_tier2: m1,
        variance_tier1: 0.0,
        variance_tier2: m2 - m1 * m1,
        m1_tier2_large_theta: m1_inf,
        variance_tier2_large_theta: v_inf,
    })
}
