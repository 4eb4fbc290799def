//! Random (ALOHA) activity of interfering base stations: moments, mean
//! local delay and the activity region where that delay stays finite.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{check_theta, MeanLocalDelay, MomentQuery, MomentValue, Scope};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::specfun::{activity_kernel, delay_hyp};

/// A network together with the per-tier activity probabilities of its
/// interfering base stations. Serving base stations are always active.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlohaConfig {
    base: NetworkConfig,
    activity: Vec<f64>,
}

impl AlohaConfig {
    pub fn new(base: NetworkConfig, activity: Vec<f64>) -> Result<Self> {
        if activity.len() != base.num_tiers() {
            return Err(Error::Config(format!(
                "activity vector has {} entries for {} tiers",
                activity.len(),
                base.num_tiers()
            )));
        }
        if let Some(p) = activity.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("activity probabilities must lie in [0, 1], got {p}")));
        }
        Ok(AlohaConfig { base, activity })
    }

    pub fn base(&self) -> &NetworkConfig {
        &self.base
    }

    pub fn activity(&self) -> &[f64] {
        &self.activity
    }

    pub fn with_activity(&self, activity: Vec<f64>) -> Result<Self> {
        Self::new(self.base.clone(), activity)
    }
}

/// Stopping rule for the binomial series of the ALOHA moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesTruncation {
    pub max_terms: usize,
    /// Stop once `|term| < rel_tol · max(1, |partial sum|)`.
    pub rel_tol: f64,
    /// Declare divergence after this many consecutive growing terms.
    pub growth_limit: usize,
}

impl Default for SeriesTruncation {
    fn default() -> Self {
        SeriesTruncation {
            max_terms: 200,
            rel_tol: 1e-12,
            growth_limit: 5,
        }
    }
}

/// `1 - Σ_{k≥1} C(b,k) (-p)^k K_k(x)`, the average factor contributed by one
/// interfering tier, with `K_k(x) = δ x^k/(k-δ) ₂F₁(k,k-δ;k-δ+1;-x)`.
pub(crate) fn activity_factor(b: Complex64, p: f64, x: f64, delta: f64, trunc: &SeriesTruncation) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    if p == 0.0 || x == 0.0 {
        return Ok(one);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut coef = one;
    let mut prev = f64::INFINITY;
    let mut growing = 0;
    let mut last = 0.0;
    for k in 1..=trunc.max_terms {
        coef *= (b - (k - 1) as f64) / k as f64 * (-p);
        if coef.norm() == 0.0 {
            // nonnegative integer order: the series terminates
            return Ok(one - sum);
        }
        let term = coef * activity_kernel(k, delta, x)?;
        sum += term;
        last = term.norm();
        if last < trunc.rel_tol * sum.norm().max(1.0) {
            return Ok(one - sum);
        }
        // binomial coefficients may rise legitimately while k < |b|
        if last > prev && k as f64 > b.norm() + 1.0 {
            growing += 1;
            if growing >= trunc.growth_limit {
                return Err(Error::Series {
                    what: format!("activity factor (b = {b}, p = {p}, x = {x})"),
                    terms: k,
                    partial: (one - sum).re,
                    last_term: last,
                });
            }
        } else {
            growing = 0;
        }
        prev = last;
    }
    Err(Error::Series {
        what: format!("activity factor (b = {b}, p = {p}, x = {x})"),
        terms: trunc.max_terms,
        partial: (one - sum).re,
        last_term: last,
    })
}

fn aloha_denominators(cfg: &AlohaConfig, theta: f64, b: Complex64, trunc: &SeriesTruncation) -> Result<Vec<Complex64>> {
    let net = &cfg.base;
    let k = net.num_tiers();
    let delta = net.delta();
    (0..k)
        .map(|i| {
            let mut d = Complex64::new(0.0, 0.0);
            for j in 0..k {
                let x = theta / net.b_hat(i, j);
                d += net.weight(i, j) * activity_factor(b, cfg.activity[j], x, delta, trunc)?;
            }
            Ok(d)
        })
        .collect()
}

/// `M_{b|(i)}(p)` for users served by tier `i`.
pub fn aloha_moment_tier(cfg: &AlohaConfig, tier: usize, theta: f64, b: Complex64, trunc: &SeriesTruncation) -> Result<MomentValue> {
    cfg.base.tier(tier)?;
    check_theta(theta)?;
    let d = aloha_denominators(cfg, theta, b, trunc)?;
    Ok(MomentValue {
        value: cfg.base.weight_sum(tier) / d[tier],
        query: MomentQuery {
            theta,
            order: b,
            scope: Scope::Tier(tier),
        },
    })
}

/// `M_b(p)` of the typical user.
pub fn aloha_moment_overall(cfg: &AlohaConfig, theta: f64, b: Complex64, trunc: &SeriesTruncation) -> Result<MomentValue> {
    check_theta(theta)?;
    let d = aloha_denominators(cfg, theta, b, trunc)?;
    Ok(MomentValue {
        value: d.iter().map(|x| x.inv()).sum(),
        query: MomentQuery {
            theta,
            order: b,
            scope: Scope::Overall,
        },
    })
}

pub fn aloha_moment(cfg: &AlohaConfig, scope: Scope, theta: f64, b: Complex64, trunc: &SeriesTruncation) -> Result<MomentValue> {
    match scope {
        Scope::Overall => aloha_moment_overall(cfg, theta, b, trunc),
        Scope::Tier(i) => aloha_moment_tier(cfg, i, theta, b, trunc),
    }
}

/// `1 - p y κ ₂F₁(1,1-δ;2-δ;-y(1-p))`: the `b = -1` factor of an interfering
/// tier whose threshold, seen from the serving tier, is `y = θ B_i/B_j`.
fn delay_factor(p: f64, y: f64, delta: f64) -> Result<f64> {
    let kappa = delta / (1.0 - delta);
    Ok(1.0 - p * y * kappa * delay_hyp(delta, y * (1.0 - p))?)
}

/// Same with `₂F₁` replaced by its upper bound `(1+z)^(-1)(1 + z/(2-δ))`.
fn delay_factor_lower(p: f64, y: f64, delta: f64) -> f64 {
    let kappa = delta / (1.0 - delta);
    let z = y * (1.0 - p);
    1.0 - p * y * kappa * (1.0 + z / (2.0 - delta)) / (1.0 + z)
}

fn sum_factors(cfg: &AlohaConfig, tier: usize, theta: f64, f: impl Fn(f64, f64) -> Result<f64>) -> Result<f64> {
    let net = &cfg.base;
    net.tier(tier)?;
    check_theta(theta)?;
    let mut d = 0.0;
    for j in 0..net.num_tiers() {
        d += net.weight(tier, j) * f(cfg.activity[j], theta / net.b_hat(tier, j))?;
    }
    Ok(d)
}

/// `D_i(p)`; the mean local delay is finite iff `D_i(p) > 0`.
pub fn delay_denominator(cfg: &AlohaConfig, tier: usize, theta: f64) -> Result<f64> {
    let delta = cfg.base.delta();
    sum_factors(cfg, tier, theta, |p, y| delay_factor(p, y, delta))
}

/// `Ď_i(p) ≤ D_i(p)`, the closed-form lower bound.
pub fn delay_denominator_lower(cfg: &AlohaConfig, tier: usize, theta: f64) -> Result<f64> {
    let delta = cfg.base.delta();
    sum_factors(cfg, tier, theta, |p, y| Ok(delay_factor_lower(p, y, delta)))
}

/// Mean local delay `M_{-1|(i)}(p) = N_i / D_i(p)` with `N_i = Σ_j w_ij`.
pub fn aloha_mean_local_delay(cfg: &AlohaConfig, tier: usize, theta: f64) -> Result<MeanLocalDelay> {
    let d = delay_denominator(cfg, tier, theta)?;
    Ok(if d > 0.0 {
        MeanLocalDelay::Finite(cfg.base.weight_sum(tier) / d)
    } else {
        MeanLocalDelay::Infinite
    })
}

/// Mean local delay of the typical user, `Σ_i 1/D_i(p)`, infinite as soon as
/// one tier has `D_i(p) ≤ 0`.
pub fn aloha_mean_local_delay_overall(cfg: &AlohaConfig, theta: f64) -> Result<MeanLocalDelay> {
    let mut total = 0.0;
    for i in 0..cfg.base.num_tiers() {
        let d = delay_denominator(cfg, i, theta)?;
        if d <= 0.0 {
            return Ok(MeanLocalDelay::Infinite);
        }
        total += 1.0 / d;
    }
    Ok(MeanLocalDelay::Finite(total))
}

/// Whether `p` lies in `S_i` (finite mean local delay for tier `i`).
pub fn in_region(cfg: &AlohaConfig, tier: usize, theta: f64) -> Result<bool> {
    Ok(delay_denominator(cfg, tier, theta)? > 0.0)
}

/// Whether `p` lies in `S = ∩_i S_i`.
pub fn in_intersection(cfg: &AlohaConfig, theta: f64) -> Result<bool> {
    for i in 0..cfg.base.num_tiers() {
        if !in_region(cfg, i, theta)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionKind {
    Exact,
    LowerBound,
    Intersection,
}

/// Boundary of a two-tier activity region, traced column by column in `p₁`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionBoundary {
    /// `None` for the intersection over all tiers.
    pub tier: Option<usize>,
    pub kind: RegionKind,
    pub theta: f64,
    /// `p₁` of each column.
    pub columns: Vec<f64>,
    /// `sup{p₂ : D(p₁, p₂) > 0}` per column (0 if none, 1 if the whole column).
    pub heights: Vec<f64>,
    /// Points `(p₁, p₂)` on the boundary, ordered by `p₁`.
    pub points: Vec<(f64, f64)>,
    /// True when the region is all of `[0, 1]²`.
    pub full_cube: bool,
}

impl RegionBoundary {
    /// Grid containment: every column of `self` is no higher than `other`.
    pub fn is_inside(&self, other: &RegionBoundary, tol: f64) -> bool {
        self.columns == other.columns && self.heights.iter().zip(&other.heights).all(|(a, b)| *a <= b + tol)
    }

    /// Largest column-height difference to another region on the same grid.
    pub fn gap(&self, other: &RegionBoundary) -> Result<f64> {
        if self.columns != other.columns {
            return Err(Error::Range("regions are traced on different grids".into()));
        }
        Ok(self.heights.iter().zip(&other.heights).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

/// Root-finding tolerance on `p₂` for boundary points.
pub const BOUNDARY_TOL: f64 = 1e-13;
/// Default number of `p₁` columns for boundary tracing.
pub const DEFAULT_RESOLUTION: usize = 400;

fn require_two(net: &NetworkConfig) -> Result<()> {
    if net.num_tiers() != 2 {
        return Err(Error::domain(format!(
            "boundary tracing is available for two tiers only (got {}); use in_region for membership",
            net.num_tiers()
        )));
    }
    Ok(())
}

/// Largest `s ∈ [0, 1]` with `f(s) > 0` for a nonincreasing `f` with
/// `f(0) > 0`, or `None` when `f(1) > 0`.
fn last_positive(f: &dyn Fn(f64) -> Result<f64>) -> Result<Option<f64>> {
    if f(1.0)? > 0.0 {
        return Ok(None);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > BOUNDARY_TOL {
        let mid = 0.5 * (lo + hi);
        if f(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn trace(net: &NetworkConfig, tier: usize, theta: f64, resolution: usize, kind: RegionKind) -> Result<RegionBoundary> {
    require_two(net)?;
    net.tier(tier)?;
    check_theta(theta)?;
    if resolution < 2 {
        return Err(Error::domain("boundary resolution must be at least 2 columns"));
    }
    let delta = net.delta();
    let d = move |p1: f64, p2: f64| -> Result<f64> {
        let p = [p1, p2];
        let mut s = 0.0;
        for (j, &pj) in p.iter().enumerate() {
            let y = theta / net.b_hat(tier, j);
            let f = match kind {
                RegionKind::LowerBound => delay_factor_lower(pj, y, delta),
                _ => delay_factor(pj, y, delta)?,
            };
            s += net.weight(tier, j) * f;
        }
        Ok(s)
    };
    let columns: Vec<f64> = (0..resolution).map(|c| c as f64 / (resolution - 1) as f64).collect();
    let per_column = columns
        .par_iter()
        .map(|&p1| -> Result<(f64, Option<f64>)> {
            if d(p1, 0.0)? <= 0.0 {
                return Ok((0.0, None));
            }
            match last_positive(&|p2| d(p1, p2))? {
                None => Ok((1.0, None)),
                Some(r) => Ok((r, Some(r))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let heights: Vec<f64> = per_column.iter().map(|c| c.0).collect();
    let mut points: Vec<(f64, f64)> = columns
        .iter()
        .zip(&per_column)
        .filter_map(|(&p1, c)| c.1.map(|r| (p1, r)))
        .collect();
    // where the boundary leaves through the bottom edge
    if let Some(r) = last_positive(&|p1| d(p1, 0.0))? {
        points.push((r, 0.0));
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    let full_cube = d(1.0, 1.0)? > 0.0;
    Ok(RegionBoundary {
        tier: Some(tier),
        kind,
        theta,
        columns,
        heights,
        points,
        full_cube,
    })
}

/// Traces `∂S_i = {p : D_i(p) = 0}` for a two-tier network.
pub fn region_boundary_exact(net: &NetworkConfig, tier: usize, theta: f64, resolution: usize) -> Result<RegionBoundary> {
    trace(net, tier, theta, resolution, RegionKind::Exact)
}

/// Traces the inner bound `∂Š_i = {p : Ď_i(p) = 0}`.
pub fn region_boundary_lower(net: &NetworkConfig, tier: usize, theta: f64, resolution: usize) -> Result<RegionBoundary> {
    trace(net, tier, theta, resolution, RegionKind::LowerBound)
}

/// `S = ∩_i S_i`: column heights are the minimum over tiers.
pub fn intersection_region(net: &NetworkConfig, theta: f64, resolution: usize) -> Result<RegionBoundary> {
    require_two(net)?;
    let parts = (0..net.num_tiers())
        .map(|i| region_boundary_exact(net, i, theta, resolution))
        .collect::<Result<Vec<_>>>()?;
    let columns = parts[0].columns.clone();
    let heights: Vec<f64> = (0..columns.len())
        .map(|c| parts.iter().map(|r| r.heights[c]).fold(1.0, f64::min))
        .collect();
    let mut points: Vec<(f64, f64)> = columns
        .iter()
        .zip(&heights)
        .filter(|(_, &h)| h > 0.0 && h < 1.0)
        .map(|(&p1, &h)| (p1, h))
        .collect();
    let bottom = parts
        .iter()
        .filter_map(|r| r.points.iter().find(|p| p.1 == 0.0).map(|p| p.0))
        .fold(f64::INFINITY, f64::min);
    if bottom.is_finite() {
        points.push((bottom, 0.0));
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    }
    Ok(RegionBoundary {
        tier: None,
        kind: RegionKind::Intersection,
        theta,
        columns,
        heights,
        full_cube: parts.iter().all(|r| r.full_cube),
        points,
    })
}
