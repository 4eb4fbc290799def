//! Monte Carlo simulation of the K-tier Poisson network.
//!
//! Fading is averaged out in closed form: given the base station locations,
//! the success probability under Rayleigh fading is a finite product over
//! interferers, so each realization yields `Ps(θ)` exactly. ALOHA activity of
//! interferers is averaged the same way.
//!
//! Points of each tier are drawn in order of distance (`π λ r_k²` are the
//! arrival times of a unit-rate Poisson process) up to the window radius,
//! which is the same law as a Poisson count of uniform points in the disk.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aloha::{self, AlohaConfig, SeriesTruncation};
use crate::analytics::{self, check_theta, Scope};
use crate::error::{Error, Result};
use crate::meta::{CurveMethod, MetaCurve};
use crate::network::NetworkConfig;
use crate::specfun::gamma::gamma_real;

/// Smallest expected point count of the sparsest tier in the default window.
pub const MIN_POINTS_SPARSEST: f64 = 500.0;
/// Target for the truncation bound used by [`default_window_radius`].
pub const TRUNCATION_BOUND: f64 = 1e-3;
/// Threshold assumed by [`SimConfig::new`] when sizing the window.
pub const DEFAULT_THETA_MAX: f64 = 10.0;
/// Number of batches for batch-means standard errors.
pub const BATCHES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub network: NetworkConfig,
    pub window_radius: f64,
    pub n_realizations: usize,
    pub rng_seed: u64,
    /// Activity probabilities of interferers per tier; `None` means always on.
    pub aloha: Option<Vec<f64>>,
}

impl SimConfig {
    /// Uses [`default_window_radius`] for thresholds up to [`DEFAULT_THETA_MAX`].
    pub fn new(network: NetworkConfig, n_realizations: usize, rng_seed: u64) -> Result<Self> {
        let window_radius = default_window_radius(&network, DEFAULT_THETA_MAX)?;
        let cfg = SimConfig {
            network,
            window_radius,
            n_realizations,
            rng_seed,
            aloha: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_window_radius(mut self, radius: f64) -> Result<Self> {
        self.window_radius = radius;
        self.validate()?;
        Ok(self)
    }

    pub fn with_activity(mut self, activity: Vec<f64>) -> Result<Self> {
        // reuse the checks of the analytic configuration
        AlohaConfig::new(self.network.clone(), activity.clone())?;
        self.aloha = Some(activity);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_radius > 0.0 && self.window_radius.is_finite()) {
            return Err(Error::Config(format!("window radius must be positive, got {}", self.window_radius)));
        }
        if self.n_realizations == 0 {
            return Err(Error::Config("at least one realization is required".into()));
        }
        if let Some(p) = &self.aloha {
            AlohaConfig::new(self.network.clone(), p.clone())?;
        }
        Ok(())
    }

    fn activity(&self, tier: usize) -> f64 {
        self.aloha.as_ref().map_or(1.0, |p| p[tier])
    }
}

/// Window radius with at least [`MIN_POINTS_SPARSEST`] expected points in the
/// sparsest tier, doubled until the expected log-interference missing beyond
/// the window, `θ Σ_j π λ_j P̂_ij E[R_i^α] (2/(α-2)) R_w^(2-α)`, is below
/// [`TRUNCATION_BOUND`] for every serving tier.
pub fn default_window_radius(net: &NetworkConfig, theta_max: f64) -> Result<f64> {
    check_theta(theta_max)?;
    let alpha = net.alpha();
    let delta = net.delta();
    let lam_min = net.tiers().iter().map(|t| t.density).fold(f64::INFINITY, f64::min);
    let mut radius = (MIN_POINTS_SPARSEST / (PI * lam_min)).sqrt();
    let k = net.num_tiers();
    let bound = |rw: f64| -> f64 {
        (0..k)
            .map(|i| {
                // given tier i serves, R_i² is exponential with rate π Σ_j λ_j (P̂B̂)^δ
                let rate: f64 = (0..k)
                    .map(|j| PI * net.tiers()[j].density * (net.p_hat(i, j) * net.b_hat(i, j)).powf(delta))
                    .sum();
                let r_alpha = gamma_real(1.0 + alpha / 2.0) / rate.powf(alpha / 2.0);
                let lp: f64 = (0..k).map(|j| PI * net.tiers()[j].density * net.p_hat(i, j)).sum();
                theta_max * lp * r_alpha * 2.0 / (alpha - 2.0) * rw.powf(2.0 - alpha)
            })
            .fold(0.0, f64::max)
    };
    for _ in 0..40 {
        if bound(radius) < TRUNCATION_BOUND {
            return Ok(radius);
        }
        radius *= 2.0;
    }
    Err(Error::domain("no window radius meets the truncation bound"))
}

/// A base station location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BsPoint {
    pub position: [f64; 2],
    pub tier: usize,
}

/// One draw of all tiers inside the simulation window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Realization {
    pub points: Vec<BsPoint>,
    pub serving: usize,
    pub serving_tier: usize,
    pub serving_distance: f64,
    /// Number of empty draws discarded before this one.
    pub empty_resampled: usize,
}

fn distance_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index);
    rng
}

fn angle_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * index + 1);
    rng
}

/// Unit-rate arrivals scaled so that the k-th value is the squared distance
/// of the k-th nearest point of a PPP with density `density`.
struct TierStream {
    scale: f64,
    limit: f64,
    gamma: f64,
}

impl TierStream {
    fn new(density: f64, radius: f64) -> Self {
        TierStream {
            scale: 1.0 / (PI * density),
            limit: PI * density * radius * radius,
            gamma: 0.0,
        }
    }

    fn next(&mut self, rng: &mut ChaCha8Rng) -> Option<f64> {
        self.gamma += rng.sample::<f64, _>(Exp1);
        (self.gamma <= self.limit).then(|| self.gamma * self.scale)
    }
}

/// Nearest point of every tier; the serving tier minimizes `r² (P B)^(-δ)`.
struct Draw {
    streams: Vec<TierStream>,
    nearest: Vec<Option<f64>>,
    serving_tier: usize,
    empty_resampled: usize,
}

fn draw_nearest(cfg: &SimConfig, rng: &mut ChaCha8Rng) -> Draw {
    let net = &cfg.network;
    let delta = net.delta();
    let mut empty_resampled = 0;
    loop {
        let mut streams: Vec<TierStream> = net.tiers().iter().map(|t| TierStream::new(t.density, cfg.window_radius)).collect();
        let nearest: Vec<Option<f64>> = streams.iter_mut().map(|s| s.next(rng)).collect();
        let serving = nearest
            .iter()
            .enumerate()
            .filter_map(|(j, r2)| {
                let t = &net.tiers()[j];
                r2.map(|r2| (j, r2 * (t.power * t.bias).powf(-delta)))
            })
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((serving_tier, _)) = serving {
            return Draw {
                streams,
                nearest,
                serving_tier,
                empty_resampled,
            };
        }
        empty_resampled += 1;
    }
}

/// Per-interferer factor `1/(1+u)` or, with activity `p`, `p/(1+u) + 1 - p`,
/// accumulated as a ratio of products to avoid one division per point.
struct Product {
    thetas: Vec<f64>,
    num: Vec<f64>,
    den: Vec<f64>,
}

impl Product {
    fn new(thetas: &[f64]) -> Self {
        Product {
            thetas: thetas.to_vec(),
            num: vec![1.0; thetas.len()],
            den: vec![1.0; thetas.len()],
        }
    }

    fn push(&mut self, s: f64, p: f64) {
        for ((n, d), &th) in self.num.iter_mut().zip(self.den.iter_mut()).zip(&self.thetas) {
            let u = th * s;
            *d *= 1.0 + u;
            if p < 1.0 {
                *n *= 1.0 + (1.0 - p) * u;
            }
            if *d > 1e250 {
                *d *= 1e-250;
                *n *= 1e-250;
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        self.num.iter().zip(&self.den).map(|(n, d)| n / d).collect()
    }
}

/// Relative received power `s_x = P̂ (R/r)^α` of an interferer at squared
/// distance `r2` when the serving link has squared length `r2_serving`.
#[inline]
fn relative_power(p_hat: f64, ratio2: f64, half_alpha: f64, int_exp: Option<i32>) -> f64 {
    match int_exp {
        Some(n) => p_hat * ratio2.powi(n),
        None => p_hat * ratio2.powf(half_alpha),
    }
}

fn int_half_alpha(alpha: f64) -> Option<i32> {
    let h = alpha / 2.0;
    (h.fract() == 0.0 && h <= 16.0).then_some(h as i32)
}

struct Sample {
    tier: usize,
    ps: Vec<f64>,
    empty_resampled: usize,
}

/// Draws realization `index` and evaluates `Ps(θ)` for every threshold without
/// storing the point pattern.
fn simulate_one(cfg: &SimConfig, index: u64, thetas: &[f64]) -> Sample {
    let net = &cfg.network;
    let mut rng = distance_rng(cfg.rng_seed, index);
    let mut draw = draw_nearest(cfg, &mut rng);
    let i = draw.serving_tier;
    let r2s = draw.nearest[i].expect("serving tier has a point");
    let half_alpha = net.alpha() / 2.0;
    let int_exp = int_half_alpha(net.alpha());
    let mut prod = Product::new(thetas);
    for (j, stream) in draw.streams.iter_mut().enumerate() {
        let p_hat = net.p_hat(i, j);
        let p = cfg.activity(j);
        if j != i {
            if let Some(r2) = draw.nearest[j] {
                prod.push(relative_power(p_hat, r2s / r2, half_alpha, int_exp), p);
            }
        }
        if draw.nearest[j].is_some() {
            while let Some(r2) = stream.next(&mut rng) {
                prod.push(relative_power(p_hat, r2s / r2, half_alpha, int_exp), p);
            }
        }
    }
    Sample {
        tier: i,
        ps: prod.values(),
        empty_resampled: draw.empty_resampled,
    }
}

/// Draws realization `index` with explicit locations. The point pattern is the
/// one used by [`run_simulation`] for the same index.
pub fn sample_realization(cfg: &SimConfig, index: u64) -> Result<Realization> {
    cfg.validate()?;
    let mut rng = distance_rng(cfg.rng_seed, index);
    let mut angles = angle_rng(cfg.rng_seed, index);
    let mut draw = draw_nearest(cfg, &mut rng);
    let mut radii: Vec<Vec<f64>> = draw.nearest.iter().map(|r| r.iter().copied().collect()).collect();
    for (j, stream) in draw.streams.iter_mut().enumerate() {
        if draw.nearest[j].is_some() {
            while let Some(r2) = stream.next(&mut rng) {
                radii[j].push(r2);
            }
        }
    }
    let mut points = Vec::new();
    let mut serving = 0;
    for (j, list) in radii.iter().enumerate() {
        for (k, &r2) in list.iter().enumerate() {
            if j == draw.serving_tier && k == 0 {
                serving = points.len();
            }
            let phi = angles.random::<f64>() * TAU;
            let r = r2.sqrt();
            points.push(BsPoint {
                position: [r * phi.cos(), r * phi.sin()],
                tier: j,
            });
        }
    }
    Ok(Realization {
        serving_distance: radii[draw.serving_tier][0].sqrt(),
        serving,
        serving_tier: draw.serving_tier,
        points,
        empty_resampled: draw.empty_resampled,
    })
}

/// `Ps(θ | Φ) = Π_x 1/(1 + θ P̂ (R/‖x‖)^α)` over all non-serving points, with
/// the factor `p_j/(1+u) + 1 - p_j` when tier `j` is active with probability `p_j`.
pub fn conditional_success_prob(real: &Realization, net: &NetworkConfig, theta: f64, activity: Option<&[f64]>) -> Result<f64> {
    check_theta(theta)?;
    if real.points.is_empty() {
        return Err(Error::domain("empty realization"));
    }
    let i = real.serving_tier;
    let r2s = real.serving_distance * real.serving_distance;
    let half_alpha = net.alpha() / 2.0;
    let mut prod = Product::new(&[theta]);
    for (k, x) in real.points.iter().enumerate() {
        if k == real.serving {
            continue;
        }
        let r2 = x.position[0] * x.position[0] + x.position[1] * x.position[1];
        let p = activity.map_or(1.0, |a| a[x.tier]);
        prod.push(net.p_hat(i, x.tier) * (r2s / r2).powf(half_alpha), p);
    }
    Ok(prod.values()[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub order: f64,
    pub estimate: Estimate,
}

/// Empirical statistics of `Ps(θ)` for one scope and threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScopeStats {
    pub scope: Scope,
    pub theta: f64,
    pub samples: usize,
    pub moments: Vec<MomentEstimate>,
    pub variance: Estimate,
    pub reliability: Vec<f64>,
    pub ccdf: Vec<f64>,
    /// Binomial standard error of each CCDF value.
    pub ccdf_std_error: Vec<f64>,
}

impl ScopeStats {
    pub fn moment(&self, order: f64) -> Option<Estimate> {
        self.moments.iter().find(|m| m.order == order).map(|m| m.estimate)
    }

    pub fn curve(&self) -> MetaCurve {
        MetaCurve {
            theta: self.theta,
            scope: self.scope,
            method: CurveMethod::Empirical,
            reliability: self.reliability.clone(),
            ccdf: self.ccdf.clone(),
            max_clip_violation: 0.0,
            monotone_repaired: false,
            conjugate_residue: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccessFrequency {
    pub tier: usize,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalStats {
    pub n_realizations: usize,
    pub empty_resampled: usize,
    pub window_radius: f64,
    pub batches: usize,
    pub access: Vec<AccessFrequency>,
    /// Ordered by threshold, then overall followed by each tier.
    pub scopes: Vec<ScopeStats>,
}

impl EmpiricalStats {
    pub fn get(&self, scope: Scope, theta: f64) -> Option<&ScopeStats> {
        self.scopes.iter().find(|s| s.scope == scope && s.theta == theta)
    }
}

/// One line of the raw dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RawRecord {
    pub index: u64,
    /// Serving tier, 1-based.
    pub tier: usize,
    pub theta: f64,
    pub ps: f64,
}

fn mean_se(batch_values: &[f64]) -> f64 {
    let n = batch_values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = batch_values.iter().sum::<f64>() / n as f64;
    let var = batch_values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

fn check_inputs(cfg: &SimConfig, thetas: &[f64], orders: &[f64], t_grid: &[f64]) -> Result<()> {
    cfg.validate()?;
    if thetas.is_empty() {
        return Err(Error::domain("no thresholds requested"));
    }
    for &t in thetas {
        check_theta(t)?;
    }
    if let Some(b) = orders.iter().find(|b| !b.is_finite()) {
        return Err(Error::domain(format!("moment order must be finite, got {b}")));
    }
    if let Some(t) = t_grid.iter().find(|t| !(0.0..=1.0).contains(*t)) {
        return Err(Error::domain(format!("reliability grid values must lie in [0, 1], got {t}")));
    }
    Ok(())
}

fn simulate_all(cfg: &SimConfig, thetas: &[f64]) -> Vec<Sample> {
    (0..cfg.n_realizations as u64)
        .into_par_iter()
        .map(|k| simulate_one(cfg, k, thetas))
        .collect()
}

/// Runs `n_realizations` draws and aggregates moments of the requested real
/// orders, variances and CCDFs on `t_grid` for every threshold and scope.
/// Results depend only on the configuration and seed.
pub fn run_simulation(cfg: &SimConfig, thetas: &[f64], orders: &[f64], t_grid: &[f64]) -> Result<EmpiricalStats> {
    Ok(run_simulation_with_raw(cfg, thetas, orders, t_grid, false)?.0)
}

/// As [`run_simulation`], optionally also returning every per-realization value.
pub fn run_simulation_with_raw(
    cfg: &SimConfig,
    thetas: &[f64],
    orders: &[f64],
    t_grid: &[f64],
    keep_raw: bool,
) -> Result<(EmpiricalStats, Vec<RawRecord>)> {
    check_inputs(cfg, thetas, orders, t_grid)?;
    let samples = simulate_all(cfg, thetas);
    let stats = aggregate(cfg, &samples, thetas, orders, t_grid);
    let raw = if keep_raw {
        samples
            .iter()
            .enumerate()
            .flat_map(|(k, s)| {
                thetas.iter().zip(&s.ps).map(move |(&theta, &ps)| RawRecord {
                    index: k as u64,
                    tier: s.tier + 1,
                    theta,
                    ps,
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok((stats, raw))
}

fn aggregate(cfg: &SimConfig, samples: &[Sample], thetas: &[f64], orders: &[f64], t_grid: &[f64]) -> EmpiricalStats {
    let n = samples.len();
    let k = cfg.network.num_tiers();
    let batches = BATCHES.min(n);
    let batch_of = |idx: usize| idx * batches / n;

    let access = (0..k)
        .map(|tier| {
            let hits = samples.iter().filter(|s| s.tier == tier).count() as f64;
            let p = hits / n as f64;
            AccessFrequency {
                tier,
                estimate: Estimate {
                    value: p,
                    std_error: (p * (1.0 - p) / n as f64).sqrt(),
                },
            }
        })
        .collect();

    let scopes: Vec<Scope> = std::iter::once(Scope::Overall).chain((0..k).map(Scope::Tier)).collect();
    let mut out = Vec::new();
    for (ti, &theta) in thetas.iter().enumerate() {
        for &scope in &scopes {
            let selected: Vec<(usize, f64)> = samples
                .iter()
                .enumerate()
                .filter(|(_, s)| match scope {
                    Scope::Overall => true,
                    Scope::Tier(t) => s.tier == t,
                })
                .map(|(idx, s)| (batch_of(idx), s.ps[ti]))
                .collect();
            out.push(scope_stats(scope, theta, &selected, batches, orders, t_grid));
        }
    }
    EmpiricalStats {
        n_realizations: n,
        empty_resampled: samples.iter().map(|s| s.empty_resampled).sum(),
        window_radius: cfg.window_radius,
        batches,
        access,
        scopes: out,
    }
}

fn scope_stats(scope: Scope, theta: f64, selected: &[(usize, f64)], batches: usize, orders: &[f64], t_grid: &[f64]) -> ScopeStats {
    let m = selected.len();
    // per-batch counts and power sums; moments within a batch are ratio estimates
    let mut counts = vec![0usize; batches];
    let mut sums = vec![vec![0.0; orders.len() + 2]; batches];
    let mut all: Vec<f64> = Vec::with_capacity(m);
    for &(b, ps) in selected {
        counts[b] += 1;
        sums[b][0] += ps;
        sums[b][1] += ps * ps;
        for (o, &order) in orders.iter().enumerate() {
            sums[b][o + 2] += ps.powf(order);
        }
        all.push(ps);
    }
    let used: Vec<usize> = (0..batches).filter(|&b| counts[b] > 0).collect();
    let pooled = |col: usize| sums.iter().map(|s| s[col]).sum::<f64>() / m as f64;
    let batch_col = |col: usize| -> Vec<f64> { used.iter().map(|&b| sums[b][col] / counts[b] as f64).collect() };

    let moments = orders
        .iter()
        .enumerate()
        .map(|(o, &order)| MomentEstimate {
            order,
            estimate: Estimate {
                value: pooled(o + 2),
                std_error: mean_se(&batch_col(o + 2)),
            },
        })
        .collect();
    let (m1, m2) = (pooled(0), pooled(1));
    let batch_var: Vec<f64> = batch_col(0).iter().zip(batch_col(1)).map(|(a, b)| b - a * a).collect();
    let variance = Estimate {
        value: (m2 - m1 * m1).max(0.0),
        std_error: mean_se(&batch_var),
    };

    all.sort_by(f64::total_cmp);
    let (ccdf, ccdf_std_error): (Vec<f64>, Vec<f64>) = t_grid
        .iter()
        .map(|&t| {
            let above = m - all.partition_point(|&x| x <= t);
            let f = if m > 0 { above as f64 / m as f64 } else { f64::NAN };
            (f, (f * (1.0 - f) / m as f64).sqrt())
        })
        .unzip();
    ScopeStats {
        scope,
        theta,
        samples: m,
        moments,
        variance,
        reliability: t_grid.to_vec(),
        ccdf,
        ccdf_std_error,
    }
}

/// Writes raw records as CSV with header `index,tier,theta,ps`.
pub fn write_raw_csv<W: Write>(records: &[RawRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// Analytic value next to its empirical estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub theta: f64,
    pub scope: Scope,
    /// `"M<b>"`, `"V"` or `"access"`.
    pub quantity: String,
    pub analytic: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub z: f64,
}

impl Comparison {
    fn new(theta: f64, scope: Scope, quantity: String, analytic: f64, est: Estimate) -> Self {
        Comparison {
            theta,
            scope,
            quantity,
            analytic,
            empirical: est.value,
            std_error: est.std_error,
            z: (est.value - analytic) / est.std_error,
        }
    }
}

/// Pairs every simulated moment, variance and access frequency with its
/// closed-form value (the ALOHA series when activity is set).
pub fn compare_with_analytics(cfg: &SimConfig, stats: &EmpiricalStats) -> Result<Vec<Comparison>> {
    let net = &cfg.network;
    let aloha_cfg = cfg.aloha.as_ref().map(|p| AlohaConfig::new(net.clone(), p.clone())).transpose()?;
    let trunc = SeriesTruncation::default();
    let moment = |scope: Scope, theta: f64, b: f64| -> Result<f64> {
        Ok(match &aloha_cfg {
            Some(a) => aloha::aloha_moment(a, scope, theta, b.into(), &trunc)?.value.re,
            None => analytics::moment(net, scope, theta, b.into())?.value.re,
        })
    };
    let mut out = Vec::new();
    for a in &stats.access {
        out.push(Comparison::new(0.0, Scope::Tier(a.tier), "access".into(), net.access_probability(a.tier)?, a.estimate));
    }
    for s in &stats.scopes {
        for m in &s.moments {
            let analytic = moment(s.scope, s.theta, m.order)?;
            out.push(Comparison::new(s.theta, s.scope, format!("M{}", m.order), analytic, m.estimate));
        }
        let m1 = moment(s.scope, s.theta, 1.0)?;
        let m2 = moment(s.scope, s.theta, 2.0)?;
        out.push(Comparison::new(s.theta, s.scope, "V".into(), m2 - m1 * m1, s.variance));
    }
    Ok(out)
}
