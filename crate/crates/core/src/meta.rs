//! The meta distribution `F̄(θ, t) = P(Ps(θ) > t)`: exact values by
//! Gil-Pelaez inversion of imaginary moments, the two-moment beta
//! approximation, and percentile extraction.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::analytics::{self, check_theta, combine, tier_denominators, Scope};
use crate::error::{Error, Result};
use crate::network::NetworkConfig;
use crate::specfun::quad::{self, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMethod {
    ExactGilPelaez,
    BetaApprox,
    Empirical,
}

/// Sampled CCDF of the link reliability at a fixed threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetaCurve {
    pub theta: f64,
    pub scope: Scope,
    pub method: CurveMethod,
    pub reliability: Vec<f64>,
    pub ccdf: Vec<f64>,
    /// Largest distance of a raw value outside `[0, 1]` before clipping.
    pub max_clip_violation: f64,
    /// Set when the raw values had to be made nonincreasing.
    pub monotone_repaired: bool,
    /// Largest `|φ(-u) - conj φ(u)|` seen on sampled inversion nodes.
    pub conjugate_residue: f64,
}

impl MetaCurve {
    /// `∫₀¹ F̄(θ, t) dt` by the trapezoidal rule, which equals `M₁`.
    pub fn mean(&self) -> f64 {
        let (t, f) = with_endpoints(&self.reliability, &self.ccdf);
        t.windows(2)
            .zip(f.windows(2))
            .map(|(tw, fw)| 0.5 * (tw[1] - tw[0]) * (fw[0] + fw[1]))
            .sum()
    }
}

/// Largest pointwise difference between two curves on the same grid.
pub fn sup_gap(a: &MetaCurve, b: &MetaCurve) -> Result<f64> {
    if a.reliability != b.reliability {
        return Err(Error::Range("curves are sampled on different reliability grids".into()));
    }
    Ok(a.ccdf.iter().zip(&b.ccdf).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

/// 201 uniform points in `[0.005, 0.995]`.
pub fn default_reliability_grid() -> Vec<f64> {
    uniform_grid(0.005, 0.995, 201)
}

pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

fn with_endpoints(t: &[f64], f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut tt = Vec::with_capacity(t.len() + 2);
    let mut ff = Vec::with_capacity(t.len() + 2);
    if t.first().is_none_or(|&x| x > 0.0) {
        tt.push(0.0);
        ff.push(1.0);
    }
    tt.extend_from_slice(t);
    ff.extend_from_slice(f);
    if t.last().is_none_or(|&x| x < 1.0) {
        tt.push(1.0);
        ff.push(0.0);
    }
    (tt, ff)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::domain("reliability grid is empty"));
    }
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::domain("reliability grid values must lie in [0, 1]"));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("reliability grid must be strictly increasing"));
    }
    Ok(())
}

/// Numerical settings of the Gil-Pelaez inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GilPelaezOptions {
    /// Where the sampled integral stops and the power-law tail takes over.
    pub truncation: f64,
    /// Upper bound on the width of one Gauss-Legendre panel.
    pub max_panel_width: f64,
}

impl Default for GilPelaezOptions {
    fn default() -> Self {
        GilPelaezOptions {
            truncation: 400.0,
            max_panel_width: 0.5,
        }
    }
}

const MIN_TRUNCATION: f64 = 200.0;

#[allow(clippy::excessive_precision)]
const GL10_X: [f64; 5] = [
    0.148_874_338_981_631_210_9,
    0.433_395_394_129_247_190_8,
    0.679_409_568_299_024_406_2,
    0.865_063_366_688_984_510_7,
    0.973_906_528_517_171_720_1,
];
#[allow(clippy::excessive_precision)]
const GL10_W: [f64; 5] = [
    0.295_524_224_714_752_870_2,
    0.269_266_719_309_996_355_1,
    0.219_086_362_515_982_044_0,
    0.149_451_349_150_580_593_1,
    0.066_671_344_308_688_137_6,
];

/// The imaginary moments `M_{ju}` sampled once on a quadrature grid and
/// reused for every reliability level and scope.
struct Characteristic<'a> {
    net: &'a NetworkConfig,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Per node, the tier denominators of the moment formula.
    denominators: Vec<Vec<Complex64>>,
    truncation: f64,
    conjugate_residue: f64,
}

impl<'a> Characteristic<'a> {
    fn build(net: &'a NetworkConfig, theta: f64, kappa_max: f64, opts: &GilPelaezOptions) -> Result<Self> {
        let k = net.num_tiers();
        let u_max = opts.truncation.max(MIN_TRUNCATION);
        // fastest oscillation: the e^{jκu} kernel plus the (1+z)^{-ju} factors
        let mut omega = kappa_max;
        let mut extra: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                extra = extra.max((theta / net.b_hat(i, j)).ln_1p());
            }
        }
        omega += extra;
        let width = opts.max_panel_width.min(2.5 / omega.max(1e-300));
        let panels = (u_max / width).ceil() as usize;
        let h = u_max / panels as f64;
        let mut nodes = Vec::with_capacity(panels * 10);
        let mut weights = Vec::with_capacity(panels * 10);
        for p in 0..panels {
            let c = (p as f64 + 0.5) * h;
            for (x, w) in GL10_X.iter().zip(GL10_W.iter()) {
                for s in [-1.0, 1.0] {
                    nodes.push(c + s * x * 0.5 * h);
                    weights.push(w * 0.5 * h);
                }
            }
        }
        let tol = Tolerance::new(1e-15, 1e-11);
        let mut all: Vec<f64> = nodes.clone();
        all.push(u_max);
        let denominators = all
            .par_iter()
            .map(|&u| tier_denominators(net, theta, Complex64::new(0.0, u), &tol))
            .collect::<Result<Vec<_>>>()?;
        let mut residue: f64 = 0.0;
        // large orders obtain φ(-u) from φ(u) by symmetry, so only the
        // directly integrated range says anything
        for idx in (0..nodes.len()).step_by(3).take_while(|&i| nodes[i] < 4.0) {
            let u = nodes[idx];
            let neg = tier_denominators(net, theta, Complex64::new(0.0, -u), &tol)?;
            for (a, b) in neg.iter().zip(&denominators[idx]) {
                residue = residue.max((a - b.conj()).norm() / b.norm());
            }
        }
        Ok(Characteristic {
            net,
            nodes,
            weights,
            denominators,
            truncation: u_max,
            conjugate_residue: residue,
        })
    }

    fn phi(&self, idx: usize, scope: Scope) -> Complex64 {
        combine(self.net, scope, &self.denominators[idx])
    }

    /// Raw (unclipped) `F̄(t)`.
    fn ccdf(&self, scope: Scope, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Ok(1.0);
        }
        if t >= 1.0 {
            return Ok(0.0);
        }
        let kappa = -t.ln();
        let mut acc = 0.0;
        for (idx, (&u, &w)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let phase = Complex64::from_polar(1.0, kappa * u);
            acc += w * (phase * self.phi(idx, scope)).im / u;
        }
        let anchor = self.phi(self.nodes.len(), scope);
        acc += self.tail(anchor, kappa)?;
        Ok(0.5 + acc / PI)
    }

    /// `∫_U^∞ Im(e^{jκu} φ(u))/u du` with `φ(u) ≈ φ(U) (u/U)^{-δ}`, evaluated
    /// on the rotated path `u = U(1 + jσ)`.
    fn tail(&self, anchor: Complex64, kappa: f64) -> Result<f64> {
        let u = self.truncation;
        let delta = self.net.delta();
        let a = kappa * u;
        let tol = Tolerance::new(1e-15, 1e-10);
        // σ = x/(1-x)
        let r = quad::integrate(
            |x| {
                if x >= 1.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let om = 1.0 - x;
                let s = x / om;
                let v = Complex64::new(1.0, s).powf(-1.0 - delta) * (-a * s).exp();
                v / (om * om)
            },
            0.0,
            1.0,
            &tol,
        )?;
        let integral = Complex64::new(0.0, 1.0) * Complex64::from_polar(1.0, a) * r.value;
        Ok((anchor * integral).im)
    }
}

fn finish_curve(theta: f64, scope: Scope, method: CurveMethod, t_grid: &[f64], raw: Vec<f64>, residue: f64) -> MetaCurve {
    let mut violation: f64 = 0.0;
    let mut values: Vec<f64> = raw
        .iter()
        .map(|&v| {
            violation = violation.max(v - 1.0).max(-v);
            v.clamp(0.0, 1.0)
        })
        .collect();
    let worst_rise = values.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if worst_rise > 0.0 {
        pool_adjacent_violators(&mut values);
    }
    MetaCurve {
        theta,
        scope,
        method,
        reliability: t_grid.to_vec(),
        ccdf: values,
        max_clip_violation: violation,
        monotone_repaired: worst_rise > MONOTONE_TOL,
        conjugate_residue: residue,
    }
}

const MONOTONE_TOL: f64 = 1e-8;

/// Least-squares nonincreasing fit, in place.
fn pool_adjacent_violators(v: &mut [f64]) {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v.iter() {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m2 > m1 {
                blocks.pop();
                let n = n1 + n2;
                *blocks.last_mut().unwrap() = ((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n);
            } else {
                break;
            }
        }
    }
    let mut i = 0;
    for (m, n) in blocks {
        for slot in &mut v[i..i + n] {
            *slot = m;
        }
        i += n;
    }
}

/// Exact meta distribution by Gil-Pelaez inversion of `M_{ju}`.
pub fn gil_pelaez_ccdf(net: &NetworkConfig, scope: Scope, theta: f64, t_grid: &[f64]) -> Result<MetaCurve> {
    gil_pelaez_ccdf_with(net, &[scope], theta, t_grid, &GilPelaezOptions::default()).map(|mut v| v.remove(0))
}

/// Inverts several scopes from one shared set of imaginary moments.
pub fn gil_pelaez_ccdf_with(
    net: &NetworkConfig,
    scopes: &[Scope],
    theta: f64,
    t_grid: &[f64],
    opts: &GilPelaezOptions,
) -> Result<Vec<MetaCurve>> {
    check_theta(theta)?;
    check_grid(t_grid)?;
    for s in scopes {
        if let Scope::Tier(i) = s {
            net.tier(*i)?;
        }
    }
    let kappa_max = t_grid
        .iter()
        .filter(|&&t| t > 0.0 && t < 1.0)
        .map(|t| -t.ln())
        .fold(0.0, f64::max);
    let ch = Characteristic::build(net, theta, kappa_max, opts)?;
    scopes
        .iter()
        .map(|&scope| {
            let raw = t_grid
                .par_iter()
                .map(|&t| ch.ccdf(scope, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(finish_curve(theta, scope, CurveMethod::ExactGilPelaez, t_grid, raw, ch.conjugate_residue))
        })
        .collect()
}

/// Beta distribution matched to the first two moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaFit {
    pub shape_a: f64,
    pub shape_b: f64,
    pub matched_m1: f64,
    pub matched_m2: f64,
}

const MIN_VARIANCE: f64 = 1e-12;

pub fn beta_fit(m1: f64, m2: f64) -> Result<BetaFit> {
    if !(m1 > 0.0 && m1 < 1.0) {
        return Err(Error::domain(format!("first moment must lie in (0, 1), got {m1}")));
    }
    let var = m2 - m1 * m1;
    if !(var >= MIN_VARIANCE) {
        return Err(Error::domain(format!("variance {var:e} too small for a beta fit")));
    }
    if !(m2 < m1) {
        return Err(Error::domain(format!("second moment {m2} must be below the first {m1}")));
    }
    let k = m1 * (1.0 - m1) / var - 1.0;
    Ok(BetaFit {
        shape_a: m1 * k,
        shape_b: (1.0 - m1) * k,
        matched_m1: m1,
        matched_m2: m2,
    })
}

impl BetaFit {
    pub fn ccdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            1.0
        } else if t >= 1.0 {
            0.0
        } else {
            1.0 - beta_reg(self.shape_a, self.shape_b, t)
        }
    }

    pub fn curve(&self, theta: f64, scope: Scope, t_grid: &[f64]) -> MetaCurve {
        let raw = t_grid.iter().map(|&t| self.ccdf(t)).collect();
        finish_curve(theta, scope, CurveMethod::BetaApprox, t_grid, raw, 0.0)
    }
}

/// Beta approximation of the meta distribution from `M₁` and `M₂`.
pub fn beta_curve(net: &NetworkConfig, scope: Scope, theta: f64, t_grid: &[f64]) -> Result<(BetaFit, MetaCurve)> {
    check_grid(t_grid)?;
    let m1 = analytics::moment(net, scope, theta, 1.0.into())?.value.re;
    let m2 = analytics::moment(net, scope, theta, 2.0.into())?.value.re;
    let fit = beta_fit(m1, m2)?;
    let curve = fit.curve(theta, scope, t_grid);
    Ok((fit, curve))
}

/// Reliability achieved by all but the worst `fraction` of links.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Percentile {
    pub fraction: f64,
    pub reliability: f64,
    /// Grid neighbours enclosing the answer.
    pub bracket: (f64, f64),
    /// The level is only reached between the grid and `t = 0` or `t = 1`;
    /// `reliability` is then that endpoint.
    pub at_boundary: bool,
}

/// Solves `F̄(θ, t) = 1 - fraction` by monotone cubic (PCHIP) interpolation
/// of the curve, using the implicit endpoints `F̄(0) = 1`, `F̄(1) = 0`.
pub fn percentile_user(curve: &MetaCurve, fraction: f64) -> Result<Percentile> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Range(format!("fraction must lie in (0, 1), got {fraction}")));
    }
    if curve.reliability.is_empty() || curve.reliability.len() != curve.ccdf.len() {
        return Err(Error::Range("curve has no samples".into()));
    }
    if curve.ccdf.iter().any(|v| !v.is_finite()) {
        return Err(Error::Range("curve contains non-finite values".into()));
    }
    let level = 1.0 - fraction;
    let first_implicit = curve.reliability[0] > 0.0;
    let last_implicit = *curve.reliability.last().unwrap() < 1.0;
    let (t, f) = with_endpoints(&curve.reliability, &curve.ccdf);
    let n = t.len();
    let seg = (0..n - 1)
        .find(|&k| f[k] >= level && f[k + 1] <= level)
        .ok_or_else(|| Error::Range(format!("level {level} is not crossed by the curve")))?;
    let bracket = (t[seg], t[seg + 1]);
    if first_implicit && seg == 0 {
        return Ok(Percentile {
            fraction,
            reliability: 0.0,
            bracket,
            at_boundary: true,
        });
    }
    if last_implicit && seg == n - 2 {
        return Ok(Percentile {
            fraction,
            reliability: 1.0,
            bracket,
            at_boundary: true,
        });
    }
    let d = pchip_slopes(&t, &f);
    let (t0, t1) = bracket;
    let h = t1 - t0;
    let hermite = |x: f64| {
        let s = (x - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * f[seg] + (s3 - 2.0 * s2 + s) * h * d[seg] + (-2.0 * s3 + 3.0 * s2) * f[seg + 1] + (s3 - s2) * h * d[seg + 1]
    };
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hermite(mid) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.max(1.0) {
            break;
        }
    }
    Ok(Percentile {
        fraction,
        reliability: 0.5 * (lo + hi),
        bracket,
        at_boundary: false,
    })
}

/// Fritsch-Carlson / Fritsch-Butland slopes for a monotone cubic.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = del[0];
        d[1] = del[0];
        return d;
    }
    for k in 1..n - 1 {
        if del[k - 1] * del[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(h[0], h[1], del[0], del[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
    d
}
