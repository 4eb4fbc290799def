//! Special functions behind the moment formulas.
//!
//! Only the Gauss hypergeometric patterns that occur for Poisson networks with
//! Rayleigh fading are supported:
//!
//! * `₂F₁(b, -δ; 1-δ; -z)` for complex `b` and `z >= 0` ([`hyp2f1_moment`]),
//! * `₂F₁(1, 1-δ; 2-δ; -z)` ([`hyp2f1_series_delay`]),
//! * `δ x^k/(k-δ) ₂F₁(k, k-δ; k-δ+1; -x)` ([`activity_kernel`]),
//!
//! together with the large-argument constant `T(b)`.

pub mod gamma;
pub mod quad;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use quad::Tolerance;

/// Path-loss exponent `α > 2` together with `δ = 2/α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PathLoss {
    alpha: f64,
    delta: f64,
}

impl PathLoss {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 2.0) {
            return Err(Error::domain(format!("path-loss exponent must be > 2, got {alpha}")));
        }
        Ok(PathLoss {
            alpha,
            delta: 2.0 / alpha,
        })
    }

    pub fn from_delta(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
        }
        Ok(PathLoss {
            alpha: 2.0 / delta,
            delta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

impl TryFrom<f64> for PathLoss {
    type Error = Error;
    fn try_from(alpha: f64) -> Result<Self> {
        PathLoss::from_alpha(alpha)
    }
}

impl From<PathLoss> for f64 {
    fn from(p: PathLoss) -> f64 {
        p.alpha
    }
}

/// Moment order `b`; purely imaginary orders drive the Gil-Pelaez inversion.
pub type ComplexOrder = Complex64;

/// Normalized sinc, `sin(πx)/(πx)`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Rising factorial `(q)_m = q (q+1) ... (q+m-1)`.
pub fn pochhammer(q: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, i| acc * (q + i as f64))
}

/// Generalized binomial coefficient `C(b, k)` for complex `b`.
pub fn binomial(b: Complex64, k: usize) -> Complex64 {
    (0..k).fold(Complex64::new(1.0, 0.0), |acc, m| acc * (b - m as f64) / (m as f64 + 1.0))
}

fn cexpm1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        w * (1.0 + w * (0.5 + w * (1.0 / 6.0 + w / 24.0)))
    } else {
        w.exp() - 1.0
    }
}

/// `(1 - (1+x)^(-b)) / x`, accurate as `x → 0` where it tends to `b`.
fn secant_kernel(x: f64, b: Complex64) -> Complex64 {
    if x == 0.0 {
        return b;
    }
    -cexpm1(-b * x.ln_1p()) / x
}

/// Orders whose imaginary part exceeds this use the contour representation.
const CONTOUR_SWITCH: f64 = 4.0;

/// `₂F₁(b, -δ; 1-δ; -z)` with default tolerances (1e-10 relative).
pub fn hyp2f1_moment(b: ComplexOrder, pathloss: PathLoss, z: f64) -> Result<Complex64> {
    hyp2f1_moment_with(b, pathloss.delta(), z, &Tolerance::default())
}

/// `₂F₁(b, -δ; 1-δ; -z)` from its integral representation
/// `1 + ∫₁^∞ (1 - (1 + z s^(-1/δ))^(-b)) ds`.
///
/// With `x = z s^(-1/δ)` and `x = w^(1/(1-δ))` the semi-infinite integral
/// becomes `δ/(1-δ) z^δ ∫₀^{z^(1-δ)} (1-(1+x)^(-b))/x dw`, which has a smooth
/// integrand. For orders with a large imaginary part the oscillation is
/// avoided by splitting off `z^δ T(b)` and rotating the remaining tail into
/// the complex plane, see [`hyp2f1_moment_contour`].
pub fn hyp2f1_moment_with(b: ComplexOrder, delta: f64, z: f64, tol: &Tolerance) -> Result<Complex64> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("hypergeometric argument must be -z with z >= 0, got z = {z}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    if z == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if b.im.abs() >= CONTOUR_SWITCH && b.re > -0.5 * delta {
        if b.im > 0.0 {
            hyp2f1_moment_contour(b, delta, z, tol)
        } else {
            hyp2f1_moment_contour(b.conj(), delta, z, tol).map(|v| v.conj())
        }
    } else {
        hyp2f1_moment_direct(b, delta, z, tol)
    }
}

pub(crate) fn hyp2f1_moment_direct(b: Complex64, delta: f64, z: f64, tol: &Tolerance) -> Result<Complex64> {
    let expo = 1.0 / (1.0 - delta);
    let upper = z.powf(1.0 - delta);
    let mut breaks = Vec::new();
    let mut w = 1.0;
    while w < upper {
        breaks.push(w);
        w *= 8.0;
    }
    let r = quad::integrate_with_breaks(|w| secant_kernel(w.powf(expo), b), 0.0, upper, &breaks, tol)?;
    Ok(1.0 + r.value * (delta / (1.0 - delta) * z.powf(delta)))
}

/// Contour form for `Im b > 0`:
/// `₂F₁ = z^δ [T(b) + δ ∫_z^∞ (1+x)^(-b) x^(-δ-1) dx]` where the tail, written
/// in `y = ln(1+x)`, is integrated along `y = ln(1+z) - i s`, on which
/// `e^(-b y)` decays like `e^(-s Im b)`.
pub(crate) fn hyp2f1_moment_contour(b: Complex64, delta: f64, z: f64, tol: &Tolerance) -> Result<Complex64> {
    debug_assert!(b.im > 0.0);
    let y0 = z.ln_1p();
    let q = 1.0 + z;
    let s_max = 45.0 / b.im;
    let two_pi = 2.0 * PI;
    let integrand = |s: f64| {
        let (sin_s, cos_s) = s.sin_cos();
        let w = Complex64::new(q * cos_s - 1.0, -q * sin_s);
        // continuous branch of ln(w) along the path; w winds clockwise around 0
        let winding = ((s + PI) / two_pi).floor();
        let ln_w = Complex64::new(w.norm().ln(), w.im.atan2(w.re) - two_pi * winding);
        let y = Complex64::new(y0, -s);
        let v = ((1.0 - b) * y - (1.0 + delta) * ln_w).exp();
        Complex64::new(v.im, -v.re)
    };
    let mut breaks = Vec::new();
    for m in 0..4 {
        breaks.push(z * 10f64.powi(m));
    }
    let mut k = 1.0;
    while two_pi * k < s_max {
        let c = two_pi * k;
        breaks.extend_from_slice(&[c - 10.0 * z, c - z, c, c + z, c + 10.0 * z]);
        k += 1.0;
    }
    let tail = quad::integrate_with_breaks(integrand, 0.0, s_max, &breaks, tol)?;
    let t = t_integral_gamma_raw(b, delta);
    Ok(z.powf(delta) * (t + delta * tail.value))
}

fn ln_gamma_shifted(z: Complex64) -> Complex64 {
    if z.re >= 0.0 {
        gamma::ln_gamma(z)
    } else {
        gamma::ln_gamma(z + 1.0) - z.ln()
    }
}

fn t_integral_gamma_raw(b: Complex64, delta: f64) -> Complex64 {
    let lg = ln_gamma_shifted(b + delta) - ln_gamma_shifted(b);
    gamma::gamma_real(1.0 - delta) * lg.exp()
}

/// Closed form `T(b) = Γ(1-δ) Γ(b+δ) / Γ(b)`, valid for `Re b > -δ`.
pub fn t_integral_gamma(b: ComplexOrder, pathloss: PathLoss) -> Result<Complex64> {
    let delta = pathloss.delta();
    if b.re <= -delta + 1e-12 || (b.im == 0.0 && b.re == 0.0) {
        return Err(Error::domain(format!("T(b) closed form requires Re b > -delta and b != 0, got {b}")));
    }
    Ok(t_integral_gamma_raw(b, delta))
}

/// `T(b) = ∫₀^∞ (1 - (1 + r^(-1/δ))^(-b)) dr` by quadrature.
///
/// Requires `Re b > 0`.
pub fn t_integral(b: ComplexOrder, pathloss: PathLoss) -> Result<Complex64> {
    t_integral_with(b, pathloss, &Tolerance::default())
}

pub fn t_integral_with(b: ComplexOrder, pathloss: PathLoss, tol: &Tolerance) -> Result<Complex64> {
    if b.re <= 0.0 {
        return Err(Error::domain(format!("T(b) diverges unless Re b > 0, got b = {b}")));
    }
    let delta = pathloss.delta();
    // [0, 1]: ln(1 + r^(-1/δ)) = -ln(r)/δ + ln(1 + r^(1/δ))
    let head = quad::integrate(
        |r| {
            let l = -r.ln() / delta + r.powf(1.0 / delta).ln_1p();
            1.0 - (-b * l).exp()
        },
        0.0,
        1.0,
        tol,
    )?;
    // [1, ∞): r = v^(-δ/(1-δ)) turns the r^(-1/δ) decay into a smooth integrand
    let p = delta / (1.0 - delta);
    let expo = 1.0 / (1.0 - delta);
    let tail = quad::integrate(|v| p * secant_kernel(v.powf(expo), b), 0.0, 1.0, tol)?;
    Ok(head.value + tail.value)
}

/// Small-argument asymptote `1 + b z δ/(1-δ)`.
pub fn hyp2f1_small_z_asymptote(b: ComplexOrder, pathloss: PathLoss, z: f64) -> Complex64 {
    let delta = pathloss.delta();
    1.0 + b * (z * delta / (1.0 - delta))
}

const SERIES_TOL: f64 = 1e-14;
const SERIES_CAP: usize = 10_000;

/// `₂F₁(1, 1-δ; 2-δ; -z)` for `z >= 0`.
///
/// Euler's transformation gives `(1+z)^(-1) Σ_m (1)_m/(2-δ)_m u^m` with
/// `u = z/(1+z)`; this is used for `z <= 4`. Beyond that the series slows
/// down and the complementary expansion
/// `(1-δ) z^(δ-1) [π/sin(πδ) - Σ_n (-1)^n z^(-δ-n)/(δ+n)]` is summed instead.
pub fn hyp2f1_series_delay(pathloss: PathLoss, z: f64) -> Result<f64> {
    delay_hyp(pathloss.delta(), z)
}

pub(crate) fn delay_hyp(delta: f64, z: f64) -> Result<f64> {
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::domain(format!("argument must be -z with z >= 0, got z = {z}")));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    if z <= 4.0 {
        let u = z / (1.0 + z);
        let sum = euler_series(1.0, delta, u, "2F1(1,1-d;2-d;-z)")?;
        return Ok(sum / (1.0 + z));
    }
    let mut tail = 0.0;
    let mut zpow = z.powf(-delta);
    for n in 0..SERIES_CAP {
        let term = zpow / (delta + n as f64);
        tail += if n % 2 == 0 { term } else { -term };
        if term < SERIES_TOL * tail.abs() {
            return Ok((1.0 - delta) * z.powf(delta - 1.0) * (PI / (PI * delta).sin() - tail));
        }
        zpow /= z;
    }
    Err(Error::Series {
        what: "2F1(1,1-d;2-d;-z) large-z expansion".into(),
        terms: SERIES_CAP,
        partial: tail,
        last_term: zpow,
    })
}

/// `Σ_m (k)_m / (k-δ+1)_m u^m`.
fn euler_series(k: f64, delta: f64, u: f64, what: &str) -> Result<f64> {
    let mut coef = 1.0;
    let mut sum = 1.0;
    for m in 0..SERIES_CAP {
        let mf = m as f64;
        coef *= u * (k + mf) / (k - delta + 1.0 + mf);
        sum += coef;
        if coef < SERIES_TOL * sum {
            return Ok(sum);
        }
    }
    Err(Error::Series {
        what: what.into(),
        terms: SERIES_CAP,
        partial: sum,
        last_term: coef,
    })
}

/// `δ x^k/(k-δ) ₂F₁(k, k-δ; k-δ+1; -x)`, the k-th term kernel of the ALOHA
/// moment series. Equals `δ ∫₀¹ s^(-δ-1) (xs/(1+xs))^k ds`.
pub fn activity_kernel(k: usize, delta: f64, x: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("activity kernel starts at k = 1"));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("activity kernel needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    if x <= 50.0 {
        // Pfaff: ₂F₁(k,k-δ;k-δ+1;-x) = (1+x)^(-k) Σ_m (k)_m/(k-δ+1)_m u^m
        let u = x / (1.0 + x);
        let s = euler_series(kf, delta, u, "2F1(k,k-d;k-d+1;-x)")?;
        return Ok(delta / (kf - delta) * u.powi(k as i32) * s);
    }
    // s = e^(-τ): δ ∫₀^∞ exp(δτ - k ln(1 + e^τ/x)) dτ
    let lx = x.ln();
    let tau_max = lx + (45.0 + delta * lx) / (kf - delta) + 5.0;
    let tol = Tolerance::new(0.0, 1e-12);
    let r = quad::integrate_with_breaks(
        |tau| Complex64::new((delta * tau - kf * (tau - lx).exp().ln_1p()).exp(), 0.0),
        0.0,
        tau_max,
        &[lx],
        &tol,
    )?;
    Ok(delta * r.value.re)
}
