//! Globally adaptive Gauss-Kronrod (10/21) quadrature for complex integrands.
//!
//! Real and imaginary parts share the same subdivision; the error estimate of
//! an interval is the modulus of the complex Gauss/Kronrod difference, rescaled
//! the way QUADPACK does it.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            abs: 1e-14,
            rel: 1e-10,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance {
            abs,
            rel,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: Complex64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
    at_roundoff: bool,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > err {
            err = min_err;
        }
    }
    err
}

fn gk21<F: FnMut(f64) -> Complex64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);

    let mut res_g = Complex64::new(0.0, 0.0);
    let mut res_k = f_center * WGK[10];
    let mut res_abs = f_center.norm() * WGK[10];
    let mut fv1 = [Complex64::new(0.0, 0.0); 10];
    let mut fv2 = [Complex64::new(0.0, 0.0); 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let x = half * XGK[jtw];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += (f1 + f2) * WG[j];
        res_k += (f1 + f2) * WGK[jtw];
        res_abs += WGK[jtw] * (f1.norm() + f2.norm());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let x = half * XGK[jtwm1];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += (f1 + f2) * WGK[jtwm1];
        res_abs += WGK[jtwm1] * (f1.norm() + f2.norm());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).norm();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).norm() + (fv2[j] - mean).norm());
    }

    let raw_err = ((res_k - res_g) * half).norm();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let error = rescale_error(raw_err, res_abs, res_asc);
    Segment {
        a,
        b,
        value: res_k * half,
        error,
        at_roundoff: error <= 50.0 * f64::EPSILON * res_abs * 1.0001,
    }
}

/// Integrates `f` over `[a, b]`, splitting first at the supplied interior
/// breakpoints (which must lie inside `(a, b)`; out-of-range ones are ignored).
pub fn integrate_with_breaks<F>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    if a == b {
        return Ok(Integral {
            value: Complex64::new(0.0, 0.0),
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let mut points = vec![a];
    let mut sorted: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a.min(b) && x < a.max(b))
        .collect();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    if a > b {
        sorted.reverse();
    }
    sorted.dedup();
    points.extend(sorted);
    points.push(b);

    let mut segments: Vec<Segment> = points.windows(2).map(|w| gk21(&mut f, w[0], w[1])).collect();
    let mut evaluations = 21 * segments.len();

    loop {
        let value: Complex64 = segments.iter().map(|s| s.value).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        let target = tol.abs.max(tol.rel * value.norm());
        if error <= target {
            return Ok(Integral {
                value,
                abs_error: error,
                evaluations,
            });
        }
        // Only intervals that are not already at the roundoff floor are worth
        // bisecting.
        let worst = segments
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.at_roundoff && (s.b - s.a).abs() > 1e3 * f64::EPSILON * s.a.abs().max(s.b.abs()).max(f64::MIN_POSITIVE))
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).unwrap())
            .map(|(i, _)| i);
        let Some(idx) = worst else {
            // Everything is limited by floating-point roundoff.
            return Ok(Integral {
                value,
                abs_error: error,
                evaluations,
            });
        };
        if segments.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                what: format!("adaptive Gauss-Kronrod on [{a}, {b}]"),
                error_estimate: error,
            });
        }
        let seg = segments.swap_remove(idx);
        let mid = 0.5 * (seg.a + seg.b);
        segments.push(gk21(&mut f, seg.a, mid));
        segments.push(gk21(&mut f, mid, seg.b));
        evaluations += 42;
    }
}

/// Integrates a complex-valued `f` over the finite interval `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<Integral>
where
    F: FnMut(f64) -> Complex64,
{
    integrate_with_breaks(f, a, b, &[], tol)
}

/// Real-valued convenience wrapper around [`integrate`].
pub fn integrate_real<F>(mut f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x| Complex64::new(f(x), 0.0), a, b, tol).map(|r| r.value.re)
}

/// Integrates a real `f` over `[a, ∞)` through the map `x = a + s/(1-s)`.
pub fn integrate_to_infinity<F>(mut f: F, a: f64, tol: &Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_real(
        |s| {
            let one_minus = 1.0 - s;
            let v = f(a + s / one_minus) / (one_minus * one_minus);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        0.0,
        1.0,
        tol,
    )
}
