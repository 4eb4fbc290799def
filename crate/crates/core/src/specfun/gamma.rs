//! Log-gamma of a complex argument in the closed right half-plane.

use num_complex::Complex64;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_4;

/// Principal branch of `ln Γ(z)` for `Re z > 0` (or `z` off the non-positive
/// real axis with `Re z >= 0`).
///
/// Stirling's series after shifting `z` to modulus at least 15 with the
/// recurrence `Γ(z+1) = z Γ(z)`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re >= 0.0 && z.norm() > 0.0, "ln_gamma requires Re z >= 0, z != 0");
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.norm() < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    // Bernoulli terms B_{2k} / (2k (2k-1) w^{2k-1})
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0 + inv2 * (-691.0 / 360_360.0 + inv2 / 156.0))))));
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// `Γ(z)` for real positive `x`.
pub fn gamma_real(x: f64) -> f64 {
    ln_gamma(Complex64::new(x, 0.0)).re.exp()
}
