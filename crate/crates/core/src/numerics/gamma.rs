use num_complex::Complex64;

use crate::error::{Error, Result};

/// Stirling coefficients B_{2m} / (2m (2m-1)) for m = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const SHIFT_TARGET: f64 = 12.0;

/// Principal branch of `log Γ(z)`: the continuation from the positive real
/// axis with the cut along the negative real axis.
///
/// Shifts `z` upward with `Γ(z) = Γ(z + m) / z(z+1)…(z+m-1)` until the real
/// part reaches 12, then sums the Stirling series.
pub fn log_gamma_complex(z: Complex64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Domain(format!("log-gamma of non-finite {z}")));
    }
    if z.im == 0.0 && z.re <= 0.0 && z.re.fract() == 0.0 {
        return Err(Error::Domain(format!("log-gamma pole at z = {}", z.re)));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < SHIFT_TARGET {
        shift += w.ln();
        w += 1.0;
    }
    Ok(stirling(w) - shift)
}

fn stirling(w: Complex64) -> Complex64 {
    let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = Complex64::new(0.0, 0.0);
    for c in STIRLING {
        series += c * term;
        term *= inv2;
    }
    (w - 0.5) * w.ln() - w + half_ln_2pi + series
}

/// `Γ(z)` through [`log_gamma_complex`].
pub fn gamma_complex(z: Complex64) -> Result<Complex64> {
    log_gamma_complex(z).map(|l| l.exp())
}
