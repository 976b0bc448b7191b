use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};
use crate::numerics::{FunctionSample, Grid, KQuadrature};
use crate::scattering::Potential;
use crate::spectral::{SpectralBasis, TransformCoefficients};

/// `e^{-itH}` on transform data: `e^{-itk²}` on the continuous part and
/// `e^{-itE_m}` on bound states.
pub fn evolve_coeffs(c: &TransformCoefficients, t: f64) -> TransformCoefficients {
    c.multiplied(|xi| Complex64::from_polar(1.0, -t * xi))
}

/// Rejects times whose phase `e^{-itk²}` varies by more than π/4 between
/// neighbouring nodes near `k_max`.
pub fn check_phase_resolution(kquad: &KQuadrature, t: f64) -> Result<()> {
    let dk = kquad.max_gap();
    let limit = t.abs() * kquad.k_max() * dk;
    if limit > FRAC_PI_4 * (1.0 + 1e-12) {
        return Err(Error::RefinementRequired(format!(
            "|t| k_max dk = {limit:.4} exceeds π/4 at t = {t}; node spacing must be at most {:.3e}",
            FRAC_PI_4 / (t.abs() * kquad.k_max())
        )));
    }
    Ok(())
}

/// Lattice rule covering `|k| ≤ k_max` and fine enough for every
/// `|t| ≤ t_max`.
pub fn evolution_quadrature(grid: &Grid, k_max: f64, t_max: f64) -> Result<KQuadrature> {
    if !(k_max > 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameter(format!("bad k_max {k_max} or t_max {t_max}")));
    }
    let mut dk = KQuadrature::max_spacing_for(grid);
    if t_max != 0.0 {
        dk = dk.min(FRAC_PI_4 / (t_max.abs() * k_max));
    }
    // nodes stop at (n - 1/2) dk < k_max, the lattice edge sits exactly at k_max
    let n = (k_max / dk).ceil();
    KQuadrature::lattice(0.0, k_max, k_max / n, crate::numerics::Band::Full)
}

/// `e^{-itH} f` with a prepared basis.
pub fn propagate_with(basis: &SpectralBasis, f: &FunctionSample, t: f64) -> Result<FunctionSample> {
    check_phase_resolution(basis.kquad(), t)?;
    let c = basis.forward(f)?;
    basis.inverse(&evolve_coeffs(&c, t))
}

/// `ψ(t) = e^{-itH} f` through the spectral representation.
pub fn propagate(f: &FunctionSample, pot: &Potential, t: f64, kquad: &KQuadrature) -> Result<FunctionSample> {
    check_phase_resolution(kquad, t)?;
    propagate_with(&SpectralBasis::new(pot, f.grid(), kquad)?, f, t)
}

/// Closed-form free evolution of `exp(-x²/(2σ²))`.
pub fn free_gaussian(sigma: f64, t: f64, x: f64) -> Complex64 {
    let s2 = Complex64::new(sigma * sigma, 2.0 * t);
    (sigma * sigma / s2).sqrt() * (-(x * x) / (2.0 * s2)).exp()
}
