use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::{log_gamma_complex, Grid, IntegratorOptions, SchrodingerIntegrator};

/// Even/odd asymptotic phases `u_{e,o} ~ C cos(k|x| + φ_{e,o})` and the
/// transmission/reflection amplitudes they determine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousScattering {
    pub phi_e: f64,
    pub phi_o: f64,
    pub t: Complex64,
    pub r: Complex64,
}

impl ContinuousScattering {
    pub fn from_phases(phi_e: f64, phi_o: f64) -> Self {
        let e = Complex64::from_polar(1.0, 2.0 * phi_e);
        let o = Complex64::from_polar(1.0, 2.0 * phi_o);
        Self {
            phi_e,
            phi_o,
            t: (e - o) / 2.0,
            r: (e + o) / 2.0,
        }
    }

    pub fn flux(&self) -> f64 {
        self.t.norm_sqr() + self.r.norm_sqr()
    }

    /// `φ_e - φ_o` reduced to `[0, π)`.
    pub fn phase_gap(&self) -> f64 {
        reduce_mod_pi(self.phi_e - self.phi_o)
    }
}

/// Reduces an angle to `[0, π)`.
pub fn reduce_mod_pi(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = x.rem_euclid(pi);
    if pi - r < 1e-15 {
        0.0
    } else {
        r
    }
}

/// Distance between two angles modulo π.
pub fn distance_mod_pi(a: f64, b: f64) -> f64 {
    let d = reduce_mod_pi(a - b);
    d.min(std::f64::consts::PI - d)
}

fn check_args(lambda: f64, scale: f64, k: f64) -> Result<()> {
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!("need lambda > 1, got {lambda}")));
    }
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain("k = 0 is excluded".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale must be positive, got {scale}")));
    }
    Ok(())
}

/// Phases from Gamma-function ratios, with `a` the well scale:
///
/// `φ_e = arg Γ(iκ) e^{-iκ log 2} / [Γ(λ/2 + iκ/2) Γ((1-λ)/2 + iκ/2)]`,
/// `φ_o = arg Γ(iκ) e^{-iκ log 2} / [Γ((λ+1)/2 + iκ/2) Γ(1 - λ/2 + iκ/2)]`,
/// `κ = k/a`.
pub fn continuous_scattering(lambda: f64, scale: f64, k: f64) -> Result<ContinuousScattering> {
    check_args(lambda, scale, k)?;
    let kappa = k / scale;
    let ik = Complex64::new(0.0, kappa);
    let half = Complex64::new(0.0, kappa / 2.0);
    let common = log_gamma_complex(ik)? - ik * std::f64::consts::LN_2;
    let even = common
        - log_gamma_complex(lambda / 2.0 + half)?
        - log_gamma_complex((1.0 - lambda) / 2.0 + half)?;
    let odd = common
        - log_gamma_complex((lambda + 1.0) / 2.0 + half)?
        - log_gamma_complex(1.0 - lambda / 2.0 + half)?;
    Ok(ContinuousScattering::from_phases(wrap(even.im), wrap(odd.im)))
}

fn wrap(angle: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = (angle + pi).rem_euclid(2.0 * pi) - pi;
    if r == -pi {
        pi
    } else {
        r
    }
}

/// `arctan(sinh(πκ) / sin(πλ))` reduced to `[0, π)`; `π/2` at integer λ.
pub fn phase_gap_formula(lambda: f64, scale: f64, k: f64) -> f64 {
    let s = (std::f64::consts::PI * lambda).sin();
    let sh = (std::f64::consts::PI * k / scale).sinh();
    reduce_mod_pi(sh.atan2(s))
}

/// Relative RMS residual above which a phase fit is rejected.
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-6;

/// Phases of the even and odd real solutions of `H u = k² u` for any
/// well, by integrating outward from the center and fitting
/// `A cos kx + B sin kx` over the outer 10% of the grid's right half.
pub fn ode_phases(pot: &Potential, k: f64, grid: &Grid) -> Result<ContinuousScattering> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain("k = 0 is excluded".into()));
    }
    let center = pot.shift();
    let x_end = grid.x_max();
    if x_end <= center {
        return Err(Error::Precondition("grid does not extend right of the well".into()));
    }
    let fit_start = center + 0.9 * (x_end - center);
    if pot.value(fit_start).abs() >= 1e-10 * k * k {
        return Err(Error::Precondition(format!(
            "|V| = {:e} at the fit window start {fit_start}; need < 1e-10 k²",
            pot.value(fit_start).abs()
        )));
    }
    let v = |x: f64| pot.value(x);
    let solver = SchrodingerIntegrator::new(&v, k * k).with_options(IntegratorOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..IntegratorOptions::default()
    });
    let fit_points: Vec<f64> = (0..grid.len())
        .map(|i| grid.x(i))
        .filter(|&x| x >= fit_start)
        .collect();
    if fit_points.len() < 8 {
        return Err(Error::Precondition("fewer than 8 grid points in the fit window".into()));
    }
    let phase = |initial: [Complex64; 2]| -> Result<f64> {
        let mut h = 0.0;
        let mut y = solver.advance(center, fit_points[0], initial, &mut h)?;
        let mut x = fit_points[0];
        let mut samples = Vec::with_capacity(fit_points.len());
        for &xp in &fit_points {
            y = solver.advance(x, xp, y, &mut h)?;
            x = xp;
            samples.push((xp - center, y[0].re));
        }
        fit_cosine(&samples, k)
    };
    let phi_e = phase([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)])?;
    let phi_o = phase([Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)])?;
    Ok(ContinuousScattering::from_phases(phi_e, phi_o))
}

/// Least-squares `u ≈ A cos kx + B sin kx`; returns `φ` with
/// `u ≈ C cos(kx + φ)`.
fn fit_cosine(samples: &[(f64, f64)], k: f64) -> Result<f64> {
    let (mut cc, mut cs, mut ss, mut cu, mut su) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, u) in samples {
        let (s, c) = (k * x).sin_cos();
        cc += c * c;
        cs += c * s;
        ss += s * s;
        cu += c * u;
        su += s * u;
    }
    let det = cc * ss - cs * cs;
    if det.abs() < 1e-12 * cc * ss {
        return Err(Error::Extraction("fit window too short to separate cos and sin".into()));
    }
    let a = (cu * ss - su * cs) / det;
    let b = (su * cc - cu * cs) / det;
    let amp = a.hypot(b);
    let mut res = 0.0;
    for &(x, u) in samples {
        let (s, c) = (k * x).sin_cos();
        res += (u - a * c - b * s).powi(2);
    }
    let rms = (res / samples.len() as f64).sqrt();
    if !(rms <= FIT_RESIDUAL_LIMIT * amp) {
        return Err(Error::Extraction(format!(
            "relative fit residual {:e} above {FIT_RESIDUAL_LIMIT:e}",
            rms / amp
        )));
    }
    Ok((-b).atan2(a))
}

/// [`ode_phases`] for the continuous-λ family (`shift = 0`).
pub fn ode_phase_extraction(lambda: f64, scale: f64, k: f64, grid: &Grid) -> Result<ContinuousScattering> {
    check_args(lambda, scale, k)?;
    let pot = Potential::continuous(lambda)?.with_scale(scale)?;
    ode_phases(&pot, k, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{transmission, Side};

    fn fit_grid() -> Grid {
        Grid::new(-40.0, 40.0, 4001).unwrap()
    }

    #[test]
    fn flux_is_conserved() {
        for &lambda in &[1.5, 2.0, 2.5, 3.3, 7.1] {
            for &k in &[-1.0, 0.5, 1.0, 2.0] {
                let s = continuous_scattering(lambda, 1.0, k).unwrap();
                assert!((s.flux() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn phase_gap_matches_arctan() {
        for &lambda in &[1.5, 2.5, 3.3, 4.9] {
            for &k in &[0.3, 1.0, 2.0] {
                let s = continuous_scattering(lambda, 1.0, k).unwrap();
                let gap = phase_gap_formula(lambda, 1.0, k);
                assert!(distance_mod_pi(s.phase_gap(), gap) < 1e-8, "λ={lambda} k={k}");
            }
        }
    }

    #[test]
    fn integer_lambda_is_reflectionless() {
        let s = continuous_scattering(2.0, 1.0, 1.0).unwrap();
        assert!(s.r.norm() < 1e-12);
        assert!((s.t.norm() - 1.0).abs() < 1e-12);
        // the amplitude matches the closed-form transmission coefficient
        let t = transmission(1, 1.0, Side::Plus).unwrap();
        assert!((s.t - t).norm() < 1e-10, "{} vs {}", s.t, t);
        for &(lambda, k) in &[(3.0, 0.5), (4.0, 1.3)] {
            let s = continuous_scattering(lambda, 1.0, k).unwrap();
            let t = transmission(lambda as u32 - 1, k, Side::Plus).unwrap();
            assert!((s.t - t).norm() < 1e-10);
        }
    }

    #[test]
    fn two_and_a_half_transmission() {
        let s = continuous_scattering(2.5, 1.0, 1.0).unwrap();
        let expect = (std::f64::consts::PI.sinh() / (2.5 * std::f64::consts::PI).sin())
            .atan()
            .sin()
            .powi(2);
        assert!((s.t.norm_sqr() - expect).abs() < 1e-12);
    }

    #[test]
    fn ode_phases_match_gamma_phases() {
        for &(lambda, k) in &[(2.0, 1.0), (3.0, 0.5), (2.5, 1.0), (1.5, 2.0)] {
            let g = continuous_scattering(lambda, 1.0, k).unwrap();
            let o = ode_phase_extraction(lambda, 1.0, k, &fit_grid()).unwrap();
            assert!(distance_mod_pi(g.phi_e, o.phi_e) < 1e-4, "λ={lambda} k={k}");
            assert!(distance_mod_pi(g.phi_o, o.phi_o) < 1e-4, "λ={lambda} k={k}");
        }
        let o = ode_phase_extraction(2.0, 1.0, 1.0, &fit_grid()).unwrap();
        assert!(distance_mod_pi(o.phase_gap(), std::f64::consts::FRAC_PI_2) < 1e-4);
    }

    #[test]
    fn scaled_phases_agree() {
        let g = continuous_scattering(2.5, 2.0, 1.5).unwrap();
        let o = ode_phase_extraction(2.5, 2.0, 1.5, &fit_grid()).unwrap();
        assert!(distance_mod_pi(g.phi_e, o.phi_e) < 1e-4);
        assert!(distance_mod_pi(g.phi_o, o.phi_o) < 1e-4);
    }

    #[test]
    fn free_phases_vanish() {
        let o = ode_phases(&Potential::free(), 0.8, &fit_grid()).unwrap();
        assert!(distance_mod_pi(o.phi_e, 0.0) < 1e-8);
        assert!(distance_mod_pi(o.phi_o, std::f64::consts::FRAC_PI_2) < 1e-8);
        assert!((o.t - 1.0).norm() < 1e-8 && o.r.norm() < 1e-8);
    }

    #[test]
    fn bad_inputs() {
        assert!(continuous_scattering(1.0, 1.0, 1.0).is_err());
        assert!(continuous_scattering(2.5, 1.0, 0.0).is_err());
        let short = Grid::new(-5.0, 5.0, 201).unwrap();
        assert!(matches!(ode_phase_extraction(2.5, 1.0, 1.0, &short), Err(Error::Precondition(_))));
    }
}
