use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::littlewood_paley::{
    analysis_from_coeffs, basis_for_bands, homogeneous_from_coeffs, peetre_sup, BandDecomposition,
    DyadicSystem,
};
use crate::numerics::{lp_norm_real, FunctionSample, Grid};
use crate::scattering::Potential;
use crate::spectral::{SpectralBasis, TransformCoefficients};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Triebel–Lizorkin: `ℓ^q` over bands inside, `L^p` outside.
    F,
    /// Besov: `L^p` per band inside, `ℓ^q` outside.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flavor {
    Plain,
    /// Bands replaced by their Peetre maximal functions.
    Peetre,
}

/// Parameters of one quasi-norm. `alpha` is the smoothness index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub family: Family,
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
    pub homogeneous: bool,
    /// Top band `J`; homogeneous norms run over `-J..=J`.
    pub top: i32,
    pub s: f64,
    pub flavor: Flavor,
}

impl NormSpec {
    /// Inhomogeneous plain norm with `J = 6` and `s = 3`.
    pub fn new(family: Family, alpha: f64, p: f64, q: f64) -> Self {
        Self {
            family,
            alpha,
            p,
            q,
            homogeneous: false,
            top: 6,
            s: 3.0,
            flavor: Flavor::Plain,
        }
    }

    pub fn tl(alpha: f64, p: f64, q: f64) -> Self {
        Self::new(Family::F, alpha, p, q)
    }

    pub fn besov(alpha: f64, p: f64, q: f64) -> Self {
        Self::new(Family::B, alpha, p, q)
    }

    pub fn with_top(mut self, top: i32) -> Self {
        self.top = top;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        self
    }

    pub fn peetre(mut self, s: f64) -> Self {
        self.flavor = Flavor::Peetre;
        self.s = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && !v.is_nan();
        if !ok(self.p) || !ok(self.q) {
            return Err(Error::InvalidParameter(format!(
                "p and q must lie in (0, ∞], got p = {}, q = {}",
                self.p, self.q
            )));
        }
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter("smoothness must be finite".into()));
        }
        if self.top < 0 {
            return Err(Error::InvalidParameter(format!("top band must be ≥ 0, got {}", self.top)));
        }
        if self.flavor == Flavor::Peetre && !(self.s > 1.0 / self.p.min(self.q)) {
            return Err(Error::InvalidParameter(format!(
                "Peetre norms need s > 1/min(p, q) = {}, got s = {}",
                1.0 / self.p.min(self.q),
                self.s
            )));
        }
        Ok(())
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = match self.family {
            Family::F => "F",
            Family::B => "B",
        };
        write!(
            f,
            "{}{}(alpha={}, p={}, q={}, J={}{})",
            if self.homogeneous { "homogeneous " } else { "" },
            fam,
            self.alpha,
            self.p,
            self.q,
            self.top,
            match self.flavor {
                Flavor::Plain => String::new(),
                Flavor::Peetre => format!(", peetre s={}", self.s),
            }
        )
    }
}

fn lq(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else {
        let v: Vec<f64> = values.collect();
        let m = v.iter().cloned().fold(0.0, f64::max);
        if m == 0.0 {
            return 0.0;
        }
        m * v.iter().map(|x| (x / m).powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Quasi-norm from band magnitudes `|φ_j(H) f|` (or their maximal
/// functions), band `first + m` in `mags[m]`.
pub fn norm_from_magnitudes(grid: &Grid, first: i32, mags: &[Vec<f64>], spec: &NormSpec) -> Result<f64> {
    spec.validate()?;
    let weight = |m: usize| ((first + m as i32) as f64 * spec.alpha).exp2();
    match spec.family {
        Family::F => {
            let pointwise: Vec<f64> = (0..grid.len())
                .map(|i| lq(mags.iter().enumerate().map(|(m, b)| weight(m) * b[i]), spec.q))
                .collect();
            lp_norm_real(grid, &pointwise, spec.p)
        }
        Family::B => {
            let per_band = mags
                .iter()
                .enumerate()
                .map(|(m, b)| Ok(weight(m) * lp_norm_real(grid, b, spec.p)?))
                .collect::<Result<Vec<f64>>>()?;
            if spec.homogeneous || first != 0 {
                Ok(lq(per_band.into_iter(), spec.q))
            } else {
                Ok(per_band[0] + lq(per_band[1..].iter().cloned(), spec.q))
            }
        }
    }
}

/// Band decomposition and norms for many functions against one basis.
pub struct NormContext<'a> {
    pub basis: &'a SpectralBasis,
    pub system: &'a DyadicSystem,
}

impl<'a> NormContext<'a> {
    pub fn new(basis: &'a SpectralBasis, system: &'a DyadicSystem) -> Self {
        Self { basis, system }
    }

    pub fn bands(&self, f: &FunctionSample, spec: &NormSpec) -> Result<BandDecomposition> {
        self.bands_of_coeffs(&self.basis.forward(f)?, spec)
    }

    pub fn bands_of_coeffs(&self, c: &TransformCoefficients, spec: &NormSpec) -> Result<BandDecomposition> {
        if spec.homogeneous {
            homogeneous_from_coeffs(self.basis, self.system, c, -spec.top, spec.top)
        } else {
            analysis_from_coeffs(self.basis, self.system, c, spec.top)
        }
    }

    pub fn magnitudes(&self, bands: &BandDecomposition, spec: &NormSpec) -> Result<Vec<Vec<f64>>> {
        let grid = *bands.grid();
        bands
            .indices()
            .zip(&bands.bands)
            .map(|(j, b)| match spec.flavor {
                Flavor::Plain => Ok(b.abs()),
                Flavor::Peetre => peetre_sup(&grid, &b.abs(), j, spec.s),
            })
            .collect()
    }

    pub fn norm_of_bands(&self, bands: &BandDecomposition, spec: &NormSpec) -> Result<f64> {
        let mags = self.magnitudes(bands, spec)?;
        norm_from_magnitudes(bands.grid(), bands.first, &mags, spec)
    }

    pub fn norm(&self, f: &FunctionSample, spec: &NormSpec) -> Result<f64> {
        spec.validate()?;
        let bands = self.bands(f, spec)?;
        self.norm_of_bands(&bands, spec)
    }

    /// Norm of the function with transform `c`, without resampling it.
    pub fn norm_of_coeffs(&self, c: &TransformCoefficients, spec: &NormSpec) -> Result<f64> {
        spec.validate()?;
        let bands = self.bands_of_coeffs(c, spec)?;
        self.norm_of_bands(&bands, spec)
    }
}

fn one_shot(f: &FunctionSample, spec: &NormSpec, system: &DyadicSystem, pot: &Potential) -> Result<f64> {
    spec.validate()?;
    let basis = basis_for_bands(pot, f.grid(), spec.top)?;
    NormContext::new(&basis, system).norm(f, spec)
}

/// Triebel–Lizorkin quasi-norm `‖(Σ_j 2^{jαq}|φ_j(H) f|^q)^{1/q}‖_p`.
pub fn tl_norm(f: &FunctionSample, spec: &NormSpec, system: &DyadicSystem, pot: &Potential) -> Result<f64> {
    if spec.family != Family::F {
        return Err(Error::InvalidParameter("tl_norm needs an F spec".into()));
    }
    one_shot(f, spec, system, pot)
}

/// Besov quasi-norm `‖Φ(H) f‖_p + (Σ_{j≥1} 2^{jαq}‖φ_j(H) f‖_p^q)^{1/q}`.
pub fn besov_norm(f: &FunctionSample, spec: &NormSpec, system: &DyadicSystem, pot: &Potential) -> Result<f64> {
    if spec.family != Family::B {
        return Err(Error::InvalidParameter("besov_norm needs a B spec".into()));
    }
    one_shot(f, spec, system, pot)
}

/// The Peetre-maximal version of the requested norm.
pub fn maximal_norm(f: &FunctionSample, spec: &NormSpec, system: &DyadicSystem, pot: &Potential) -> Result<f64> {
    let spec = NormSpec {
        flavor: Flavor::Peetre,
        ..*spec
    };
    one_shot(f, &spec, system, pot)
}
