use num_complex::Complex64;
use rayon::prelude::*;
use std::io::Write;

use super::windows::DyadicSystem;
use crate::error::{Error, Result};
use crate::numerics::{FunctionSample, Grid, KQuadrature};
use crate::scattering::Potential;
use crate::spectral::{max_band, SpectralBasis, TransformCoefficients};

/// Band outputs `φ_j(H) f` for consecutive `j`, starting at `first`.
///
/// Bands produced by analysis also keep their transform coefficients;
/// band functions have slowly decaying tails, and synthesis from the
/// coefficients avoids re-transforming grid-truncated samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BandDecomposition {
    pub first: i32,
    pub bands: Vec<FunctionSample>,
    pub spectra: Option<Vec<TransformCoefficients>>,
}

impl BandDecomposition {
    pub fn grid(&self) -> &Grid {
        self.bands[0].grid()
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> + '_ {
        (0..self.bands.len()).map(move |m| self.first + m as i32)
    }

    pub fn band(&self, j: i32) -> Option<&FunctionSample> {
        let m = j - self.first;
        if m < 0 {
            None
        } else {
            self.bands.get(m as usize)
        }
    }

    /// `Σ_j ‖band_j‖₂²`.
    pub fn energy(&self) -> f64 {
        self.bands.iter().map(|b| b.l2_norm().powi(2)).sum()
    }

    /// Columns `x, band<j>_re, band<j>_im, …`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "x")?;
        for j in self.indices() {
            write!(w, ",band{j}_re,band{j}_im")?;
        }
        writeln!(w)?;
        let g = *self.grid();
        for i in 0..g.len() {
            write!(w, "{}", g.x(i))?;
            for b in &self.bands {
                let v = b.values()[i];
                write!(w, ",{:e},{:e}", v.re, v.im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Highest band reachable by both the grid and the transform nodes.
pub fn check_band_limit(basis: &SpectralBasis, top: i32) -> Result<()> {
    let grid_max = max_band(basis.grid());
    if top > grid_max {
        return Err(Error::Resolution(format!(
            "band {top} beyond the grid limit {grid_max}"
        )));
    }
    let reach = (top as f64 / 2.0).exp2();
    if basis.kquad().k_max() + basis.kquad().max_gap() < reach {
        return Err(Error::Resolution(format!(
            "transform nodes stop at |k| = {:.4}, band {top} needs {reach:.4}",
            basis.kquad().k_max()
        )));
    }
    Ok(())
}

/// A spectral basis whose nodes cover bands `0..=top`.
pub fn basis_for_bands(pot: &Potential, grid: &Grid, top: i32) -> Result<SpectralBasis> {
    let grid_max = max_band(grid);
    if top > grid_max {
        return Err(Error::Resolution(format!(
            "band {top} beyond the grid limit {grid_max}"
        )));
    }
    let kquad = KQuadrature::for_grid(grid, (top as f64 / 2.0).exp2())?;
    SpectralBasis::new(pot, grid, &kquad)
}

fn bands_from(
    basis: &SpectralBasis,
    coeffs: &TransformCoefficients,
    indices: Vec<i32>,
    symbol: impl Fn(i32, f64) -> f64 + Sync,
) -> Result<BandDecomposition> {
    let first = indices[0];
    let pairs = indices
        .into_par_iter()
        .map(|j| {
            let c = coeffs.multiplied(|xi| Complex64::new(symbol(j, xi), 0.0));
            Ok((basis.inverse(&c)?, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let (bands, spectra) = pairs.into_iter().unzip();
    Ok(BandDecomposition {
        first,
        bands,
        spectra: Some(spectra),
    })
}

/// `{Φ(H) f, φ_1(H) f, …, φ_J(H) f}` with a prepared basis.
pub fn analysis_with(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    f: &FunctionSample,
    top: i32,
) -> Result<BandDecomposition> {
    analysis_from_coeffs(basis, system, &basis.forward(f)?, top)
}

/// Inhomogeneous analysis of data already on the transform side.
pub fn analysis_from_coeffs(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    coeffs: &TransformCoefficients,
    top: i32,
) -> Result<BandDecomposition> {
    if top < 0 {
        return Err(Error::InvalidParameter(format!("max band must be ≥ 0, got {top}")));
    }
    check_band_limit(basis, top)?;
    bands_from(basis, coeffs, (0..=top).collect(), |j, xi| system.analysis_symbol(j, xi))
}

/// Inhomogeneous analysis `Qf = {φ_j(H) f}_{j=0..J}`.
pub fn analysis(
    f: &FunctionSample,
    system: &DyadicSystem,
    pot: &Potential,
    top: i32,
) -> Result<BandDecomposition> {
    let basis = basis_for_bands(pot, f.grid(), top)?;
    analysis_with(&basis, system, f, top)
}

/// `{φ_j(H) f}_{j=-J..J}` for the homogeneous scale.
pub fn homogeneous_analysis_with(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    f: &FunctionSample,
    depth: i32,
) -> Result<BandDecomposition> {
    homogeneous_range_with(basis, system, f, -depth, depth)
}

/// `{φ_j(H) f}_{j=lo..=hi}` with `lo < 0`.
pub fn homogeneous_range_with(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    f: &FunctionSample,
    lo: i32,
    hi: i32,
) -> Result<BandDecomposition> {
    if lo >= 0 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "homogeneous range needs lo < 0 ≤ hi, got {lo}..={hi}"
        )));
    }
    homogeneous_from_coeffs(basis, system, &basis.forward(f)?, lo, hi)
}

/// Homogeneous analysis `{φ_j(H) f}_{j=lo..=hi}` of transform data.
pub fn homogeneous_from_coeffs(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    coeffs: &TransformCoefficients,
    lo: i32,
    hi: i32,
) -> Result<BandDecomposition> {
    if lo >= 0 || hi < lo {
        return Err(Error::InvalidParameter(format!(
            "homogeneous range needs lo < 0 ≤ hi, got {lo}..={hi}"
        )));
    }
    check_band_limit(basis, hi)?;
    bands_from(basis, coeffs, (lo..=hi).collect(), |j, xi| {
        system.homogeneous_symbol(j, xi)
    })
}

/// `R{g_j} = Σ_j ψ_j(H) g_j` with a prepared basis.
pub fn synthesis_with(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    bands: &BandDecomposition,
) -> Result<FunctionSample> {
    let stored = bands
        .spectra
        .as_ref()
        .filter(|s| s.iter().all(|c| c.kquad == *basis.kquad() && c.pp_values.len() == basis.bound_states().len()));
    let parts = bands
        .indices()
        .zip(&bands.bands)
        .enumerate()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(m, (j, g))| {
            let c = match stored {
                Some(s) => s[m].clone(),
                None => basis.forward(g)?,
            };
            let sym = |xi: f64| {
                let v = if bands.first < 0 {
                    system.homogeneous_symbol(j, xi)
                } else {
                    system.synthesis_symbol(j, xi)
                };
                Complex64::new(v, 0.0)
            };
            Ok(c.multiplied(sym))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut total = TransformCoefficients::zeros(basis.kquad().clone(), basis.energies());
    for p in parts {
        for (t, v) in total.ac_values.iter_mut().zip(&p.ac_values) {
            *t += v;
        }
        for (t, v) in total.pp_values.iter_mut().zip(&p.pp_values) {
            *t += v;
        }
    }
    basis.inverse(&total)
}

pub fn synthesis(
    bands: &BandDecomposition,
    system: &DyadicSystem,
    pot: &Potential,
) -> Result<FunctionSample> {
    let top = bands.indices().last().unwrap_or(0).max(0);
    let basis = basis_for_bands(pot, bands.grid(), top)?;
    synthesis_with(&basis, system, bands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::Variant;

    fn setup(n: u32) -> (SpectralBasis, DyadicSystem) {
        let g = Grid::desk();
        (
            basis_for_bands(&Potential::integer(n), &g, 6).unwrap(),
            DyadicSystem::new(Variant::SqrtPartition),
        )
    }

    fn bump(g: Grid) -> FunctionSample {
        FunctionSample::from_fn(g, |x| {
            Complex64::new((-(x - 1.0).powi(2) / 2.0).exp(), 0.3 * (-(x * x)).exp())
        })
    }

    #[test]
    fn zero_in_zero_out() {
        let (basis, sys) = setup(1);
        let z = FunctionSample::zeros(*basis.grid());
        let d = analysis_with(&basis, &sys, &z, 6).unwrap();
        assert_eq!(d.bands.len(), 7);
        assert!(d.bands.iter().all(|b| b.l2_norm() == 0.0));
        assert_eq!(synthesis_with(&basis, &sys, &d).unwrap().l2_norm(), 0.0);
    }

    #[test]
    fn reconstruction_and_energy() {
        for n in 0..=2 {
            let (basis, _) = setup(n);
            for v in Variant::ALL {
                let sys = DyadicSystem::new(v);
                let f = bump(*basis.grid());
                let d = analysis_with(&basis, &sys, &f, 6).unwrap();
                let back = synthesis_with(&basis, &sys, &d).unwrap();
                let err = back.relative_l2_error(&f).unwrap();
                assert!(err < 1e-4, "n={n} {v}: {err:e}");
                assert!(d.energy() <= 3.0 * f.l2_norm().powi(2));
            }
        }
    }

    #[test]
    fn single_band_synthesis_is_psi_multiplier() {
        let (basis, sys) = setup(2);
        let g = bump(*basis.grid());
        let d = BandDecomposition {
            first: 3,
            bands: vec![g.clone()],
            spectra: None,
        };
        let direct = synthesis_with(&basis, &sys, &d).unwrap();
        let expect = basis.apply_real(|xi| sys.synthesis_symbol(3, xi), &g).unwrap();
        assert!(direct.relative_l2_error(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn homogeneous_reconstruction() {
        let (basis, sys) = setup(1);
        let g = *basis.grid();
        // no bound-state component and little energy near k = 0
        let f = FunctionSample::from_real_fn(g, |x| (-x * x / 2.0).exp() * x.cos());
        let e1 = &basis.bound_states()[0].samples;
        let f = f.sub(&e1.scaled(e1.inner(&f).unwrap())).unwrap();
        let d = homogeneous_range_with(&basis, &sys, &f, -20, 6).unwrap();
        assert_eq!(d.first, -20);
        assert_eq!(homogeneous_analysis_with(&basis, &sys, &f, 3).unwrap().bands.len(), 7);
        let back = synthesis_with(&basis, &sys, &d).unwrap();
        assert!(back.relative_l2_error(&f).unwrap() < 1e-4);
    }

    #[test]
    fn band_limit_is_enforced() {
        let (basis, sys) = setup(0);
        let f = bump(*basis.grid());
        assert!(matches!(analysis_with(&basis, &sys, &f, 7), Err(Error::Resolution(_))));
        let coarse = Grid::new(-40.0, 40.0, 161).unwrap();
        assert!(basis_for_bands(&Potential::free(), &coarse, 12).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(-30.0, 30.0, 301).unwrap();
        let basis = basis_for_bands(&Potential::integer(1), &g, 2).unwrap();
        let sys = DyadicSystem::new(Variant::ShiftedSqrt);
        let d = analysis_with(&basis, &sys, &bump(g), 2).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "x,band0_re,band0_im,band1_re,band1_im,band2_re,band2_im");
        assert_eq!(lines.count(), 301);
    }
}
