use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{FunctionSample, Grid, KQuadrature};
use crate::scattering::{bound_states, BoundState, DistortedWaves, Potential};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const CHUNK: usize = 256;

/// Generalized Fourier data of a function: the continuous-spectrum
/// transform at the quadrature nodes and the bound-state coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformCoefficients {
    pub kquad: KQuadrature,
    /// `∫ conj(e(y, k_m)) f(y) dy`.
    pub ac_values: Vec<Complex64>,
    /// `∫ conj(e_m(y)) f(y) dy`, one per bound state.
    pub pp_values: Vec<Complex64>,
    /// Eigenvalues matching `pp_values`.
    pub pp_energies: Vec<f64>,
}

impl TransformCoefficients {
    pub fn zeros(kquad: KQuadrature, pp_energies: Vec<f64>) -> Self {
        Self {
            ac_values: vec![ZERO; kquad.len()],
            pp_values: vec![ZERO; pp_energies.len()],
            kquad,
            pp_energies,
        }
    }

    /// Multiplies by `m(ξ)` with `ξ = k²` on the continuous part and
    /// `ξ = E_m` on bound states.
    pub fn multiplied(&self, symbol: impl Fn(f64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (c, k) in out.ac_values.iter_mut().zip(self.kquad.nodes()) {
            *c *= symbol(k * k);
        }
        for (c, &e) in out.pp_values.iter_mut().zip(&self.pp_energies) {
            *c *= symbol(e);
        }
        out
    }

    /// `(2π)^{-1} Σ w_m |ac_m|² + Σ |pp_m|²`, the squared L² norm.
    pub fn energy(&self) -> f64 {
        let ac: f64 = self
            .ac_values
            .iter()
            .zip(self.kquad.weights())
            .map(|(c, w)| w * c.norm_sqr())
            .sum();
        ac / (2.0 * PI) + self.pp_values.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }
}

/// The distorted plane waves and bound states of one potential, tabulated
/// on a grid at the nodes of a k-quadrature.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pot: Potential,
    grid: Grid,
    kquad: KQuadrature,
    waves: DistortedWaves,
    /// Row `m` holds `e(x_i, k_m)`.
    table: Vec<Complex64>,
    bound: Vec<BoundState>,
}

impl SpectralBasis {
    pub fn new(pot: &Potential, grid: &Grid, kquad: &KQuadrature) -> Result<Self> {
        let waves = DistortedWaves::new(pot)?;
        kquad.check_resolves(grid)?;
        if kquad.k_max() > grid.nyquist() {
            return Err(Error::Resolution(format!(
                "k_max {} exceeds the grid Nyquist limit {}",
                kquad.k_max(),
                grid.nyquist()
            )));
        }
        let n = grid.len();
        let mut table = vec![ZERO; kquad.len() * n];
        table
            .par_chunks_mut(n)
            .zip(kquad.nodes().par_iter())
            .for_each(|(row, &k)| {
                let norm = waves.normalization(k);
                let w = waves.bind(k);
                for (i, v) in row.iter_mut().enumerate() {
                    *v = norm * w.bare(grid.x(i));
                }
            });
        let bound = if waves.level() == 0 {
            Vec::new()
        } else {
            bound_states(pot, grid)?
        };
        Ok(Self {
            pot: *pot,
            grid: *grid,
            kquad: kquad.clone(),
            waves,
            table,
            bound,
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn kquad(&self) -> &KQuadrature {
        &self.kquad
    }

    pub fn waves(&self) -> &DistortedWaves {
        &self.waves
    }

    pub fn bound_states(&self) -> &[BoundState] {
        &self.bound
    }

    pub fn energies(&self) -> Vec<f64> {
        self.bound.iter().map(|b| b.eigenvalue).collect()
    }

    fn row(&self, m: usize) -> &[Complex64] {
        let n = self.grid.len();
        &self.table[m * n..(m + 1) * n]
    }

    fn check_grid(&self, f: &FunctionSample) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch(format!(
                "sample on {:?}, basis on {:?}",
                f.grid(),
                self.grid
            )));
        }
        Ok(())
    }

    fn check_coeffs(&self, c: &TransformCoefficients) -> Result<()> {
        if c.kquad != self.kquad || c.pp_values.len() != self.bound.len() {
            return Err(Error::GridMismatch(
                "coefficients come from a different k-quadrature or potential".into(),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, f: &FunctionSample) -> Result<TransformCoefficients> {
        self.check_grid(f)?;
        let wf: Vec<Complex64> = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.grid.weight(i))
            .collect();
        let ac_values = (0..self.kquad.len())
            .into_par_iter()
            .map(|m| {
                self.row(m)
                    .iter()
                    .zip(&wf)
                    .fold(ZERO, |acc, (e, v)| acc + e.conj() * v)
            })
            .collect();
        let pp_values = self
            .bound
            .iter()
            .map(|b| {
                b.samples
                    .values()
                    .iter()
                    .zip(&wf)
                    .fold(ZERO, |acc, (e, v)| acc + e.conj() * v)
            })
            .collect();
        Ok(TransformCoefficients {
            kquad: self.kquad.clone(),
            ac_values,
            pp_values,
            pp_energies: self.energies(),
        })
    }

    pub fn inverse(&self, c: &TransformCoefficients) -> Result<FunctionSample> {
        self.check_coeffs(c)?;
        let scaled: Vec<Complex64> = c
            .ac_values
            .iter()
            .zip(self.kquad.weights())
            .map(|(v, w)| v * (w / (2.0 * PI)))
            .collect();
        let mut out = vec![ZERO; self.grid.len()];
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let start = ci * CHUNK;
            for (m, &s) in scaled.iter().enumerate() {
                if s == ZERO {
                    continue;
                }
                let row = &self.row(m)[start..start + chunk.len()];
                for (o, e) in chunk.iter_mut().zip(row) {
                    *o += s * e;
                }
            }
            for (b, &s) in self.bound.iter().zip(&c.pp_values) {
                let vals = &b.samples.values()[start..start + chunk.len()];
                for (o, e) in chunk.iter_mut().zip(vals) {
                    *o += s * e;
                }
            }
        });
        FunctionSample::new(self.grid, out)
    }

    /// Evaluates the synthesis sum at arbitrary points.
    pub fn synthesize_at(&self, c: &TransformCoefficients, xs: &[f64]) -> Result<Vec<Complex64>> {
        self.check_coeffs(c)?;
        let terms: Vec<_> = self
            .kquad
            .nodes()
            .iter()
            .zip(self.kquad.weights())
            .zip(&c.ac_values)
            .filter(|(_, v)| **v != ZERO)
            .map(|((&k, &w), &v)| {
                let s = v * (w / (2.0 * PI)) * self.waves.normalization(k);
                (s, self.waves.bind(k))
            })
            .collect();
        Ok(xs
            .par_iter()
            .map(|&x| {
                let ac = terms.iter().fold(ZERO, |acc, (s, w)| acc + s * w.bare(x));
                let pp = self
                    .bound
                    .iter()
                    .zip(&c.pp_values)
                    .fold(ZERO, |acc, (b, &s)| acc + s * b.form.eval(x));
                ac + pp
            })
            .collect())
    }

    /// `m(H) f` computed on the transform side.
    pub fn apply(&self, symbol: impl Fn(f64) -> Complex64, f: &FunctionSample) -> Result<FunctionSample> {
        let c = self.forward(f)?;
        self.inverse(&c.multiplied(symbol))
    }

    /// Real-symbol form of [`SpectralBasis::apply`].
    pub fn apply_real(&self, symbol: impl Fn(f64) -> f64, f: &FunctionSample) -> Result<FunctionSample> {
        self.apply(|xi| Complex64::new(symbol(xi), 0.0), f)
    }
}

pub fn forward_transform(
    f: &FunctionSample,
    pot: &Potential,
    kquad: &KQuadrature,
) -> Result<TransformCoefficients> {
    SpectralBasis::new(pot, f.grid(), kquad)?.forward(f)
}

pub fn inverse_transform(
    coeffs: &TransformCoefficients,
    pot: &Potential,
    grid: &Grid,
) -> Result<FunctionSample> {
    SpectralBasis::new(pot, grid, &coeffs.kquad)?.inverse(coeffs)
}

/// `φ(H) f` with the continuous part multiplied by `φ(k²)` and bound states
/// by `φ(E_m)`.
pub fn apply_multiplier(
    symbol: impl Fn(f64) -> f64,
    f: &FunctionSample,
    pot: &Potential,
    kquad: &KQuadrature,
) -> Result<FunctionSample> {
    SpectralBasis::new(pot, f.grid(), kquad)?.apply_real(symbol, f)
}
