use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicSystem;
use crate::numerics::{Band, FunctionSample, Grid, KQuadrature};
use crate::scattering::{bound_states, DistortedWaves, Potential};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAGIC: &[u8; 8] = b"PTSKERN1";

/// Kernel of `φ_j(H)` for one dyadic band on a grid.
///
/// `matrix` holds the continuous-spectrum part
/// `(2π)^{-1} ∫ φ_j(k²) e(x,k) conj(e(y,k)) dk`; the bound-state part
/// `Σ φ_j(E_m) e_m(x) e_m(y)` is kept in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierKernel {
    pub band: i32,
    pub grid: Grid,
    /// Row-major, `matrix[i * n + l] = K(x_i, y_l)`.
    pub matrix: Vec<Complex64>,
    /// `∂_x K(x_i, y_l)` when requested.
    pub dmatrix: Option<Vec<Complex64>>,
    /// `(φ_j(E_m), e_m sampled on the grid)`.
    pub point_part: Vec<(f64, Vec<f64>)>,
}

impl MultiplierKernel {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn entry(&self, i: usize, l: usize) -> Complex64 {
        self.matrix[i * self.len() + l]
    }

    /// Entry of the full kernel, bound states included.
    pub fn full_entry(&self, i: usize, l: usize) -> Complex64 {
        let pp: f64 = self.point_part.iter().map(|(c, e)| c * e[i] * e[l]).sum();
        self.entry(i, l) + pp
    }

    /// `∫ K(x, y) f(y) dy` by trapezoid quadrature in `y`, bound states included.
    pub fn apply(&self, f: &FunctionSample) -> Result<FunctionSample> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch("kernel and sample grids differ".into()));
        }
        let n = self.len();
        let wf: Vec<Complex64> = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.grid.weight(i))
            .collect();
        let pp_coeffs: Vec<Complex64> = self
            .point_part
            .iter()
            .map(|(c, e)| *c * e.iter().zip(&wf).fold(ZERO, |acc, (a, b)| acc + a * b))
            .collect();
        let values = (0..n)
            .into_par_iter()
            .map(|i| {
                let row = &self.matrix[i * n..(i + 1) * n];
                let ac = row.iter().zip(&wf).fold(ZERO, |acc, (k, v)| acc + k * v);
                let pp = self
                    .point_part
                    .iter()
                    .zip(&pp_coeffs)
                    .fold(ZERO, |acc, ((_, e), c)| acc + c * e[i]);
                ac + pp
            })
            .collect();
        FunctionSample::new(self.grid, values)
    }

    /// `max |K(x,y) - conj(K(y,x))|` over the grid.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.len();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|l| (self.entry(i, l) - self.entry(l, i).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Writes `x,y,re,im` rows of the continuous-spectrum matrix.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,re,im")?;
        let n = self.len();
        for i in 0..n {
            for l in 0..n {
                let v = self.entry(i, l);
                writeln!(w, "{},{},{:e},{:e}", self.grid.x(i), self.grid.x(l), v.re, v.im)?;
            }
        }
        Ok(())
    }

    /// Compact dump: magic, band, grid, flags, then little-endian `f64`
    /// data row-major (matrix, derivative matrix, bound-state factors).
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&self.band.to_le_bytes())?;
        w.write_all(&self.grid.x_min().to_le_bytes())?;
        w.write_all(&self.grid.x_max().to_le_bytes())?;
        w.write_all(&(self.grid.len() as u64).to_le_bytes())?;
        w.write_all(&[self.dmatrix.is_some() as u8])?;
        w.write_all(&(self.point_part.len() as u32).to_le_bytes())?;
        let put = |x: f64, w: &mut W| w.write_all(&x.to_le_bytes());
        for v in &self.matrix {
            put(v.re, &mut w)?;
            put(v.im, &mut w)?;
        }
        if let Some(d) = &self.dmatrix {
            for v in d {
                put(v.re, &mut w)?;
                put(v.im, &mut w)?;
            }
        }
        for (c, e) in &self.point_part {
            put(*c, &mut w)?;
            for x in e {
                put(*x, &mut w)?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Io("not a kernel dump".into()));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        let band = i32::from_le_bytes(b4);
        r.read_exact(&mut b8)?;
        let x_min = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let x_max = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let grid = Grid::new(x_min, x_max, n)?;
        let mut flag = [0u8; 1];
        r.read_exact(&mut flag)?;
        r.read_exact(&mut b4)?;
        let n_pp = u32::from_le_bytes(b4) as usize;
        let mut next = || -> Result<f64> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let read_matrix = |next: &mut dyn FnMut() -> Result<f64>| -> Result<Vec<Complex64>> {
            (0..n * n).map(|_| Ok(Complex64::new(next()?, next()?))).collect()
        };
        let matrix = read_matrix(&mut next)?;
        let dmatrix = if flag[0] == 1 {
            Some(read_matrix(&mut next)?)
        } else {
            None
        };
        let mut point_part = Vec::with_capacity(n_pp);
        for _ in 0..n_pp {
            let c = next()?;
            let e = (0..n).map(|_| next()).collect::<Result<Vec<_>>>()?;
            point_part.push((c, e));
        }
        Ok(Self {
            band,
            grid,
            matrix,
            dmatrix,
            point_part,
        })
    }
}

/// Full-line lattice nodes used for band `j`: `|k| ∈ [2^{(j-2)/2}, 2^{j/2}]`, or `|k| ≤ 1` for `j = 0`.
pub fn band_quadrature(j: i32, grid: &Grid) -> Result<KQuadrature> {
    if j < 0 {
        return Err(Error::InvalidParameter(format!("band index must be ≥ 0, got {j}")));
    }
    let (lo, hi) = DyadicSystem::band_k_range(j);
    if hi > grid.nyquist() {
        return Err(Error::Resolution(format!(
            "band {j} reaches |k| = {hi:.4}, beyond the grid Nyquist limit {:.4}",
            grid.nyquist()
        )));
    }
    KQuadrature::lattice(lo, hi, KQuadrature::max_spacing_for(grid), Band::Index(j))
}

/// Largest band index the grid resolves.
pub fn max_band(grid: &Grid) -> i32 {
    (2.0 * grid.nyquist().log2()).floor() as i32
}

/// Assembles `K_j` from the analytic product
/// `e(x,k) conj(e(y,k)) = Π(j² + κ²)^{-1} P(x,iκ) conj(P(y,iκ)) e^{ik(x-y)}`,
/// a rank-M sum over the band's k-nodes.
pub fn build_band_kernel(
    system: &DyadicSystem,
    j: i32,
    pot: &Potential,
    grid: &Grid,
    with_derivative: bool,
) -> Result<MultiplierKernel> {
    let waves = DistortedWaves::new(pot)?;
    let kquad = band_quadrature(j, grid)?;
    let n = grid.len();
    let xs = grid.points();
    let factors: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = kquad
        .nodes()
        .par_iter()
        .zip(kquad.weights().par_iter())
        .filter_map(|(&k, &w)| {
            let c = w / (2.0 * PI) * system.analysis_symbol(j, k * k) * waves.product_weight(k);
            if c == 0.0 {
                return None;
            }
            let bw = waves.bind(k);
            let (u, du): (Vec<_>, Vec<_>) = xs.iter().map(|&x| bw.bare_with_derivative(x)).unzip();
            Some((c, u, du))
        })
        .collect();
    let conj: Vec<Vec<Complex64>> = factors
        .iter()
        .map(|(_, u, _)| u.iter().map(|v| v.conj()).collect())
        .collect();
    let assemble = |derivative: bool| -> Vec<Complex64> {
        let mut m = vec![ZERO; n * n];
        m.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for ((c, u, du), cu) in factors.iter().zip(&conj) {
                let a = *c * if derivative { du[i] } else { u[i] };
                for (r, v) in row.iter_mut().zip(cu) {
                    *r += a * v;
                }
            }
        });
        m
    };
    let matrix = assemble(false);
    let dmatrix = with_derivative.then(|| assemble(true));
    let point_part = if waves.level() == 0 {
        Vec::new()
    } else {
        bound_states(pot, grid)?
            .into_iter()
            .map(|b| (system.analysis_symbol(j, b.eigenvalue), b.samples.values().iter().map(|v| v.re).collect()))
            .filter(|(c, _)| *c != 0.0)
            .collect()
    };
    Ok(MultiplierKernel {
        band: j,
        grid: *grid,
        matrix,
        dmatrix,
        point_part,
    })
}

/// Measured constants of the decay bounds
/// `|K_j| ≤ C 2^{j/2} w_j^{-n}` and `|∂_x K_j| ≤ D 2^j w_j^{-n}`,
/// `w_j(d) = 1 + 2^{j/2}|d|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayProfile {
    pub band: i32,
    pub n_power: u32,
    pub c_measured: f64,
    pub d_measured: Option<f64>,
}

/// Decay constants of the continuous-spectrum kernel.
pub fn decay_profile(kernel: &MultiplierKernel, n_power: u32) -> DecayProfile {
    let j = kernel.band;
    let g = kernel.grid;
    let n = g.len();
    let root = (j as f64 / 2.0).exp2();
    let weight = |i: usize, l: usize| (1.0 + root * (g.x(i) - g.x(l)).abs()).powi(n_power as i32);
    let measure = |m: &[Complex64], norm: f64| {
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|l| m[i * n + l].norm() * weight(i, l))
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
            / norm
    };
    DecayProfile {
        band: j,
        n_power,
        c_measured: measure(&kernel.matrix, root),
        d_measured: kernel.dmatrix.as_ref().map(|d| measure(d, root * root)),
    }
}

/// Full kernel `φ(H)(x, y)` at one point pair, by k-quadrature on the
/// continuous part plus the bound-state sum.
pub fn kernel_value(
    pot: &Potential,
    symbol: &dyn Fn(f64) -> f64,
    kquad: &KQuadrature,
    x: f64,
    y: f64,
) -> Result<Complex64> {
    Ok(kernel_values(pot, symbol, kquad, &[(x, y)])?[0])
}

/// [`kernel_value`] over a list of point pairs.
pub fn kernel_values(
    pot: &Potential,
    symbol: &dyn Fn(f64) -> f64,
    kquad: &KQuadrature,
    pairs: &[(f64, f64)],
) -> Result<Vec<Complex64>> {
    let waves = DistortedWaves::new(pot)?;
    let a = pot.scale();
    let forms = if waves.level() == 0 {
        Vec::new()
    } else {
        let reach = 40.0 / a;
        let g = Grid::new(pot.shift() - reach, pot.shift() + reach, 8001)?;
        bound_states(pot, &g)?
    };
    let terms: Vec<_> = kquad
        .nodes()
        .iter()
        .zip(kquad.weights())
        .map(|(&k, &w)| (w / (2.0 * PI) * symbol(k * k) * waves.product_weight(k), waves.bind(k)))
        .filter(|(c, _)| *c != 0.0)
        .collect();
    Ok(pairs
        .iter()
        .map(|&(x, y)| {
            let ac = terms
                .iter()
                .fold(ZERO, |acc, (c, bw)| acc + *c * bw.bare(x) * bw.bare(y).conj());
            let pp: f64 = forms
                .iter()
                .map(|b| symbol(b.eigenvalue) * b.form.eval(x) * b.form.eval(y))
                .sum();
            ac + pp
        })
        .collect())
}

/// Largest deviations in the scaling and translation identities
/// `φ(H_a)(x,y) = a [φ(a²·)](H)(ax, ay)` and
/// `φ(H^h)(x,y) = φ(H)(x - h, y - h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub scale: f64,
    pub shift: f64,
    pub scale_deviation: f64,
    pub shift_deviation: f64,
}

impl CovarianceReport {
    pub fn max_deviation(&self) -> f64 {
        self.scale_deviation.max(self.shift_deviation)
    }
}

/// Compares kernels on the lattice `{-2, -1, …, 2}²` (shifted by `h` for
/// the translation identity). `pot` must be centered at 0.
pub fn covariance_check(
    pot: &Potential,
    symbol: &dyn Fn(f64) -> f64,
    a: f64,
    h: f64,
    kquad: &KQuadrature,
) -> Result<CovarianceReport> {
    if pot.shift() != 0.0 {
        return Err(Error::Precondition("covariance check needs an unshifted potential".into()));
    }
    let lattice: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.5).collect();
    let pairs: Vec<(f64, f64)> = lattice
        .iter()
        .flat_map(|&x| lattice.iter().map(move |&y| (x, y)))
        .collect();

    let scaled = pot.with_scale(pot.scale() * a)?;
    let lhs = kernel_values(&scaled, symbol, kquad, &pairs)?;
    let rescaled = |xi: f64| symbol(a * a * xi);
    let stretched: Vec<_> = pairs.iter().map(|&(x, y)| (a * x, a * y)).collect();
    let rhs = kernel_values(pot, &rescaled, kquad, &stretched)?;
    let scale_deviation = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - a * r).norm())
        .fold(0.0, f64::max);

    let moved = pot.with_shift(h);
    let shifted_pairs: Vec<_> = pairs.iter().map(|&(x, y)| (x + h, y + h)).collect();
    let lhs = kernel_values(&moved, symbol, kquad, &shifted_pairs)?;
    let rhs = kernel_values(pot, symbol, kquad, &pairs)?;
    let shift_deviation = lhs
        .iter()
        .zip(&rhs)
        .map(|(l, r)| (l - r).norm())
        .fold(0.0, f64::max);

    Ok(CovarianceReport {
        scale: a,
        shift: h,
        scale_deviation,
        shift_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::Variant;
    use crate::spectral::SpectralBasis;

    fn small_grid() -> Grid {
        Grid::new(-30.0, 30.0, 601).unwrap()
    }

    fn system() -> DyadicSystem {
        DyadicSystem::new(Variant::SqrtPartition)
    }

    #[test]
    fn free_kernel_is_translation_invariant() {
        let g = small_grid();
        let k = build_band_kernel(&system(), 3, &Potential::free(), &g, false).unwrap();
        let n = g.len();
        let mut worst: f64 = 0.0;
        for i in 100..n - 150 {
            for d in [0usize, 7, 40] {
                worst = worst.max((k.entry(i, i + d) - k.entry(i + 50, i + d + 50)).norm());
            }
        }
        assert!(worst < 1e-10, "{worst:e}");
        assert!(k.point_part.is_empty());
    }

    #[test]
    fn hermitian_and_two_paths_agree() {
        let g = small_grid();
        let q = KQuadrature::for_grid(&g, 4.0).unwrap();
        let pot = Potential::integer(2);
        let basis = SpectralBasis::new(&pot, &g, &q).unwrap();
        let sys = system();
        let f = FunctionSample::from_real_fn(g, |x| (-(x - 0.5).powi(2) / 2.0).exp());
        for j in [1, 3] {
            let k = build_band_kernel(&sys, j, &pot, &g, false).unwrap();
            assert!(k.hermitian_defect() < 1e-10);
            let direct = k.apply(&f).unwrap();
            let spectral = basis.apply_real(|xi| sys.analysis_symbol(j, xi), &f).unwrap();
            let err = direct.relative_l2_error(&spectral).unwrap();
            assert!(err < 1e-6, "band {j}: {err:e}");
        }
    }

    #[test]
    fn nyquist_guard() {
        let g = Grid::new(-10.0, 10.0, 41).unwrap();
        assert!(matches!(
            build_band_kernel(&system(), 6, &Potential::integer(1), &g, false),
            Err(Error::Resolution(_))
        ));
        assert!(max_band(&g) < 6);
        assert!(band_quadrature(-1, &g).is_err());
    }

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(-25.0, 25.0, 101).unwrap();
        let k = build_band_kernel(&system(), 1, &Potential::integer(2), &g, true).unwrap();
        let mut buf = Vec::new();
        k.write_binary(&mut buf).unwrap();
        let back = MultiplierKernel::read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, k);
        assert!(MultiplierKernel::read_binary(&b"garbage!"[..]).is_err());
        let mut csv = Vec::new();
        k.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 101 * 101);
    }

    #[test]
    fn derivative_matrix_matches_differences() {
        let g = small_grid();
        let k = build_band_kernel(&system(), 2, &Potential::integer(1), &g, true).unwrap();
        let d = k.dmatrix.as_ref().unwrap();
        let h = g.spacing();
        let n = g.len();
        let l = 300;
        for i in [250usize, 300, 320] {
            let fd = (k.entry(i + 1, l) - k.entry(i - 1, l)) / (2.0 * h);
            assert!((fd - d[i * n + l]).norm() < 1e-2 * d.iter().map(|v| v.norm()).fold(0.0, f64::max));
        }
    }

    #[test]
    fn decay_constants_are_uniform_for_free_case() {
        let g = Grid::new(-20.0, 20.0, 801).unwrap();
        let sys = system();
        let cs: Vec<f64> = (1..=4)
            .map(|j| {
                let k = build_band_kernel(&sys, j, &Potential::free(), &g, false).unwrap();
                decay_profile(&k, 2).c_measured
            })
            .collect();
        let max = cs.iter().cloned().fold(0.0, f64::max);
        let min = cs.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(max / min < 10.0, "{cs:?}");
    }

    #[test]
    fn covariance_identities() {
        let q = KQuadrature::symmetric_midpoint(0.0, 6.0, 0.01, Band::Full).unwrap();
        let sym = |xi: f64| (-xi * xi / 8.0).exp();
        let pot = Potential::integer(1);
        let r = covariance_check(&pot, &sym, 1.0, 0.0, &q).unwrap();
        assert!(r.max_deviation() < 1e-14);
        let r = covariance_check(&pot, &sym, 2.0, 3.0, &q).unwrap();
        assert!(r.scale_deviation < 1e-6, "{r:?}");
        assert!(r.shift_deviation < 1e-6, "{r:?}");
    }
}
