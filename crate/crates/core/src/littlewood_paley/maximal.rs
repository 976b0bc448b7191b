use rayon::prelude::*;

use super::bank::basis_for_bands;
use super::windows::DyadicSystem;
use crate::error::{Error, Result};
use crate::numerics::{lp_norm_real, FunctionSample, Grid};
use crate::scattering::Potential;
use crate::spectral::{SpectralBasis, TransformCoefficients};

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter(format!("Peetre exponent must be positive, got {s}")));
    }
    Ok(())
}

/// `sup_t |g(t)| / (1 + 2^{j/2}|x - t|)^s` over grid points `t`, for every
/// grid point `x`.
pub fn peetre_sup(grid: &Grid, values: &[f64], j: i32, s: f64) -> Result<Vec<f64>> {
    check_s(s)?;
    let n = grid.len();
    let root = (j as f64 / 2.0).exp2();
    let h = grid.spacing();
    // weights depend only on |i - l| on a uniform grid
    let inv_w: Vec<f64> = (0..n).map(|d| (1.0 + root * h * d as f64).powf(-s)).collect();
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            values
                .iter()
                .enumerate()
                .map(|(l, v)| v * inv_w[i.abs_diff(l)])
                .fold(0.0, f64::max)
        })
        .collect())
}

/// The same supremum with `t` ranging over arbitrary points.
pub fn peetre_sup_at(grid: &Grid, ts: &[f64], values: &[f64], j: i32, s: f64) -> Result<Vec<f64>> {
    check_s(s)?;
    let root = (j as f64 / 2.0).exp2();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.x(i);
            ts.iter()
                .zip(values)
                .map(|(t, v)| v * (1.0 + root * (x - t).abs()).powf(-s))
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Peetre maximal function of one band, `φ_j* f` or (with the derivative)
/// `φ_j** f`, from a prepared basis and transform.
///
/// `refine > 1` evaluates the band on a lattice `refine` times finer than
/// the grid before taking the supremum.
pub fn peetre_from_coeffs(
    basis: &SpectralBasis,
    system: &DyadicSystem,
    coeffs: &TransformCoefficients,
    j: i32,
    s: f64,
    with_derivative: bool,
    refine: usize,
) -> Result<Vec<f64>> {
    let grid = *basis.grid();
    let band = coeffs.multiplied(|xi| system.analysis_symbol(j, xi).into());
    if refine <= 1 {
        let mut g = basis.inverse(&band)?;
        if with_derivative {
            g = g.derivative();
        }
        return peetre_sup(&grid, &g.abs(), j, s);
    }
    let h = grid.spacing() / refine as f64;
    let m = (grid.len() - 1) * refine + 1;
    let ts: Vec<f64> = (0..m).map(|i| grid.x_min() + i as f64 * h).collect();
    let mut vals = basis.synthesize_at(&band, &ts)?;
    if with_derivative {
        let fine = Grid::new(grid.x_min(), grid.x_max(), m)?;
        vals = FunctionSample::new(fine, vals)?.derivative().into_values();
    }
    let abs: Vec<f64> = vals.iter().map(|v| v.norm()).collect();
    peetre_sup_at(&grid, &ts, &abs, j, s)
}

/// `φ_j* f` (or `φ_j** f`) sampled on the grid of `f`.
pub fn peetre_maximal(
    j: i32,
    f: &FunctionSample,
    s: f64,
    system: &DyadicSystem,
    pot: &Potential,
    with_derivative: bool,
) -> Result<FunctionSample> {
    let basis = basis_for_bands(pot, f.grid(), j.max(0))?;
    let c = basis.forward(f)?;
    let v = peetre_from_coeffs(&basis, system, &c, j, s, with_derivative, 1)?;
    Ok(FunctionSample::from_real_values(*f.grid(), &v))
}

/// Centered Hardy–Littlewood maximal function over symmetric windows of
/// grid points; `f` is taken as zero off the grid.
pub fn hl_maximal_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut prefix = vec![0.0; n + 1];
    for (i, v) in values.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v.abs();
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut best = values[i].abs();
            for r in 1..n {
                let lo = i.saturating_sub(r);
                let hi = (i + r).min(n - 1);
                let avg = (prefix[hi + 1] - prefix[lo]) / (2 * r + 1) as f64;
                best = best.max(avg);
                if lo == 0 && hi == n - 1 {
                    break;
                }
            }
            best
        })
        .collect()
}

pub fn hl_maximal(f: &FunctionSample) -> FunctionSample {
    FunctionSample::from_real_values(*f.grid(), &hl_maximal_values(f.grid(), &f.abs()))
}

/// `[M(|g|^r)]^{1/r}`.
pub fn hl_maximal_power(grid: &Grid, values: &[f64], r: f64) -> Vec<f64> {
    let powered: Vec<f64> = values.iter().map(|v| v.abs().powf(r)).collect();
    hl_maximal_values(grid, &powered)
        .into_iter()
        .map(|v| v.powf(1.0 / r))
        .collect()
}

/// `‖(Σ_j (M g_j)²)^{1/2}‖_p / ‖(Σ_j g_j²)^{1/2}‖_p`.
pub fn fefferman_stein_ratio(grid: &Grid, bands: &[Vec<f64>], p: f64) -> Result<f64> {
    let n = grid.len();
    let mut lhs = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for b in bands {
        let m = hl_maximal_values(grid, b);
        for i in 0..n {
            lhs[i] += m[i] * m[i];
            rhs[i] += b[i] * b[i];
        }
    }
    let lhs: Vec<f64> = lhs.into_iter().map(f64::sqrt).collect();
    let rhs: Vec<f64> = rhs.into_iter().map(f64::sqrt).collect();
    let den = lp_norm_real(grid, &rhs, p)?;
    if den == 0.0 {
        return Err(Error::Domain("all bands vanish".into()));
    }
    Ok(lp_norm_real(grid, &lhs, p)? / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::Variant;
    use num_complex::Complex64;

    #[test]
    fn hl_of_constant_and_indicator() {
        let g = Grid::new(-10.0, 10.0, 2001).unwrap();
        let ones = vec![1.0; g.len()];
        let m = hl_maximal_values(&g, &ones);
        // windows clipped by the grid ends count zeros beyond them
        assert!(m.iter().all(|&v| (v - 1.0).abs() < 1e-15));

        let ind: Vec<f64> = g.points().iter().map(|&x| if x.abs() <= 1.0 { 1.0 } else { 0.0 }).collect();
        let m = hl_maximal_values(&g, &ind);
        let at3 = m[1300];
        assert!((g.x(1300) - 3.0).abs() < 1e-12);
        // brute force over radii in x units
        let brute = (1..2000)
            .map(|r| {
                let rad = r as f64 * 0.01;
                let overlap = (1.0f64.min(3.0 + rad) - (-1.0f64).max(3.0 - rad)).max(0.0);
                overlap / (2.0 * rad)
            })
            .fold(0.0, f64::max);
        assert!((brute - 0.25).abs() < 1e-12);
        assert!((at3 - brute).abs() < 2e-3, "{at3}");
    }

    #[test]
    fn peetre_dominates_and_decreases_in_s() {
        let g = Grid::desk();
        let basis = basis_for_bands(&Potential::integer(1), &g, 4).unwrap();
        let sys = DyadicSystem::new(Variant::SqrtPartition);
        let f = FunctionSample::from_real_fn(g, |x| (-(x - 2.0).powi(2) / 3.0).exp());
        let c = basis.forward(&f).unwrap();
        for j in 0..=4 {
            let band = basis.inverse(&c.multiplied(|xi| sys.analysis_symbol(j, xi).into())).unwrap();
            let abs = band.abs();
            let p3 = peetre_from_coeffs(&basis, &sys, &c, j, 3.0, false, 1).unwrap();
            let p6 = peetre_from_coeffs(&basis, &sys, &c, j, 6.0, false, 1).unwrap();
            for i in 0..g.len() {
                assert!(p3[i] >= abs[i]);
                assert!(p6[i] <= p3[i]);
                assert!(p6[i] >= abs[i]);
            }
        }
    }

    #[test]
    fn refinement_only_raises_the_sup() {
        let g = Grid::new(-30.0, 30.0, 601).unwrap();
        let basis = basis_for_bands(&Potential::integer(1), &g, 4).unwrap();
        let sys = DyadicSystem::new(Variant::SqrtPartition);
        let f = FunctionSample::from_real_fn(g, |x| (-x * x / 2.0).exp());
        let c = basis.forward(&f).unwrap();
        let coarse = peetre_from_coeffs(&basis, &sys, &c, 4, 3.0, false, 1).unwrap();
        let fine = peetre_from_coeffs(&basis, &sys, &c, 4, 3.0, false, 4).unwrap();
        for (a, b) in coarse.iter().zip(&fine) {
            assert!(b >= &(a * (1.0 - 1e-12)));
            assert!(*b <= 1.5 * a);
        }
    }

    #[test]
    fn convenience_wrapper() {
        let g = Grid::new(-30.0, 30.0, 601).unwrap();
        let sys = DyadicSystem::new(Variant::ShiftedSqrt);
        let f = FunctionSample::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.0));
        let p = peetre_maximal(2, &f, 3.0, &sys, &Potential::integer(1), true).unwrap();
        assert!(p.values().iter().all(|v| v.im == 0.0 && v.re >= 0.0));
        assert!(peetre_maximal(2, &f, 0.0, &sys, &Potential::integer(1), false).is_err());
    }

    #[test]
    fn fefferman_stein_is_at_least_one() {
        let g = Grid::new(-20.0, 20.0, 801).unwrap();
        let bands: Vec<Vec<f64>> = (1..4)
            .map(|j| g.points().iter().map(|&x| (-(x - j as f64).powi(2)).exp()).collect())
            .collect();
        for p in [1.5, 2.0, 3.0] {
            let r = fefferman_stein_ratio(&g, &bands, p).unwrap();
            assert!((1.0..20.0).contains(&r), "{r}");
        }
    }
}
