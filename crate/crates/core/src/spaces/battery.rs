use num_complex::Complex64;

use crate::error::Result;
use crate::numerics::{FunctionSample, Grid};
use crate::scattering::{bound_states, Potential};

/// Bumped whenever a battery member changes.
pub const BATTERY_VERSION: u32 = 1;

/// A named test function.
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub id: String,
    pub sample: FunctionSample,
}

fn gaussian(width: f64, center: f64) -> impl Fn(f64) -> f64 {
    move |x| (-(x - center).powi(2) / (2.0 * width * width)).exp()
}

/// Spectrum concentrated near `|k| = 0.75 · 2^{j/2}`, width `0.2 · 2^{j/2}`.
fn band_limited(j: i32) -> impl Fn(f64) -> f64 {
    let root = (j as f64 / 2.0).exp2();
    let (kc, sigma) = (0.75 * root, 0.2 * root);
    move |x| (-(sigma * x).powi(2) / 2.0).exp() * (kc * x).cos()
}

/// The fixed ten-function battery: four Gaussians (widths 1, 1.5, 2.5,
/// centers 0 and 3), two sech-type bumps, a chirped Gaussian and one
/// function concentrated in each of bands 1, 2 and 3.
pub fn battery(grid: &Grid) -> Vec<TestFunction> {
    let real = |id: &str, f: &dyn Fn(f64) -> f64| TestFunction {
        id: id.to_string(),
        sample: FunctionSample::from_real_fn(*grid, f),
    };
    vec![
        real("gauss-w1-c0", &gaussian(1.0, 0.0)),
        real("gauss-w1.5-c3", &gaussian(1.5, 3.0)),
        real("gauss-w2.5-c0", &gaussian(2.5, 0.0)),
        real("gauss-w1-c3", &gaussian(1.0, 3.0)),
        real("sech-half", &|x: f64| 1.0 / (x / 2.0).cosh()),
        real("sech2-shifted", &|x: f64| (1.0 / ((x - 1.0) / 1.5).cosh()).powi(2)),
        TestFunction {
            id: "chirp".into(),
            sample: FunctionSample::from_fn(*grid, |x| {
                (-x * x / 8.0).exp() * Complex64::from_polar(1.0, x * x / 4.0)
            }),
        },
        real("band-1", &band_limited(1)),
        real("band-2", &band_limited(2)),
        real("band-3", &band_limited(3)),
    ]
}

/// [`battery`] followed by the bound states of `pot`.
pub fn battery_with_bound_states(grid: &Grid, pot: &Potential) -> Result<Vec<TestFunction>> {
    let mut out = battery(grid);
    if pot.level().unwrap_or(0) > 0 {
        for b in bound_states(pot, grid)? {
            out.push(TestFunction {
                id: format!("bound-{}", b.index),
                sample: b.samples,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn battery_is_fixed_and_localized() {
        let g = Grid::desk();
        let b = battery(&g);
        assert_eq!(b.len(), 10);
        let ids: Vec<_> = b.iter().map(|t| t.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 10);
        for t in &b {
            let v = t.sample.values();
            let edge = v[0].norm().max(v[v.len() - 1].norm());
            assert!(edge < 1e-8, "{} at the edge: {edge:e}", t.id);
            assert!(t.sample.l2_norm() > 0.1);
        }
    }

    #[test]
    fn bound_states_are_appended() {
        let g = Grid::desk();
        let b = battery_with_bound_states(&g, &Potential::integer(2)).unwrap();
        assert_eq!(b.len(), 12);
        assert_eq!(b[11].id, "bound-2");
        assert_eq!(battery_with_bound_states(&g, &Potential::free()).unwrap().len(), 10);
    }
}
