use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[x_min, x_max]` including both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if n_points < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// The desk-scale default: [-40, 40] with 4001 points.
    pub fn desk() -> Self {
        Self {
            x_min: -40.0,
            x_max: 40.0,
            n_points: 4001,
        }
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extent(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn spacing(&self) -> f64 {
        self.extent() / (self.n_points - 1) as f64
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.x(i)).collect()
    }

    /// Composite trapezoid weights.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.n_points];
        w[0] = 0.5 * h;
        w[self.n_points - 1] = 0.5 * h;
        w
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.n_points {
            0.5 * h
        } else {
            h
        }
    }

    /// Largest |k| resolved by the grid spacing.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Smallest distance from a point to either grid end.
    pub fn half_width_about(&self, center: f64) -> f64 {
        (center - self.x_min).min(self.x_max - center)
    }
}

/// Complex samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSample {
    grid: Grid,
    values: Vec<Complex64>,
}

impl FunctionSample {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}-point grid",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_real_values(grid: Grid, values: &[f64]) -> Self {
        assert_eq!(values.len(), grid.len(), "sample length must match the grid");
        Self {
            grid,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }

    /// Trapezoid approximation of `∫ conj(self) other dx`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .map(|(i, (a, b))| a.conj() * b * self.grid.weight(i))
            .sum())
    }

    pub fn l2_norm(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * self.grid.weight(i))
            .sum::<f64>()
            .sqrt()
    }

    /// `‖self − other‖₂ / ‖other‖₂`.
    pub fn relative_l2_error(&self, reference: &Self) -> Result<f64> {
        let diff = self.sub(reference)?;
        let denom = reference.l2_norm();
        Ok(if denom == 0.0 {
            diff.l2_norm()
        } else {
            diff.l2_norm() / denom
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Centered finite-difference derivative (one-sided at the ends).
    pub fn derivative(&self) -> Self {
        let n = self.values.len();
        let h = self.grid.spacing();
        let v = &self.values;
        let mut d = vec![Complex64::new(0.0, 0.0); n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[0] = (v[1] - v[0]) / h;
        d[n - 1] = (v[n - 1] - v[n - 2]) / h;
        Self {
            grid: self.grid,
            values: d,
        }
    }
}

/// Trapezoid `L^p` quasi-norm of a sampled function; `p = f64::INFINITY` gives the sup.
pub fn lp_norm(f: &FunctionSample, p: f64) -> Result<f64> {
    lp_norm_real(f.grid(), &f.abs(), p)
}

/// [`lp_norm`] for a nonnegative real sample on `grid`.
pub fn lp_norm_real(grid: &Grid, values: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "norm exponent must lie in (0, inf], got {p}"
        )));
    }
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a {}-point grid",
            values.len(),
            grid.len()
        )));
    }
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    // Rescale by the maximum so large p cannot overflow.
    let scale = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let sum: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| grid.weight(i) * (v.abs() / scale).powf(p))
        .sum();
    Ok(scale * sum.powf(1.0 / p))
}

/// Which part of the k-axis a quadrature covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Full,
    Index(i32),
}

/// Nodes and weights discretizing `dk`.
#[derive(Debug, Clone, PartialEq)]
pub struct KQuadrature {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    band: Band,
}

impl KQuadrature {
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, band: Band) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "k-quadrature needs equal nonzero lengths, got {} nodes and {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "k-quadrature nodes must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::InvalidParameter(
                "k-quadrature weights must be positive".into(),
            ));
        }
        Ok(Self {
            nodes,
            weights,
            band,
        })
    }

    /// Midpoint rule on the union of `[-k_hi, -k_lo]` and `[k_lo, k_hi]`,
    /// with node spacing at most `max_spacing`. With `k_lo = 0` this is one
    /// symmetric interval whose nodes avoid `k = 0`.
    pub fn symmetric_midpoint(k_lo: f64, k_hi: f64, max_spacing: f64, band: Band) -> Result<Self> {
        if !(k_lo >= 0.0 && k_hi > k_lo && max_spacing > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bad k-range [{k_lo}, {k_hi}] with spacing {max_spacing}"
            )));
        }
        let (nodes, weights) = if k_lo == 0.0 {
            let len = 2.0 * k_hi;
            let n = (len / max_spacing).ceil().max(2.0) as usize;
            let n = n + n % 2;
            let dk = len / n as f64;
            let nodes = (0..n).map(|m| -k_hi + (m as f64 + 0.5) * dk).collect();
            (nodes, vec![dk; n])
        } else {
            let len = k_hi - k_lo;
            let n = (len / max_spacing).ceil().max(1.0) as usize;
            let dk = len / n as f64;
            let positive: Vec<f64> = (0..n).map(|m| k_lo + (m as f64 + 0.5) * dk).collect();
            let mut nodes: Vec<f64> = positive.iter().rev().map(|k| -k).collect();
            nodes.extend(positive);
            (nodes, vec![dk; 2 * n])
        };
        Self::new(nodes, weights, band)
    }

    /// Nodes `±(m + 1/2) dk` with `k_lo ≤ |k| ≤ k_hi`, all of weight `dk`.
    /// Quadratures built on the same `dk` share nodes, so a band is an exact
    /// subset of the full-line rule.
    pub fn lattice(k_lo: f64, k_hi: f64, dk: f64, band: Band) -> Result<Self> {
        if !(k_lo >= 0.0 && k_hi > k_lo && dk > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "bad k-range [{k_lo}, {k_hi}] with spacing {dk}"
            )));
        }
        let first = ((k_lo / dk) - 0.5).ceil().max(0.0) as usize;
        let last = ((k_hi / dk) - 0.5).floor().max(0.0) as usize;
        let positive: Vec<f64> = (first..=last)
            .map(|m| (m as f64 + 0.5) * dk)
            .filter(|&k| k >= k_lo && k <= k_hi)
            .collect();
        let mut nodes: Vec<f64> = positive.iter().rev().map(|k| -k).collect();
        nodes.extend(positive);
        let weights = vec![dk; nodes.len()];
        Self::new(nodes, weights, band)
    }

    /// Full-line lattice rule covering `[-k_max, k_max]` at the grid's
    /// maximal node spacing.
    pub fn for_grid(grid: &Grid, k_max: f64) -> Result<Self> {
        let dk = Self::max_spacing_for(grid);
        let n_half = (k_max / dk).ceil();
        Self::lattice(0.0, n_half * dk, dk, Band::Full)
    }

    /// Largest node spacing that still resolves `e^{ik(x-y)}` across the grid.
    pub fn max_spacing_for(grid: &Grid) -> f64 {
        std::f64::consts::PI / (2.0 * grid.extent())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn band(&self) -> Band {
        self.band
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn k_max(&self) -> f64 {
        self.nodes
            .iter()
            .fold(0.0, |m: f64, k| m.max(k.abs()))
    }

    /// Largest gap between consecutive nodes that lie on the same side of zero.
    pub fn max_gap(&self) -> f64 {
        self.nodes
            .windows(2)
            .filter(|w| w[0].signum() == w[1].signum())
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
            .max(self.weights.iter().cloned().fold(0.0, f64::max))
    }

    /// Checks the node density rule against a grid.
    pub fn check_resolves(&self, grid: &Grid) -> Result<()> {
        let limit = Self::max_spacing_for(grid);
        if self.max_gap() > limit * (1.0 + 1e-12) {
            return Err(Error::Resolution(format!(
                "k spacing {} exceeds {} required by grid extent {}",
                self.max_gap(),
                limit,
                grid.extent()
            )));
        }
        Ok(())
    }
}
