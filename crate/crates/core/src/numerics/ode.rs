use num_complex::Complex64;

use super::grid::{FunctionSample, Grid};
use crate::error::{Error, Result};

/// `(u, u')` at one point.
pub type State = [Complex64; 2];

/// Step-size control for [`SchrodingerIntegrator`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-13,
            h_min: 1e-12,
            max_steps: 10_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Adaptive Dormand–Prince integrator for `-u'' + V u = k² u`.
pub struct SchrodingerIntegrator<'a> {
    potential: &'a (dyn Fn(f64) -> f64 + Sync),
    k_squared: f64,
    opts: IntegratorOptions,
}

impl<'a> SchrodingerIntegrator<'a> {
    pub fn new(potential: &'a (dyn Fn(f64) -> f64 + Sync), k_squared: f64) -> Self {
        Self {
            potential,
            k_squared,
            opts: IntegratorOptions::default(),
        }
    }

    pub fn with_options(mut self, opts: IntegratorOptions) -> Self {
        self.opts = opts;
        self
    }

    #[inline]
    fn rhs(&self, x: f64, y: &State) -> State {
        [y[1], ((self.potential)(x) - self.k_squared) * y[0]]
    }

    /// Advances `y` from `x0` to `x1` (either direction). `h` carries the
    /// step-size guess between calls.
    pub fn advance(&self, x0: f64, x1: f64, mut y: State, h: &mut f64) -> Result<State> {
        let dir = if x1 >= x0 { 1.0 } else { -1.0 };
        let span = (x1 - x0).abs();
        if span == 0.0 {
            return Ok(y);
        }
        if !(*h > 0.0) {
            *h = (span * 0.1).min(0.01);
        }
        let mut x = x0;
        let mut k1 = self.rhs(x, &y);
        let mut steps = 0usize;
        loop {
            let remaining = (x1 - x) * dir;
            if remaining <= span * 1e-14 {
                return Ok(y);
            }
            let mut step = h.min(remaining);
            let last = step >= remaining;
            if last {
                step = remaining;
            }
            let hs = dir * step;
            let (y_new, k7, err) = self.trial(x, &y, &k1, hs);
            steps += 1;
            if steps > self.opts.max_steps {
                return Err(Error::Integration {
                    x,
                    reason: "step budget exhausted".into(),
                });
            }
            if !err.is_finite() {
                return Err(Error::Integration {
                    x,
                    reason: "non-finite error estimate".into(),
                });
            }
            if err <= 1.0 {
                x = if last { x1 } else { x + hs };
                y = y_new;
                k1 = k7;
                let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    *h = step * grow;
                } else {
                    *h = h.max(step * grow);
                }
            } else {
                let shrink = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                *h = step * shrink;
                if *h < self.opts.h_min {
                    return Err(Error::Integration {
                        x,
                        reason: format!("step size underflow ({:e})", *h),
                    });
                }
            }
        }
    }

    fn trial(&self, x: f64, y: &State, k1: &State, h: f64) -> (State, State, f64) {
        let comb = |coef: &[(f64, &State)]| -> State {
            let mut out = *y;
            for (c, k) in coef {
                out[0] += h * c * k[0];
                out[1] += h * c * k[1];
            }
            out
        };
        let k2 = self.rhs(x + C2 * h, &comb(&[(A21, k1)]));
        let k3 = self.rhs(x + C3 * h, &comb(&[(A31, k1), (A32, &k2)]));
        let k4 = self.rhs(x + C4 * h, &comb(&[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = self.rhs(
            x + C5 * h,
            &comb(&[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = self.rhs(
            x + h,
            &comb(&[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = comb(&[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = self.rhs(x + h, &y_new);
        let mut acc = 0.0;
        for c in 0..2 {
            let e = h
                * (E1 * k1[c] + E3 * k3[c] + E4 * k4[c] + E5 * k5[c] + E6 * k6[c] + E7 * k7[c]);
            let scale = self.opts.atol + self.opts.rtol * y[c].norm().max(y_new[c].norm());
            acc += (e.norm() / scale).powi(2);
        }
        (y_new, k7, (acc / 2.0).sqrt())
    }
}

/// Integrates `-u'' + V u = k² u` from `x_start` (with `u = u0`, `u' = du0`)
/// towards `x_end`, recording `u` and `u'` at every point of `grid`. The grid
/// must lie inside the integration interval.
pub fn integrate_schrodinger(
    pot_eval: &(dyn Fn(f64) -> f64 + Sync),
    k_squared: f64,
    x_start: f64,
    x_end: f64,
    u0: Complex64,
    du0: Complex64,
    grid: &Grid,
) -> Result<(FunctionSample, FunctionSample)> {
    integrate_schrodinger_with(
        pot_eval,
        k_squared,
        x_start,
        x_end,
        [u0, du0],
        grid,
        IntegratorOptions::default(),
    )
}

pub fn integrate_schrodinger_with(
    pot_eval: &(dyn Fn(f64) -> f64 + Sync),
    k_squared: f64,
    x_start: f64,
    x_end: f64,
    initial: State,
    grid: &Grid,
    opts: IntegratorOptions,
) -> Result<(FunctionSample, FunctionSample)> {
    let (lo, hi) = (x_start.min(x_end), x_start.max(x_end));
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if grid.x_min() < lo - slack || grid.x_max() > hi + slack {
        return Err(Error::InvalidParameter(format!(
            "grid [{}, {}] not inside integration interval [{lo}, {hi}]",
            grid.x_min(),
            grid.x_max()
        )));
    }
    let solver = SchrodingerIntegrator::new(pot_eval, k_squared).with_options(opts);
    let n = grid.len();
    let order: Vec<usize> = if x_end >= x_start {
        (0..n).collect()
    } else {
        (0..n).rev().collect()
    };
    let mut u = vec![Complex64::new(0.0, 0.0); n];
    let mut du = vec![Complex64::new(0.0, 0.0); n];
    let mut x = x_start;
    let mut y = initial;
    let mut h = 0.0;
    for i in order {
        let xi = grid.x(i);
        y = solver.advance(x, xi, y, &mut h)?;
        x = xi;
        u[i] = y[0];
        du[i] = y[1];
    }
    Ok((FunctionSample::new(*grid, u)?, FunctionSample::new(*grid, du)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sech2(x: f64) -> f64 {
        let c = x.cosh();
        1.0 / (c * c)
    }

    #[test]
    fn free_plane_wave() {
        let grid = Grid::new(0.0, 10.0, 501).unwrap();
        let zero = |_: f64| 0.0;
        let (u, du) = integrate_schrodinger(
            &zero,
            1.0,
            0.0,
            10.0,
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            &grid,
        )
        .unwrap();
        for i in 0..grid.len() {
            let x = grid.x(i);
            let exact = Complex64::new(0.0, x).exp();
            assert!((u.values()[i] - exact).norm() < 1e-8, "x = {x}");
            assert!((du.values()[i] - Complex64::i() * exact).norm() < 1e-8);
        }
    }

    #[test]
    fn bound_state_of_single_well_is_sech() {
        // E = -1 with decaying data at the right end reproduces sech x.
        // Backward from x = 20 the decaying branch is dominant up to the well;
        // past it the growing companion takes over, so compare on [-2, 20].
        let grid = Grid::new(-2.0, 20.0, 221).unwrap();
        let v = |x: f64| -2.0 * sech2(x);
        let x0 = 20.0;
        let (u, _) = integrate_schrodinger(
            &v,
            -1.0,
            x0,
            -2.0,
            Complex64::new(1.0 / x0.cosh(), 0.0),
            Complex64::new(-x0.tanh() / x0.cosh(), 0.0),
            &grid,
        )
        .unwrap();
        for i in 0..grid.len() {
            let x = grid.x(i);
            let exact = 1.0 / x.cosh();
            assert!((u.values()[i].re - exact).abs() < 1e-6 * exact, "x = {x}");
        }
    }

    #[test]
    fn wronskian_is_constant() {
        let grid = Grid::new(-8.0, 8.0, 321).unwrap();
        let v = |x: f64| -6.0 * sech2(x) + 0.3 * (-x * x).exp();
        let a = integrate_schrodinger(&v, 0.7, -8.0, 8.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), &grid).unwrap();
        let b = integrate_schrodinger(&v, 0.7, -8.0, 8.0, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), &grid).unwrap();
        for i in 0..grid.len() {
            let w = a.0.values()[i] * b.1.values()[i] - b.0.values()[i] * a.1.values()[i];
            assert!((w - 1.0).norm() < 1e-8, "W = {w} at {}", grid.x(i));
        }
    }

    #[test]
    fn grid_outside_interval_is_rejected() {
        let grid = Grid::new(-1.0, 1.0, 11).unwrap();
        let zero = |_: f64| 0.0;
        assert!(integrate_schrodinger(&zero, 1.0, 0.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), &grid).is_err());
    }

    #[test]
    fn step_underflow_reports_location() {
        let grid = Grid::new(0.0, 1.0, 3).unwrap();
        let wild = |x: f64| if x > 0.5 { f64::NAN } else { 0.0 };
        let err = integrate_schrodinger(&wild, 1.0, 0.0, 1.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), &grid)
            .unwrap_err();
        match err {
            Error::Integration { x, .. } => assert!((0.0..=0.5 + 1e-9).contains(&x)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
