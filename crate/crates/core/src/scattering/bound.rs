use num_complex::Complex64;

use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::{
    second_derivative, FunctionSample, Grid, IntegratorOptions, SchrodingerIntegrator, FD_MARGIN,
};

/// `sech^j(y) q(tanh y)` with `y = a(x - h)`, times a normalizing amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundStateForm {
    sech_power: u32,
    /// Coefficients of `q` in ascending powers of `t`.
    poly: Vec<f64>,
    scale: f64,
    shift: f64,
    amplitude: f64,
}

impl BoundStateForm {
    /// Ground state `sech^j` of the level-`j` well pushed up the ladder
    /// `T_m = d/dy - m tanh y`, `m = j+1..=n`: an eigenfunction of the
    /// level-`n` well at energy `-j²`.
    fn ladder(j: u32, n: u32) -> Vec<f64> {
        let jf = j as f64;
        let mut q = vec![1.0];
        for m in (j + 1)..=n {
            let mf = m as f64;
            // d/dy [sech^j q(t)] = sech^j [(1 - t²) q' - j t q]
            let mut next = vec![0.0; q.len() + 1];
            for (a, &c) in q.iter().enumerate() {
                if a >= 1 {
                    next[a - 1] += a as f64 * c;
                    next[a + 1] -= a as f64 * c;
                }
                next[a + 1] -= (jf + mf) * c;
            }
            q = next;
        }
        q
    }

    pub fn sech_power(&self) -> u32 {
        self.sech_power
    }

    pub fn poly(&self) -> &[f64] {
        &self.poly
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let y = self.scale * (x - self.shift);
        let t = y.tanh();
        let sech = 1.0 / y.cosh();
        let q = self.poly.iter().rev().fold(0.0, |acc, &c| acc * t + c);
        self.amplitude * sech.powi(self.sech_power as i32) * q
    }
}

/// An L²-normalized eigenfunction with eigenvalue `-a² j²`.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub index: u32,
    pub eigenvalue: f64,
    pub samples: FunctionSample,
    pub form: BoundStateForm,
}

impl BoundState {
    /// `‖-u'' + V u - E u‖₂ / ‖u‖₂` over the grid interior, eighth-order
    /// finite differences.
    pub fn residual(&self, pot: &Potential) -> f64 {
        let grid = self.samples.grid();
        let vals = self.samples.values();
        let d2 = second_derivative(vals, grid.spacing());
        let mut num = 0.0;
        let mut den = 0.0;
        for (m, d) in d2.iter().enumerate() {
            let i = m + FD_MARGIN;
            let w = grid.weight(i);
            let r = -d + (pot.value(grid.x(i)) - self.eigenvalue) * vals[i];
            num += w * r.norm_sqr();
            den += w * vals[i].norm_sqr();
        }
        (num / den).sqrt()
    }
}

/// Smallest `a·d` for which `sech(a·d) < 1e-10`.
const SECH_DECAY_ARG: f64 = 23.719;

/// Bound states of an integer-level well, `j = 1..=n`, sampled on `grid`
/// and normalized in the grid's trapezoid inner product.
pub fn bound_states(pot: &Potential, grid: &Grid) -> Result<Vec<BoundState>> {
    let n = pot.require_level()?;
    if n == 0 {
        return Err(Error::Precondition("free operator has no bound states".into()));
    }
    let reach = pot.scale() * grid.half_width_about(pot.shift());
    if reach < SECH_DECAY_ARG {
        return Err(Error::Precondition(format!(
            "grid reaches only a·d = {reach:.3} from the well; need {SECH_DECAY_ARG}"
        )));
    }
    let a2 = pot.scale() * pot.scale();
    (1..=n)
        .map(|j| {
            let mut form = BoundStateForm {
                sech_power: j,
                poly: BoundStateForm::ladder(j, n),
                scale: pot.scale(),
                shift: pot.shift(),
                amplitude: 1.0,
            };
            let raw = FunctionSample::from_real_fn(*grid, |x| form.eval(x));
            let norm = raw.l2_norm();
            form.amplitude = 1.0 / norm;
            Ok(BoundState {
                index: j,
                eigenvalue: -a2 * (j * j) as f64,
                samples: raw.scaled(Complex64::new(1.0 / norm, 0.0)),
                form,
            })
        })
        .collect()
}

/// Bound-state energies by shooting, independent of the closed forms.
///
/// Integrates inward from `h ± L` with exact decaying data `e^{-κ|x-h|}`
/// and locates the energies where the even (`u'(h) = 0`) or odd
/// (`u(h) = 0`) matching condition holds. Works for integer and
/// continuous λ. Returned in increasing `|E|`.
pub fn shooting_point_spectrum(pot: &Potential) -> Result<Vec<f64>> {
    let depth = pot.depth();
    if depth == 0.0 {
        return Ok(Vec::new());
    }
    let kappa_max = depth.sqrt();
    let reach = 35.0 / pot.scale();
    let v = |x: f64| pot.value(x);
    let opts = IntegratorOptions {
        rtol: 1e-12,
        atol: 1e-300,
        ..IntegratorOptions::default()
    };
    let center = pot.shift();
    let mismatch = |kappa: f64, odd: bool| -> Result<f64> {
        let solver = SchrodingerIntegrator::new(&v, -kappa * kappa).with_options(opts);
        let mut h = 0.0;
        let y = solver.advance(
            center + reach,
            center,
            [Complex64::new(1.0, 0.0), Complex64::new(-kappa, 0.0)],
            &mut h,
        )?;
        let (u, du) = (y[0].re, y[1].re);
        let size = u.hypot(du);
        Ok(if odd { u / size } else { du / size })
    };

    let samples = 600usize;
    let lo = kappa_max * 1e-4;
    let hi = kappa_max * (1.0 - 1e-9);
    let nodes: Vec<f64> = (0..=samples)
        .map(|i| lo + (hi - lo) * i as f64 / samples as f64)
        .collect();
    let mut roots = Vec::new();
    for odd in [false, true] {
        let values: Vec<f64> = nodes
            .iter()
            .map(|&kap| mismatch(kap, odd))
            .collect::<Result<_>>()?;
        for i in 0..samples {
            let (fa, fb) = (values[i], values[i + 1]);
            if fa == 0.0 {
                roots.push(nodes[i]);
                continue;
            }
            if fa * fb < 0.0 {
                let (mut a, mut b, mut fa) = (nodes[i], nodes[i + 1], fa);
                while b - a > 1e-14 * b {
                    let mid = 0.5 * (a + b);
                    let fm = mismatch(mid, odd)?;
                    if fm == 0.0 {
                        a = mid;
                        b = mid;
                        break;
                    }
                    if fa * fm < 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                        fa = fm;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(roots.into_iter().map(|k| -k * k).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid() -> Grid {
        Grid::new(-30.0, 30.0, 3001).unwrap()
    }

    #[test]
    fn ladder_reproduces_known_states() {
        // n = 2: j = 1 gives a multiple of tanh, j = 2 gives a constant.
        assert_eq!(BoundStateForm::ladder(1, 2), vec![0.0, -3.0]);
        assert_eq!(BoundStateForm::ladder(2, 2), vec![1.0]);
        assert_eq!(BoundStateForm::ladder(1, 1), vec![1.0]);
    }

    #[test]
    fn single_well_state_is_normalized_sech() {
        let states = bound_states(&Potential::integer(1), &grid()).unwrap();
        assert_eq!(states.len(), 1);
        let s = &states[0];
        assert_eq!(s.eigenvalue, -1.0);
        // ‖sech‖₂ = √2
        for i in (0..3001).step_by(97) {
            let x = grid().x(i);
            assert_relative_eq!(s.samples.values()[i].re.abs(), 1.0 / (2f64.sqrt() * x.cosh()), epsilon = 1e-10);
        }
    }

    #[test]
    fn double_well_states_and_orthogonality() {
        let pot = Potential::integer(2);
        let states = bound_states(&pot, &grid()).unwrap();
        assert_eq!(states.len(), 2);
        assert_eq!(states[0].eigenvalue, -1.0);
        assert_eq!(states[1].eigenvalue, -4.0);
        // sech x tanh x at -1, sech² x at -4
        let g = grid();
        let x = 0.8f64;
        let i = ((x - g.x_min()) / g.spacing()).round() as usize;
        let xi = g.x(i);
        let r0 = states[0].samples.values()[i].re / (xi.tanh() / xi.cosh());
        let r1 = states[1].samples.values()[i].re / (1.0 / xi.cosh().powi(2));
        for m in (0..g.len()).step_by(211) {
            let xm = g.x(m);
            assert_relative_eq!(states[0].samples.values()[m].re, r0 * xm.tanh() / xm.cosh(), epsilon = 1e-12);
            assert_relative_eq!(states[1].samples.values()[m].re, r1 / xm.cosh().powi(2), epsilon = 1e-12);
        }
        let ip = states[0].samples.inner(&states[1].samples).unwrap();
        assert!(ip.norm() < 1e-10);
    }

    #[test]
    fn normalized_orthogonal_and_residual_small() {
        for n in 1..=4u32 {
            let pot = Potential::integer(n).with_scale(1.5).unwrap().with_shift(-2.0);
            let g = Grid::new(-30.0, 30.0, 6001).unwrap();
            let states = bound_states(&pot, &g).unwrap();
            for (a, sa) in states.iter().enumerate() {
                assert!((sa.samples.l2_norm() - 1.0).abs() < 1e-8);
                assert!(sa.residual(&pot) < 1e-6, "n={n} j={} residual {}", sa.index, sa.residual(&pot));
                for sb in states.iter().skip(a + 1) {
                    assert!(sa.samples.inner(&sb.samples).unwrap().norm() < 1e-8);
                }
                // the symbolic form agrees with the samples
                for i in (0..g.len()).step_by(313) {
                    assert!((sa.form.eval(g.x(i)) - sa.samples.values()[i].re).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn narrow_grid_rejected() {
        let g = Grid::new(-10.0, 10.0, 201).unwrap();
        assert!(matches!(bound_states(&Potential::integer(1), &g), Err(Error::Precondition(_))));
        assert!(bound_states(&Potential::free(), &grid()).is_err());
        assert!(bound_states(&Potential::continuous(2.5).unwrap(), &grid()).is_err());
    }

    #[test]
    fn shooting_finds_integer_spectra() {
        for n in 1..=3u32 {
            let found = shooting_point_spectrum(&Potential::integer(n)).unwrap();
            let expect = crate::scattering::point_spectrum(n);
            assert_eq!(found.len(), expect.len(), "n = {n}: {found:?}");
            for (f, e) in found.iter().zip(&expect) {
                assert!((f - e).abs() < 1e-6, "n = {n}: {f} vs {e}");
            }
        }
        assert!(shooting_point_spectrum(&Potential::free()).unwrap().is_empty());
    }

    #[test]
    fn shooting_agrees_with_continuous_formula() {
        for &lambda in &[1.2, 2.5, 3.3] {
            let pot = Potential::continuous(lambda).unwrap();
            let mut found = shooting_point_spectrum(&pot).unwrap();
            let mut expect = crate::scattering::continuous_point_spectrum(lambda).unwrap();
            found.sort_by(|a, b| a.partial_cmp(b).unwrap());
            expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert_eq!(found.len(), expect.len(), "lambda {lambda}: {found:?}");
            for (f, e) in found.iter().zip(&expect) {
                assert!((f - e).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn shooting_respects_scale_and_shift() {
        let pot = Potential::integer(2).with_scale(0.5).unwrap().with_shift(1.5);
        let found = shooting_point_spectrum(&pot).unwrap();
        assert_eq!(found.len(), 2);
        assert!((found[0] + 0.25).abs() < 1e-6);
        assert!((found[1] + 1.0).abs() < 1e-6);
    }
}
