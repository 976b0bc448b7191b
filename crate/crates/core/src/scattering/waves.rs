use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::polynomial::{ScatteringPolynomial, TPolynomial};
use super::potential::Potential;
use crate::error::{Error, Result};
use crate::numerics::Grid;

/// Distorted plane waves `e(x, k)` of an integer-level potential.
///
/// For the unit well
/// `e(x, k) = sign(k)^n Π_j (j + i|k|)^{-1} p_n(tanh x, ik) e^{ikx}`;
/// a scale `a` and shift `h` enter through `κ = k/a` and `tanh(a(x - h))`,
/// keeping the asymptotics `e^{ikx}`.
#[derive(Debug, Clone)]
pub struct DistortedWaves {
    pot: Potential,
    level: u32,
    poly: ScatteringPolynomial,
}

impl DistortedWaves {
    pub fn new(pot: &Potential) -> Result<Self> {
        let level = pot.require_level()?;
        Ok(Self {
            pot: *pot,
            level,
            poly: ScatteringPolynomial::new(level as usize),
        })
    }

    pub fn potential(&self) -> &Potential {
        &self.pot
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn polynomial(&self) -> &ScatteringPolynomial {
        &self.poly
    }

    #[inline]
    fn kappa(&self, k: f64) -> f64 {
        k / self.pot.scale()
    }

    /// The polynomial in `t` at fixed `k`: `t ↦ p_n(t, iκ)`.
    pub fn bind(&self, k: f64) -> BoundWave {
        BoundWave {
            k,
            scale: self.pot.scale(),
            shift: self.pot.shift(),
            poly: self.poly.bind_kappa(Complex64::new(0.0, self.kappa(k))),
        }
    }

    /// `sign(k)^n Π_j (j + i|κ|)^{-1}`.
    pub fn normalization(&self, k: f64) -> Complex64 {
        let kappa = self.kappa(k).abs();
        let mut acc = Complex64::new(1.0, 0.0);
        for j in 1..=self.level {
            acc /= Complex64::new(j as f64, kappa);
        }
        if k < 0.0 && self.level % 2 == 1 {
            -acc
        } else {
            acc
        }
    }

    /// `Π_j (j² + κ²)^{-1}`, the rational weight of the analytic product
    /// `e(x,k) conj(e(y,k)) = weight · P(x) conj(P(y)) e^{ik(x-y)}`.
    pub fn product_weight(&self, k: f64) -> f64 {
        let kappa2 = self.kappa(k).powi(2);
        (1..=self.level)
            .map(|j| 1.0 / ((j * j) as f64 + kappa2))
            .product()
    }

    pub fn eval(&self, x: f64, k: f64) -> Result<Complex64> {
        check_nonzero(k)?;
        Ok(self.normalization(k) * self.bind(k).bare(x))
    }

    /// Samples `e(·, k)` on a grid.
    pub fn sample(&self, grid: &Grid, k: f64) -> Result<Vec<Complex64>> {
        check_nonzero(k)?;
        let norm = self.normalization(k);
        let w = self.bind(k);
        Ok((0..grid.len()).map(|i| norm * w.bare(grid.x(i))).collect())
    }
}

/// `P(x, ik) e^{ikx}` for one fixed `k`.
#[derive(Debug, Clone)]
pub struct BoundWave {
    k: f64,
    scale: f64,
    shift: f64,
    poly: TPolynomial,
}

impl BoundWave {
    #[inline]
    pub fn bare(&self, x: f64) -> Complex64 {
        let t = (self.scale * (x - self.shift)).tanh();
        self.poly.eval(t) * Complex64::from_polar(1.0, self.k * x)
    }

    /// Value and x-derivative of [`BoundWave::bare`].
    #[inline]
    pub fn bare_with_derivative(&self, x: f64) -> (Complex64, Complex64) {
        let t = (self.scale * (x - self.shift)).tanh();
        let (p, dp) = self.poly.eval_with_dt(t);
        let phase = Complex64::from_polar(1.0, self.k * x);
        let value = p * phase;
        let deriv = (self.scale * (1.0 - t * t) * dp + Complex64::new(0.0, self.k) * p) * phase;
        (value, deriv)
    }
}

fn check_nonzero(k: f64) -> Result<()> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!(
            "k = {k}: zero energy is a resonance and is excluded"
        )));
    }
    Ok(())
}

/// `e(x, k)` for an integer-level potential.
pub fn eigenfunction(pot: &Potential, x: f64, k: f64) -> Result<Complex64> {
    DistortedWaves::new(pot)?.eval(x, k)
}

/// Which asymptotic end the transmission coefficient refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

/// `T₊(k) = (-1)^n Π (j - ik)/(j + ik)` and `T₋(k) = (-1)^n Π (j + ik)/(j - ik)`
/// (unit-scale well).
pub fn transmission(n: u32, k: f64, side: Side) -> Result<Complex64> {
    check_nonzero(k)?;
    let mut acc = Complex64::new(1.0, 0.0);
    for j in 1..=n {
        let a = Complex64::new(j as f64, -k);
        let b = Complex64::new(j as f64, k);
        acc *= match side {
            Side::Plus => a / b,
            Side::Minus => b / a,
        };
    }
    Ok(if n % 2 == 1 { -acc } else { acc })
}

/// Reflection coefficients of the integer-level wells vanish identically.
pub fn reflection(_n: u32, k: f64, _side: Side) -> Result<Complex64> {
    check_nonzero(k)?;
    Ok(Complex64::new(0.0, 0.0))
}

/// Trapezoid value of `∫ sech(kz) (iη - k tanh(kz)) e^{iηz} dz`, the pairing
/// of a bound state against a propagating wave.
pub fn orthogonality_integral(k: f64, eta: f64, grid: &Grid) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter(format!("need k > 0, got {k}")));
    }
    Ok((0..grid.len())
        .map(|i| {
            let z = grid.x(i);
            let kz = k * z;
            let sech = 1.0 / kz.cosh();
            grid.weight(i)
                * sech
                * Complex64::new(-k * kz.tanh(), eta)
                * Complex64::from_polar(1.0, eta * z)
        })
        .sum())
}
