use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coupling of the well: integer level `n` (λ = n + 1) or real λ > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strength {
    Level(u32),
    Lambda(f64),
}

/// `V(x) = -λ(λ-1) a² sech²(a(x - h))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    strength: Strength,
    scale: f64,
    shift: f64,
}

impl Potential {
    pub fn integer(n: u32) -> Self {
        Self {
            strength: Strength::Level(n),
            scale: 1.0,
            shift: 0.0,
        }
    }

    /// The free operator `-d²/dx²`.
    pub fn free() -> Self {
        Self::integer(0)
    }

    pub fn continuous(lambda: f64) -> Result<Self> {
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(Error::Domain(format!("need lambda > 1, got {lambda}")));
        }
        Ok(Self {
            strength: Strength::Lambda(lambda),
            scale: 1.0,
            shift: 0.0,
        })
    }

    pub fn with_scale(mut self, scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "scale must be positive, got {scale}"
            )));
        }
        self.scale = scale;
        Ok(self)
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = shift;
        self
    }

    pub fn strength(&self) -> Strength {
        self.strength
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn lambda(&self) -> f64 {
        match self.strength {
            Strength::Level(n) => n as f64 + 1.0,
            Strength::Lambda(l) => l,
        }
    }

    pub fn level(&self) -> Option<u32> {
        match self.strength {
            Strength::Level(n) => Some(n),
            Strength::Lambda(_) => None,
        }
    }

    /// The integer level, or a precondition error for continuous λ.
    pub fn require_level(&self) -> Result<u32> {
        self.level().ok_or_else(|| {
            Error::Precondition("operation needs an integer-level potential".into())
        })
    }

    /// `λ(λ-1) a²`, the well depth.
    pub fn depth(&self) -> f64 {
        let l = self.lambda();
        l * (l - 1.0) * self.scale * self.scale
    }

    /// Maps `x` to the dimensionless coordinate `a(x - h)`.
    #[inline]
    pub fn reduced(&self, x: f64) -> f64 {
        self.scale * (x - self.shift)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let c = self.reduced(x).cosh();
        -self.depth() / (c * c)
    }

    /// Point spectrum `{-a² j²}` for integer levels, `j = 1..n`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let a2 = self.scale * self.scale;
        match self.strength {
            Strength::Level(n) => point_spectrum(n).into_iter().map(|e| e * a2).collect(),
            Strength::Lambda(l) => continuous_point_spectrum(l)
                .unwrap_or_default()
                .into_iter()
                .map(|e| e * a2)
                .collect(),
        }
    }
}

/// `{-1, -4, …, -n²}` in order of `j`.
pub fn point_spectrum(n: u32) -> Vec<f64> {
    (1..=n).map(|j| -((j * j) as f64)).collect()
}

/// `{-(λ-1-j)² : j = 0, 1, …, λ-1-j > 0}` in order of `j`; zero energy is a
/// resonance and is excluded.
pub fn continuous_point_spectrum(lambda: f64) -> Result<Vec<f64>> {
    if !(lambda > 1.0) {
        return Err(Error::Domain(format!("need lambda > 1, got {lambda}")));
    }
    let mut out = Vec::new();
    let mut j = 0.0;
    while lambda - 1.0 - j > 1e-12 {
        let m = lambda - 1.0 - j;
        out.push(-m * m);
        j += 1.0;
    }
    Ok(out)
}
