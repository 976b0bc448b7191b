use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// The two admissible window constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Transition of the cutoff on `[1/2, 1]`, built from `e^{-1/t}`.
    SqrtPartition,
    /// Transition on `[0.6, 1]`, built from `e^{-1/t²}`.
    ShiftedSqrt,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::SqrtPartition, Variant::ShiftedSqrt];

    pub fn name(&self) -> &'static str {
        match self {
            Variant::SqrtPartition => "sqrt-partition",
            Variant::ShiftedSqrt => "shifted-sqrt",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sqrt-partition" => Ok(Variant::SqrtPartition),
            "shifted-sqrt" => Ok(Variant::ShiftedSqrt),
            _ => Err(Error::InvalidParameter(format!(
                "unknown dyadic variant '{s}' (expected sqrt-partition or shifted-sqrt)"
            ))),
        }
    }
}

/// Smooth even windows `Φ, φ, Ψ, ψ` with
/// `Φ Ψ + Σ_{j≥1} φ(2^{-j}·) ψ(2^{-j}·) ≡ 1`.
///
/// A cutoff `η` equals 1 on `|ξ| ≤ a` and 0 on `|ξ| ≥ b`; then
/// `Φ = Ψ = √η` and `φ = ψ = √(η(ξ) - η(2ξ))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicSystem {
    variant: Variant,
    a: f64,
    b: f64,
    c_lower: f64,
}

impl DyadicSystem {
    pub fn new(variant: Variant) -> Self {
        let (a, b) = match variant {
            Variant::SqrtPartition => (0.5, 1.0),
            Variant::ShiftedSqrt => (0.6, 1.0),
        };
        let mut sys = Self {
            variant,
            a,
            b,
            c_lower: 0.0,
        };
        sys.c_lower = sys.measure_c_lower();
        sys
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Smallest of `|Φ|` on `|ξ| ≤ 1/2` and `|φ|` on `3/8 ≤ |ξ| ≤ 7/8`.
    pub fn c_lower(&self) -> f64 {
        self.c_lower
    }

    fn measure_c_lower(&self) -> f64 {
        let m = 2000;
        let inner = (0..=m)
            .map(|i| self.big_phi(0.5 * i as f64 / m as f64))
            .fold(f64::INFINITY, f64::min);
        let ring = (0..=m)
            .map(|i| self.phi(0.375 + 0.5 * i as f64 / m as f64))
            .fold(f64::INFINITY, f64::min);
        inner.min(ring)
    }

    fn bump(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self.variant {
            Variant::SqrtPartition => (-1.0 / t).exp(),
            Variant::ShiftedSqrt => (-1.0 / (t * t)).exp(),
        }
    }

    /// `(η(ξ), 1 - η(ξ))`, each computed without cancellation.
    fn cutoff_pair(&self, xi: f64) -> (f64, f64) {
        let x = xi.abs();
        if x <= self.a {
            return (1.0, 0.0);
        }
        if x >= self.b {
            return (0.0, 1.0);
        }
        let t = (x - self.a) / (self.b - self.a);
        let f0 = self.bump(t);
        let f1 = self.bump(1.0 - t);
        (f1 / (f0 + f1), f0 / (f0 + f1))
    }

    pub fn cutoff(&self, xi: f64) -> f64 {
        self.cutoff_pair(xi).0
    }

    /// `η(ξ) - η(2ξ)`, supported in `1/4 ≤ |ξ| ≤ 1`.
    pub fn ring(&self, xi: f64) -> f64 {
        let (eta, _) = self.cutoff_pair(xi);
        let (eta2, comp2) = self.cutoff_pair(2.0 * xi);
        if eta2 == 0.0 {
            eta
        } else if eta == 1.0 {
            comp2
        } else {
            (eta - eta2).max(0.0)
        }
    }

    #[allow(non_snake_case)]
    pub fn big_phi(&self, xi: f64) -> f64 {
        self.cutoff(xi).sqrt()
    }

    #[allow(non_snake_case)]
    pub fn big_psi(&self, xi: f64) -> f64 {
        self.big_phi(xi)
    }

    pub fn phi(&self, xi: f64) -> f64 {
        self.ring(xi).sqrt()
    }

    pub fn psi(&self, xi: f64) -> f64 {
        self.phi(xi)
    }

    /// Analysis symbol of band `j`: `Φ` for `j = 0`, `φ(2^{-j}ξ)` otherwise.
    pub fn analysis_symbol(&self, j: i32, xi: f64) -> f64 {
        if j == 0 {
            self.big_phi(xi)
        } else {
            self.phi(xi * (-j as f64).exp2())
        }
    }

    /// Synthesis symbol of band `j`: `Ψ` for `j = 0`, `ψ(2^{-j}ξ)` otherwise.
    pub fn synthesis_symbol(&self, j: i32, xi: f64) -> f64 {
        if j == 0 {
            self.big_psi(xi)
        } else {
            self.psi(xi * (-j as f64).exp2())
        }
    }

    /// `φ(2^{-j}ξ)` for any integer `j`, as used by the homogeneous scale.
    pub fn homogeneous_symbol(&self, j: i32, xi: f64) -> f64 {
        self.phi(xi * (-j as f64).exp2())
    }

    /// `|k|` range where band `j` can be nonzero on the continuous spectrum.
    pub fn band_k_range(j: i32) -> (f64, f64) {
        if j == 0 {
            (0.0, 1.0)
        } else {
            (((j - 2) as f64 / 2.0).exp2(), (j as f64 / 2.0).exp2())
        }
    }

    /// `Φ Ψ(ξ) + Σ_{j≥1} φ_j ψ_j(ξ) - 1`, summing every band that can be
    /// nonzero at `ξ`.
    pub fn identity_residual(&self, xi: f64) -> f64 {
        let top = if xi.abs() <= 1.0 {
            1
        } else {
            xi.abs().log2().ceil() as i32 + 2
        };
        let mut sum = self.big_phi(xi) * self.big_psi(xi);
        for j in 1..=top {
            sum += self.analysis_symbol(j, xi) * self.synthesis_symbol(j, xi);
        }
        sum - 1.0
    }
}
