use rayon::prelude::*;
use serde::Serialize;

use super::battery::TestFunction;
use super::norms::{NormContext, NormSpec};
use crate::error::{Error, Result};
use crate::numerics::lp_norm;

/// One function's norm pair and their quotient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRecord {
    pub function_id: String,
    pub numerator: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// Ratios over a battery with their extremes. Functions whose norms vanish
/// on one side only are listed as anomalies and excluded from the extremes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioStats {
    pub spec: NormSpec,
    pub records: Vec<RatioRecord>,
    pub anomalies: Vec<String>,
    pub min: f64,
    pub max: f64,
}

impl RatioStats {
    pub fn from_records(spec: NormSpec, records: Vec<RatioRecord>) -> Self {
        let mut anomalies = Vec::new();
        let (mut min, mut max) = (f64::INFINITY, 0.0f64);
        for r in &records {
            if r.ratio.is_finite() && r.ratio > 0.0 {
                min = min.min(r.ratio);
                max = max.max(r.ratio);
            } else if !(r.numerator == 0.0 && r.denominator == 0.0) {
                anomalies.push(r.function_id.clone());
            }
        }
        Self {
            spec,
            records,
            anomalies,
            min,
            max,
        }
    }

    /// `max / min`, infinite when nothing finite was seen.
    pub fn spread(&self) -> f64 {
        if self.min.is_finite() && self.min > 0.0 {
            self.max / self.min
        } else {
            f64::INFINITY
        }
    }

    /// Smallest `C` with every ratio in `[1/C, C]`.
    pub fn symmetric_bound(&self) -> f64 {
        self.max.max(1.0 / self.min)
    }

    pub fn is_finite(&self) -> bool {
        self.anomalies.is_empty() && self.spread().is_finite()
    }

    /// Finite spread with every ratio inside `[1/bound, bound]`.
    pub fn within(&self, bound: f64) -> bool {
        self.is_finite() && self.symmetric_bound() <= bound
    }

    /// Columns `function_id,numerator,denominator,ratio`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "function_id,numerator,denominator,ratio")?;
        for r in &self.records {
            writeln!(w, "{},{:e},{:e},{:e}", r.function_id, r.numerator, r.denominator, r.ratio)?;
        }
        Ok(())
    }
}

fn ratios(
    spec: NormSpec,
    battery: &[TestFunction],
    pair: impl Fn(&TestFunction) -> Result<(f64, f64)> + Sync,
) -> Result<RatioStats> {
    let records = battery
        .par_iter()
        .map(|t| {
            let (numerator, denominator) = pair(t)?;
            Ok(RatioRecord {
                function_id: t.id.clone(),
                numerator,
                denominator,
                ratio: numerator / denominator,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioStats::from_records(spec, records))
}

/// `‖f‖_A / ‖f‖_B` for two dyadic systems over the same basis.
pub fn equivalence_experiment(
    a: &NormContext,
    b: &NormContext,
    spec: &NormSpec,
    battery: &[TestFunction],
) -> Result<RatioStats> {
    if a.basis.grid() != b.basis.grid() {
        return Err(Error::GridMismatch("both contexts must share a grid".into()));
    }
    ratios(*spec, battery, |t| Ok((a.norm(&t.sample, spec)?, b.norm(&t.sample, spec)?)))
}

/// `‖f‖_{F_p^{0,2}(H)} / ‖f‖_p`.
pub fn lp_identification(ctx: &NormContext, p: f64, top: i32, battery: &[TestFunction]) -> Result<RatioStats> {
    let spec = NormSpec::tl(0.0, p, 2.0).with_top(top);
    ratios(spec, battery, |t| Ok((ctx.norm(&t.sample, &spec)?, lp_norm(&t.sample, p)?)))
}

/// `‖f‖_{B_p^{α,q}(H)} / ‖f‖_{B_p^{α,q}(H₀)}`. Smoothness `α` for `H`
/// matches `2α` for the classical scale, so the free-operator norm with
/// the same `α` realizes the classical `B_p^{2α,q}`.
pub fn besov_identification(
    ctx: &NormContext,
    free: &NormContext,
    spec: &NormSpec,
    battery: &[TestFunction],
) -> Result<RatioStats> {
    if free.basis.potential().level() != Some(0) {
        return Err(Error::InvalidParameter("the reference context must use the free operator".into()));
    }
    ratios(*spec, battery, |t| Ok((ctx.norm(&t.sample, spec)?, free.norm(&t.sample, spec)?)))
}
