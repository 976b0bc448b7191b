use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;

use super::propagator::{check_phase_resolution, evolve_coeffs};
use crate::error::{Error, Result};
use crate::numerics::FunctionSample;
use crate::spaces::{Family, NormContext, NormSpec};

/// Largest share of `‖ψ(t)‖₂²` allowed in the outer tenth of each half of
/// the grid.
pub const LEAKAGE_LIMIT: f64 = 0.01;

/// A norm tabulated over the evolution times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormSeries {
    pub spec: NormSpec,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<FunctionSample>,
    pub norms: Vec<NormSeries>,
}

impl EvolutionResult {
    pub fn l2_norms(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.l2_norm()).collect()
    }

    /// Largest relative change of `‖ψ(t)‖₂` from the first listed time.
    pub fn unitarity_defect(&self) -> f64 {
        let norms = self.l2_norms();
        norms.iter().map(|n| (n - norms[0]).abs() / norms[0]).fold(0.0, f64::max)
    }
}

/// Share of `reference` (a squared L² norm) that is not found in the inner
/// 90% of the grid: mass near the edges plus mass already gone.
pub fn boundary_leakage(f: &FunctionSample, reference: f64) -> f64 {
    let g = f.grid();
    let (lo, hi) = (g.x_min() + 0.05 * g.extent(), g.x_max() - 0.05 * g.extent());
    let inner: f64 = f
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| (lo..=hi).contains(&g.x(*i)))
        .map(|(i, v)| g.weight(i) * v.norm_sqr())
        .sum();
    if reference == 0.0 {
        0.0
    } else {
        (1.0 - inner / reference).max(0.0)
    }
}

/// `ψ(t)` at every time, with the requested norms.
pub fn evolve(ctx: &NormContext, f: &FunctionSample, times: &[f64], specs: &[NormSpec]) -> Result<EvolutionResult> {
    for t in times {
        check_phase_resolution(ctx.basis.kquad(), *t)?;
    }
    let c = ctx.basis.forward(f)?;
    let reference = ctx.basis.inverse(&c)?.l2_norm().powi(2);
    let rows = times
        .par_iter()
        .map(|&t| {
            let ct = evolve_coeffs(&c, t);
            let psi = ctx.basis.inverse(&ct)?;
            let leak = boundary_leakage(&psi, reference);
            if leak > LEAKAGE_LIMIT {
                return Err(Error::DomainTooSmall(format!(
                    "{:.2}% of the mass reaches the grid edge at t = {t}",
                    100.0 * leak
                )));
            }
            let norms = specs.iter().map(|s| ctx.norm_of_coeffs(&ct, s)).collect::<Result<Vec<_>>>()?;
            Ok((psi, norms))
        })
        .collect::<Result<Vec<_>>>()?;
    let norms = specs
        .iter()
        .enumerate()
        .map(|(m, s)| NormSeries {
            spec: *s,
            values: rows.iter().map(|r| r.1[m]).collect(),
        })
        .collect();
    Ok(EvolutionResult {
        times: times.to_vec(),
        states: rows.into_iter().map(|r| r.0).collect(),
        norms,
    })
}

/// `⟨t⟩ = (1 + t²)^{1/2}`.
pub fn japanese_bracket(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// `β = |1/2 - 1/p|`.
pub fn decay_exponent(p: f64) -> f64 {
    (0.5 - 1.0 / p).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayRow {
    pub t: f64,
    pub norm_out: f64,
    pub bound: f64,
    pub ratio: f64,
}

/// `r(t) = ‖ψ(t)‖_out / (⟨t⟩^β ‖f‖_in)` over the requested times.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub beta: f64,
    pub norm_in: f64,
    pub rows: Vec<DecayRow>,
    #[serde(skip)]
    pub evolution: Option<EvolutionResult>,
}

impl DecayReport {
    pub fn ratios(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.ratio).collect()
    }

    pub fn sup_ratio(&self) -> f64 {
        self.ratios().into_iter().fold(0.0, f64::max)
    }

    /// `max r / min r`.
    pub fn spread(&self) -> f64 {
        let r = self.ratios();
        let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
        self.sup_ratio() / lo
    }

    /// `sup_{t > t0} r(t) / sup_{t ≤ t0} r(t)`.
    pub fn late_over_early(&self, t0: f64) -> f64 {
        let (mut early, mut late) = (0.0f64, 0.0f64);
        for r in &self.rows {
            if r.t.abs() <= t0 {
                early = early.max(r.ratio);
            } else {
                late = late.max(r.ratio);
            }
        }
        late / early
    }

    /// Columns `t,norm_out,bound,ratio`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,norm_out,bound,ratio")?;
        for r in &self.rows {
            writeln!(w, "{},{:e},{:e},{:e}", r.t, r.norm_out, r.bound, r.ratio)?;
        }
        Ok(())
    }
}

/// Tabulates `‖e^{-itH} f‖_out` against `⟨t⟩^β ‖f‖_in`, where the input
/// smoothness exceeds the output smoothness by `2β`.
pub fn decay_experiment(
    ctx: &NormContext,
    f: &FunctionSample,
    out: &NormSpec,
    inp: &NormSpec,
    times: &[f64],
) -> Result<DecayReport> {
    if out.p != inp.p || out.q != inp.q || out.family != inp.family || out.homogeneous != inp.homogeneous {
        return Err(Error::InvalidParameter("input and output norms must share p, q and family".into()));
    }
    if out.family != Family::B {
        return Err(Error::InvalidParameter("the decay experiment runs on the Besov scale".into()));
    }
    let beta = decay_exponent(out.p);
    if (out.alpha + 2.0 * beta - inp.alpha).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "input smoothness must be {} for output smoothness {} at p = {}",
            out.alpha + 2.0 * beta,
            out.alpha,
            out.p
        )));
    }
    let norm_in = ctx.norm(f, inp)?;
    if norm_in == 0.0 {
        return Err(Error::Domain("input norm vanishes".into()));
    }
    let evolution = evolve(ctx, f, times, &[*out])?;
    let rows = times
        .iter()
        .zip(&evolution.norms[0].values)
        .map(|(&t, &n)| {
            let bound = japanese_bracket(t).powf(beta) * norm_in;
            DecayRow {
                t,
                norm_out: n,
                bound,
                ratio: n / bound,
            }
        })
        .collect();
    Ok(DecayReport {
        beta,
        norm_in,
        rows,
        evolution: Some(evolution),
    })
}
