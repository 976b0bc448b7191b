use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use pts_core::evolution::{decay_exponent, decay_experiment, evolution_quadrature, japanese_bracket};
use pts_core::littlewood_paley::{analysis_with, basis_for_bands, synthesis_with, DyadicSystem, Variant};
use pts_core::numerics::{FunctionSample, KQuadrature};
use pts_core::scattering::{
    bound_states, continuous_scattering, reflection, shooting_point_spectrum, transmission, Side,
    Strength,
};
use pts_core::spaces::{battery_with_bound_states, battery, Family, NormContext, NormSpec, TestFunction};
use pts_core::spectral::{build_band_kernel, decay_profile, MultiplierKernel, SpectralBasis};
use pts_core::verify::{run_criterion, CheckRecord, VerifyConfig};
use pts_core::{Error, Result};

use crate::config::RunConfig;

/// What a subcommand leaves behind: its checks and the files it wrote.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    pub artifacts: Vec<String>,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            written: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        body(&mut w)?;
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Io(e.to_string()))?;
            writeln!(w)?;
            Ok(())
        })
    }

    fn finish(mut self, command: &str, checks: Vec<CheckRecord>) -> Result<Report> {
        let name = format!("{command}_report.json");
        self.written.push(name.clone());
        let report = Report {
            command: command.to_string(),
            pass: checks.iter().all(|c| c.pass),
            checks,
            artifacts: self.written.clone(),
        };
        let mut w = BufWriter::new(File::create(self.dir.join(&name))?);
        serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(w)?;
        w.flush()?;
        Ok(report)
    }
}

fn selected_battery(cfg: &RunConfig) -> Result<Vec<TestFunction>> {
    let all = if cfg.bound_states && cfg.potential.level().is_some() {
        battery_with_bound_states(&cfg.grid, &cfg.potential)?
    } else {
        battery(&cfg.grid)
    };
    match &cfg.battery {
        None => Ok(all),
        Some(ids) => ids
            .iter()
            .map(|id| {
                all.iter()
                    .find(|t| &t.id == id)
                    .cloned()
                    .ok_or_else(|| Error::InvalidParameter(format!("no battery function {id:?}")))
            })
            .collect(),
    }
}

/// `T` and `R` over `k_values`; phases as well for non-integer strength.
pub fn scatter(cfg: &RunConfig) -> Result<Report> {
    let mut out = Outputs::new(&cfg.out_dir)?;
    let a = cfg.potential.scale();
    let mut checks = Vec::new();
    match cfg.potential.strength() {
        Strength::Level(n) => {
            let rows = cfg
                .k_values
                .iter()
                .map(|&k| Ok((k, transmission(n, k / a, Side::Plus)?, reflection(n, k / a, Side::Plus)?)))
                .collect::<Result<Vec<_>>>()?;
            out.write("scatter.csv", |w| {
                writeln!(w, "k,t_re,t_im,r_re,r_im,abs_t")?;
                for (k, t, r) in &rows {
                    writeln!(w, "{k},{:e},{:e},{:e},{:e},{:e}", t.re, t.im, r.re, r.im, t.norm())?;
                }
                Ok(())
            })?;
            let dev = rows.iter().map(|(_, t, _)| (t.norm() - 1.0).abs()).fold(0.0, f64::max);
            let refl = rows.iter().map(|(_, _, r)| r.norm()).fold(0.0, f64::max);
            checks.push(CheckRecord::at_most("scatter.abs_t_minus_one", "reflectionless", dev, 1e-12));
            checks.push(CheckRecord::at_most("scatter.abs_r", "reflectionless", refl, 0.0));
        }
        Strength::Lambda(lambda) => {
            let rows = cfg
                .k_values
                .iter()
                .map(|&k| Ok((k, continuous_scattering(lambda, a, k)?)))
                .collect::<Result<Vec<_>>>()?;
            out.write("scatter.csv", |w| {
                writeln!(w, "k,phi_e,phi_o,t_re,t_im,r_re,r_im,flux")?;
                for (k, s) in &rows {
                    writeln!(
                        w,
                        "{k},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                        s.phi_e, s.phi_o, s.t.re, s.t.im, s.r.re, s.r.im, s.flux()
                    )?;
                }
                Ok(())
            })?;
            let flux = rows.iter().map(|(_, s)| (s.flux() - 1.0).abs()).fold(0.0, f64::max);
            checks.push(CheckRecord::at_most("scatter.flux_defect", "continuous-strength", flux, 1e-10));
        }
    }
    out.finish("scatter", checks)
}

/// Closed-form bound states, their residuals and the shooting eigenvalues.
pub fn bound(cfg: &RunConfig) -> Result<Report> {
    let mut out = Outputs::new(&cfg.out_dir)?;
    let states = if cfg.potential.level().unwrap_or(0) == 0 {
        Vec::new()
    } else {
        bound_states(&cfg.potential, &cfg.grid)?
    };
    let mut shooting = shooting_point_spectrum(&cfg.potential)?;
    shooting.sort_by(|a, b| a.total_cmp(b));
    let mut exact = cfg.potential.eigenvalues();
    exact.sort_by(|a, b| a.total_cmp(b));
    let residuals: Vec<f64> = states.iter().map(|b| b.residual(&cfg.potential)).collect();
    out.write("bound.csv", |w| {
        writeln!(w, "index,eigenvalue,shooting,residual")?;
        for (m, e) in exact.iter().enumerate() {
            let index = states.iter().find(|b| b.eigenvalue == *e).map(|b| b.index.to_string()).unwrap_or_default();
            let res = states.iter().zip(&residuals).find(|(b, _)| b.eigenvalue == *e).map(|(_, r)| format!("{r:e}")).unwrap_or_default();
            let shot = shooting.get(m).map(|s| format!("{s:.15}")).unwrap_or_default();
            writeln!(w, "{index},{e:.15},{shot},{res}")?;
        }
        Ok(())
    })?;
    if !states.is_empty() {
        out.write("bound_states.csv", |w| {
            write!(w, "x")?;
            for b in &states {
                write!(w, ",e{}", b.index)?;
            }
            writeln!(w)?;
            for i in 0..cfg.grid.len() {
                write!(w, "{}", cfg.grid.x(i))?;
                for b in &states {
                    write!(w, ",{:e}", b.samples.values()[i].re)?;
                }
                writeln!(w)?;
            }
            Ok(())
        })?;
    }
    let shoot_err = if shooting.len() == exact.len() {
        shooting.iter().zip(&exact).map(|(s, e)| (s - e).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let mut checks = vec![CheckRecord::at_most("bound.shooting_error", "point-spectrum", shoot_err, 1e-6)];
    if !residuals.is_empty() {
        let worst = residuals.iter().cloned().fold(0.0, f64::max);
        checks.push(CheckRecord::at_most("bound.residual", "bound-states", worst, cfg.residual_tol));
    }
    out.finish("bound", checks)
}

fn cache_name(cfg: &RunConfig, j: i32) -> String {
    let g = cfg.kernel_grid();
    let strength = match cfg.potential.strength() {
        Strength::Level(n) => format!("n{n}"),
        Strength::Lambda(l) => format!("l{l}"),
    };
    format!(
        "kernel_{strength}_a{}_h{}_x{}_{}_{}_{}_j{j}_d{}.bin",
        cfg.potential.scale(),
        cfg.potential.shift(),
        g.x_min(),
        g.x_max(),
        g.len(),
        cfg.variant.name(),
        u8::from(cfg.derivative)
    )
}

/// Loads the band kernel from the cache or builds and stores it.
pub fn cached_kernel(cfg: &RunConfig, j: i32) -> Result<(MultiplierKernel, bool)> {
    let path = cfg.cache_dir.join(cache_name(cfg, j));
    if let Ok(f) = File::open(&path) {
        if let Ok(k) = MultiplierKernel::read_binary(std::io::BufReader::new(f)) {
            return Ok((k, true));
        }
    }
    let system = DyadicSystem::new(cfg.variant);
    let kernel = build_band_kernel(&system, j, &cfg.potential, &cfg.kernel_grid(), cfg.derivative)?;
    fs::create_dir_all(&cfg.cache_dir)?;
    // write then rename so a partial file never looks like a hit
    let tmp = path.with_extension("tmp");
    let mut w = BufWriter::new(File::create(&tmp)?);
    kernel.write_binary(&mut w)?;
    w.flush()?;
    drop(w);
    fs::rename(&tmp, &path)?;
    Ok((kernel, false))
}

/// Band kernel `K_j` as CSV plus its decay profile.
pub fn kernel(cfg: &RunConfig) -> Result<Report> {
    let mut out = Outputs::new(&cfg.out_dir)?;
    let j = cfg.band;
    let (kernel, hit) = cached_kernel(cfg, j)?;
    eprintln!("kernel j={j}: {}", if hit { "cache hit" } else { "built" });
    out.write(&format!("kernel_j{j}.csv"), |w| kernel.write_csv(w))?;
    let profile = decay_profile(&kernel, cfg.n_power);
    out.json(&format!("kernel_j{j}_profile.json"), &profile)?;
    let checks = vec![
        CheckRecord::finite(format!("kernel.c_measured.j{j}"), "kernel-decay", profile.c_measured),
        CheckRecord::at_most(format!("kernel.hermitian_defect.j{j}"), "kernel-decay", kernel.hermitian_defect(), 1e-10),
    ];
    let mut checks = checks;
    if let Some(d) = profile.d_measured {
        checks.push(CheckRecord::finite(format!("kernel.d_measured.j{j}"), "kernel-decay", d));
    }
    out.finish("kernel", checks)
}

fn level_required(cfg: &RunConfig) -> Result<()> {
    cfg.potential.require_level().map(|_| ())
}

/// Analysis then synthesis of every battery function.
pub fn bank(cfg: &RunConfig) -> Result<Report> {
    level_required(cfg)?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    let top = cfg.spec.top;
    let basis = basis_for_bands(&cfg.potential, &cfg.grid, top)?;
    let system = DyadicSystem::new(cfg.variant);
    let functions = selected_battery(cfg)?;
    let mut rows = Vec::new();
    for t in &functions {
        let bands = analysis_with(&basis, &system, &t.sample, top)?;
        let back = synthesis_with(&basis, &system, &bands)?;
        let err = back.relative_l2_error(&t.sample)?;
        let energy = bands.energy() / t.sample.l2_norm().powi(2);
        out.write(&format!("bank_{}.csv", t.id), |w| bands.write_csv(w))?;
        rows.push((t.id.clone(), err, energy));
    }
    out.write("bank.csv", |w| {
        writeln!(w, "function_id,relative_error,energy_ratio")?;
        for (id, e, r) in &rows {
            writeln!(w, "{id},{e:e},{r:e}")?;
        }
        Ok(())
    })?;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let energy = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    out.finish(
        "bank",
        vec![
            CheckRecord::at_most("bank.round_trip", "reproducing-formula", worst, cfg.round_trip_tol),
            CheckRecord::at_most("bank.energy_ratio", "qr-energy-bound", energy, 3.0),
        ],
    )
}

#[derive(Serialize)]
struct NormRatios {
    other_variant: f64,
    maximal_over_plain: f64,
}

#[derive(Serialize)]
struct NormRecord {
    spec: NormSpec,
    function_id: String,
    norm: f64,
    ratios: NormRatios,
}

/// The configured quasi-norm over the battery, with its value for the
/// other dyadic system and its Peetre-maximal version.
pub fn norm(cfg: &RunConfig) -> Result<Report> {
    level_required(cfg)?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    let basis = basis_for_bands(&cfg.potential, &cfg.grid, cfg.spec.top)?;
    let other = match cfg.variant {
        Variant::SqrtPartition => Variant::ShiftedSqrt,
        Variant::ShiftedSqrt => Variant::SqrtPartition,
    };
    let (sa, sb) = (DyadicSystem::new(cfg.variant), DyadicSystem::new(other));
    let (a, b) = (NormContext::new(&basis, &sa), NormContext::new(&basis, &sb));
    let plain = NormSpec { flavor: pts_core::spaces::Flavor::Plain, ..cfg.spec };
    let maximal = plain.peetre(cfg.spec.s);
    let mut records = Vec::new();
    for t in selected_battery(cfg)? {
        let n = a.norm(&t.sample, &cfg.spec)?;
        let nb = b.norm(&t.sample, &cfg.spec)?;
        let np = a.norm(&t.sample, &plain)?;
        let nm = a.norm(&t.sample, &maximal)?;
        records.push(NormRecord {
            spec: cfg.spec,
            function_id: t.id.clone(),
            norm: n,
            ratios: NormRatios {
                other_variant: n / nb,
                maximal_over_plain: nm / np,
            },
        });
    }
    out.json("norm.json", &records)?;
    out.write("norm.csv", |w| {
        writeln!(w, "function_id,norm,ratio_other_variant,ratio_maximal_over_plain")?;
        for r in &records {
            writeln!(w, "{},{:e},{:e},{:e}", r.function_id, r.norm, r.ratios.other_variant, r.ratios.maximal_over_plain)?;
        }
        Ok(())
    })?;
    let finite: Vec<f64> = records.iter().map(|r| r.ratios.other_variant).filter(|r| r.is_finite() && *r > 0.0).collect();
    let constant = if finite.len() == records.len() && !finite.is_empty() {
        finite.iter().map(|r| r.max(1.0 / r)).fold(1.0, f64::max)
    } else {
        f64::INFINITY
    };
    let min_max_ratio = records.iter().map(|r| r.ratios.maximal_over_plain).filter(|r| !r.is_nan()).fold(f64::INFINITY, f64::min);
    out.finish(
        "norm",
        vec![
            CheckRecord::at_most("norm.equivalence_constant", "window-independence", constant, cfg.equivalence_bound),
            // stored as plain/maximal, which domination keeps at or below one
            CheckRecord::at_most("norm.plain_over_maximal", "peetre-domination", 1.0 / min_max_ratio, 1.0 + 1e-12),
        ],
    )
}

/// Decay curve of a Gaussian of width `sigma` in the Besov scale of the
/// configured `p`, `q` and `alpha`.
pub fn evolve(cfg: &RunConfig) -> Result<Report> {
    level_required(cfg)?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    let top = cfg.spec.top.min(3);
    let t_max = cfg.times.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    let kquad: KQuadrature = evolution_quadrature(&cfg.grid, (top as f64 / 2.0).exp2(), t_max)?;
    let basis = SpectralBasis::new(&cfg.potential, &cfg.grid, &kquad)?;
    let system = DyadicSystem::new(cfg.variant);
    let ctx = NormContext::new(&basis, &system);
    let sigma = cfg.sigma;
    let center = cfg.potential.shift();
    let f = FunctionSample::from_real_fn(cfg.grid, |x| (-(x - center).powi(2) / (2.0 * sigma * sigma)).exp());
    let beta = decay_exponent(cfg.spec.p);
    let spec_out = NormSpec {
        family: Family::B,
        top,
        flavor: pts_core::spaces::Flavor::Plain,
        ..cfg.spec
    };
    let spec_in = spec_out.with_alpha(spec_out.alpha + 2.0 * beta);
    let report = decay_experiment(&ctx, &f, &spec_out, &spec_in, &cfg.times)?;
    out.write("evolve.csv", |w| report.write_csv(w))?;
    let evolution = report.evolution.as_ref().expect("experiment keeps its states");
    out.write("evolve_l2.csv", |w| {
        writeln!(w, "t,l2_norm,bracket")?;
        for (t, n) in evolution.times.iter().zip(evolution.l2_norms()) {
            writeln!(w, "{t},{n:e},{:e}", japanese_bracket(*t))?;
        }
        Ok(())
    })?;
    let mut checks = vec![
        CheckRecord::at_most("evolve.unitarity", "unitary-propagator", evolution.unitarity_defect(), cfg.unitarity_tol),
        CheckRecord::finite("evolve.sup_ratio", "besov-time-decay", report.sup_ratio()),
    ];
    if beta == 0.0 {
        checks.push(CheckRecord::at_most("evolve.ratio_variation", "besov-time-decay", report.spread() - 1.0, 1e-3));
    } else if cfg.times.iter().any(|t| t.abs() > 5.0) && cfg.times.iter().any(|t| t.abs() <= 5.0) {
        checks.push(CheckRecord::at_most("evolve.late_over_early", "besov-time-decay", report.late_over_early(5.0), 1.5));
    }
    out.finish("evolve", checks)
}

#[derive(Serialize)]
struct VerifyDocument<'a> {
    pass: bool,
    checks: &'a [CheckRecord],
}

/// The acceptance criteria plus `|T(1)|` for the configured level.
pub fn verify(cfg: &RunConfig) -> Result<Report> {
    let mut out = Outputs::new(&cfg.out_dir)?;
    let vcfg = VerifyConfig {
        grid: cfg.grid,
        top: cfg.spec.top,
        k_max: cfg.k_max,
        peetre_s: cfg.spec.s,
        equivalence_bound: cfg.equivalence_bound,
        variant: cfg.variant,
        ..VerifyConfig::default()
    };
    let mut checks = Vec::new();
    if let Some(n) = cfg.potential.level() {
        let t = transmission(n, 1.0, Side::Plus)?;
        checks.push(CheckRecord::at_most(format!("verify.abs_t_at_1.n{n}"), "reflectionless", (t.norm() - 1.0).abs(), 1e-12));
    }
    for &id in &cfg.criteria {
        let report = run_criterion(id, &vcfg)?;
        eprintln!("{}", report.summary_line());
        checks.extend(report.checks);
    }
    let doc = VerifyDocument {
        pass: checks.iter().all(|c| c.pass),
        checks: &checks,
    };
    out.json("verify.json", &doc)?;
    out.finish("verify", checks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn cfg(pairs: &[(&str, &str)]) -> RunConfig {
        let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        RunConfig::from_map(&map).unwrap()
    }

    #[test]
    fn cache_names_separate_every_key_field() {
        let base = cache_name(&cfg(&[]), 4);
        for (k, v) in [("n", "2"), ("scale", "2"), ("shift", "1"), ("kernel_points", "401"), ("x_max", "30"), ("variant", "shifted-sqrt"), ("derivative", "false")] {
            assert_ne!(cache_name(&cfg(&[(k, v)]), 4), base, "{k}");
        }
        assert_ne!(cache_name(&cfg(&[]), 3), base);
        assert_eq!(cache_name(&cfg(&[("band", "1")]), 4), base);
    }

    #[test]
    fn battery_selection_keeps_order_and_rejects_unknown_ids() {
        let all = selected_battery(&cfg(&[])).unwrap();
        assert_eq!(all.last().unwrap().id, "bound-1");
        assert!(selected_battery(&cfg(&[("bound_states", "false")])).unwrap().iter().all(|t| !t.id.starts_with("bound")));
        let some = selected_battery(&cfg(&[("battery", "chirp,band-2")])).unwrap();
        assert_eq!(some.iter().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["chirp", "band-2"]);
        assert!(matches!(selected_battery(&cfg(&[("battery", "missing")])), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn report_lists_its_own_file() {
        let dir = std::env::temp_dir().join(format!("pts-report-{}", std::process::id()));
        let mut out = Outputs::new(&dir).unwrap();
        out.write("a.csv", |w| Ok(writeln!(w, "x")?)).unwrap();
        let r = out
            .finish("demo", vec![CheckRecord::at_most("demo.x", "none", 2.0, 1.0)])
            .unwrap();
        assert!(!r.pass);
        assert_eq!(r.artifacts, ["a.csv", "demo_report.json"]);
        assert!(dir.join("demo_report.json").exists());
        fs::remove_dir_all(dir).unwrap();
    }
}
