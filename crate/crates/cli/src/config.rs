use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use pts_core::littlewood_paley::Variant;
use pts_core::numerics::Grid;
use pts_core::scattering::Potential;
use pts_core::spaces::{Family, Flavor, NormSpec};

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "PTS_OUT_DIR";

/// Every recognised key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("n", "1", "integer level of the well, λ = n + 1"),
    ("lambda", "", "non-integer strength λ > 1 (scatter only); overrides n"),
    ("scale", "1", "potential scale a"),
    ("shift", "0", "potential center h"),
    ("x_min", "-40", "left end of the grid"),
    ("x_max", "40", "right end of the grid"),
    ("points", "4001", "number of grid points"),
    ("kernel_points", "801", "grid points for dense kernel matrices"),
    ("k_max", "8", "largest |k| of the transform nodes"),
    ("variant", "sqrt-partition", "dyadic system: sqrt-partition or shifted-sqrt"),
    ("top", "6", "highest band J"),
    ("family", "F", "F (Triebel–Lizorkin) or B (Besov)"),
    ("alpha", "0", "smoothness index"),
    ("p", "2", "outer exponent, inf allowed"),
    ("q", "2", "band-sum exponent, inf allowed"),
    ("s", "3", "Peetre exponent"),
    ("flavor", "plain", "plain or peetre"),
    ("homogeneous", "false", "sum bands over -J..J"),
    ("band", "4", "band index for kernel"),
    ("n_power", "2", "decay power for kernel profiles"),
    ("derivative", "true", "also build the x-derivative kernel"),
    ("k_values", "0.25,0.5,1,2,4", "wavenumbers for scatter"),
    ("times", "0,1,2,3,4,5", "times for evolve"),
    ("sigma", "4", "width of the Gaussian evolved by evolve"),
    ("battery", "all", "all, or a comma list of battery ids"),
    ("bound_states", "true", "append the bound states to the battery"),
    ("criteria", "all", "all, or a comma list of criterion numbers for verify"),
    ("out_dir", "pts-out", "output directory"),
    ("cache_dir", "", "kernel cache directory, default <out_dir>/cache"),
    ("round_trip_tol", "1e-4", "relative L² tolerance for round trips"),
    ("residual_tol", "1e-8", "bound-state residual tolerance"),
    ("unitarity_tol", "1e-6", "relative L² drift allowed under evolve"),
    ("equivalence_bound", "50", "bound on equivalence constants"),
    ("workers", "0", "worker threads, 0 for all cores"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _, _)| *k == key)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return err(format!("line {}: expected key = value, got {raw:?}", no + 1));
        };
        let (k, v) = (k.trim(), v.trim());
        if !known(k) {
            return err(format!("line {}: unknown key {k:?}", no + 1));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("line {}: duplicate key {k:?}", no + 1));
        }
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub potential: Potential,
    pub level: u32,
    pub lambda: Option<f64>,
    pub grid: Grid,
    pub kernel_points: usize,
    pub k_max: f64,
    pub variant: Variant,
    pub spec: NormSpec,
    pub band: i32,
    pub n_power: u32,
    pub derivative: bool,
    pub k_values: Vec<f64>,
    pub times: Vec<f64>,
    pub sigma: f64,
    pub battery: Option<Vec<String>>,
    pub bound_states: bool,
    pub criteria: Vec<u32>,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub round_trip_tol: f64,
    pub residual_tol: f64,
    pub unitarity_tol: f64,
    pub equivalence_bound: f64,
    pub workers: usize,
}

struct Values<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Values<'_> {
    fn raw(&self, key: &str) -> &str {
        debug_assert!(known(key), "{key}");
        match self.map.get(key) {
            Some(v) => v,
            None => KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, d, _)| *d).unwrap_or(""),
        }
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.raw(key);
        v.parse().or_else(|_| err(format!("{key}: cannot parse {v:?}")))
    }

    fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.raw(key);
        let x = match v {
            "inf" | "infinity" => f64::INFINITY,
            _ => v.parse().or_else(|_| err(format!("{key}: cannot parse {v:?} as a number")))?,
        };
        if x.is_nan() {
            return err(format!("{key}: NaN is not allowed"));
        }
        Ok(x)
    }

    fn positive(&self, key: &str) -> Result<f64, ConfigError> {
        let x = self.real(key)?;
        if !(x > 0.0) {
            return err(format!("{key} must be positive, got {x}"));
        }
        Ok(x)
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => err(format!("{key}: expected true or false, got {v:?}")),
        }
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let out = self
            .raw(key)
            .split(',')
            .map(|s| s.trim().parse::<f64>().or_else(|_| err(format!("{key}: bad entry {s:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if out.is_empty() || out.iter().any(|x| !x.is_finite()) {
            return err(format!("{key}: need a list of finite numbers"));
        }
        Ok(out)
    }
}

impl RunConfig {
    /// Builds the configuration from file entries overlaid by flag entries;
    /// `env_out_dir` sits between the two for `out_dir`.
    pub fn resolve(
        file: &BTreeMap<String, String>,
        flags: &BTreeMap<String, String>,
        env_out_dir: Option<String>,
    ) -> Result<Self, ConfigError> {
        let mut map = file.clone();
        if let Some(dir) = env_out_dir.filter(|d| !d.is_empty()) {
            map.insert("out_dir".into(), dir);
        }
        for (k, v) in flags {
            if !known(k) {
                return err(format!("unknown key {k:?}"));
            }
            map.insert(k.clone(), v.clone());
        }
        Self::from_map(&map)
    }

    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(k) = map.keys().find(|k| !known(k)) {
            return err(format!("unknown key {k:?}"));
        }
        let v = Values { map };
        let level: u32 = v.parse("n")?;
        let lambda = match v.raw("lambda") {
            "" => None,
            _ => Some(v.real("lambda")?),
        };
        let scale = v.positive("scale")?;
        let shift = v.real("shift")?;
        let base = match lambda {
            Some(l) => Potential::continuous(l).map_err(|e| ConfigError(e.to_string()))?,
            None => Potential::integer(level),
        };
        let potential = base
            .with_scale(scale)
            .map_err(|e| ConfigError(e.to_string()))?
            .with_shift(shift);
        let grid = Grid::new(v.real("x_min")?, v.real("x_max")?, v.parse("points")?)
            .map_err(|e| ConfigError(format!("grid: {e}")))?;
        let kernel_points: usize = v.parse("kernel_points")?;
        if kernel_points < 3 {
            return err("kernel_points must be at least 3");
        }
        let variant: Variant = v.raw("variant").parse().map_err(|e: pts_core::Error| ConfigError(e.to_string()))?;
        let family = match v.raw("family") {
            "F" | "f" => Family::F,
            "B" | "b" => Family::B,
            other => return err(format!("family must be F or B, got {other:?}")),
        };
        let flavor = match v.raw("flavor") {
            "plain" => Flavor::Plain,
            "peetre" => Flavor::Peetre,
            other => return err(format!("flavor must be plain or peetre, got {other:?}")),
        };
        let spec = NormSpec {
            family,
            alpha: v.real("alpha")?,
            p: v.positive("p")?,
            q: v.positive("q")?,
            homogeneous: v.flag("homogeneous")?,
            top: v.parse("top")?,
            s: v.positive("s")?,
            flavor,
        };
        spec.validate().map_err(|e| ConfigError(e.to_string()))?;
        let max_band = pts_core::spectral::max_band(&grid);
        if spec.top > max_band {
            return err(format!("top = {} exceeds the grid's Nyquist band {max_band}", spec.top));
        }
        let battery = match v.raw("battery") {
            "all" => None,
            ids => Some(ids.split(',').map(|s| s.trim().to_string()).collect()),
        };
        let criteria = match v.raw("criteria") {
            "all" => (1..=13).collect(),
            list => list
                .split(',')
                .map(|s| match s.trim().parse::<u32>() {
                    Ok(c) if (1..=13).contains(&c) => Ok(c),
                    _ => err(format!("criteria: bad entry {s:?}")),
                })
                .collect::<Result<Vec<_>, _>>()?,
        };
        let out_dir = PathBuf::from(v.raw("out_dir"));
        let cache_dir = match v.raw("cache_dir") {
            "" => out_dir.join("cache"),
            d => PathBuf::from(d),
        };
        let times = v.list("times")?;
        let k_values = v.list("k_values")?;
        if k_values.iter().any(|k| *k == 0.0) {
            return err("k_values must be nonzero");
        }
        Ok(Self {
            potential,
            level,
            lambda,
            grid,
            kernel_points,
            k_max: v.positive("k_max")?,
            variant,
            spec,
            band: v.parse("band")?,
            n_power: v.parse("n_power")?,
            derivative: v.flag("derivative")?,
            k_values,
            times,
            sigma: v.positive("sigma")?,
            battery,
            bound_states: v.flag("bound_states")?,
            criteria,
            out_dir,
            cache_dir,
            round_trip_tol: v.positive("round_trip_tol")?,
            residual_tol: v.positive("residual_tol")?,
            unitarity_tol: v.positive("unitarity_tol")?,
            equivalence_bound: v.positive("equivalence_bound")?,
            workers: v.parse("workers")?,
        })
    }

    /// Grid for dense kernel matrices: the run grid's interval with
    /// `kernel_points` samples.
    pub fn kernel_grid(&self) -> Grid {
        Grid::new(self.grid.x_min(), self.grid.x_max(), self.kernel_points).expect("checked at resolve")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::from_map(&BTreeMap::new()).unwrap();
        assert_eq!(c.grid, Grid::desk());
        assert_eq!(c.level, 1);
        assert_eq!(c.spec, NormSpec::tl(0.0, 2.0, 2.0));
        assert_eq!(c.criteria.len(), 13);
        assert_eq!(c.cache_dir, PathBuf::from("pts-out/cache"));
        assert_eq!(c.kernel_grid().len(), 801);
    }

    #[test]
    fn file_parsing() {
        let m = parse_config_text("# comment\nn = 2\n\n top=4 # trailing\n").unwrap();
        assert_eq!(m, map(&[("n", "2"), ("top", "4")]));
        assert!(parse_config_text("bogus = 1").is_err());
        assert!(parse_config_text("n 2").is_err());
        assert!(parse_config_text("n = 1\nn = 2").is_err());
    }

    #[test]
    fn flags_override_env_override_file() {
        let file = map(&[("n", "2"), ("out_dir", "a")]);
        let c = RunConfig::resolve(&file, &BTreeMap::new(), Some("b".into())).unwrap();
        assert_eq!((c.level, c.out_dir.clone()), (2, PathBuf::from("b")));
        let c = RunConfig::resolve(&file, &map(&[("n", "0"), ("out_dir", "c")]), Some("b".into())).unwrap();
        assert_eq!((c.level, c.out_dir), (0, PathBuf::from("c")));
    }

    #[test]
    fn bad_values_are_rejected() {
        for (k, v) in [
            ("p", "0"),
            ("p", "x"),
            ("variant", "haar"),
            ("family", "Q"),
            ("top", "40"),
            ("points", "1"),
            ("homogeneous", "maybe"),
            ("criteria", "0,14"),
            ("k_values", "0,1"),
            ("times", ""),
            ("lambda", "0.5"),
            ("round_trip_tol", "-1"),
        ] {
            assert!(RunConfig::from_map(&map(&[(k, v)])).is_err(), "{k} = {v}");
        }
        assert!(RunConfig::from_map(&map(&[("flavor", "peetre"), ("p", "0.5"), ("s", "1")])).is_err());
        assert!(RunConfig::from_map(&map(&[("unknown", "1")])).is_err());
    }

    #[test]
    fn extended_exponents() {
        let c = RunConfig::from_map(&map(&[("p", "inf"), ("q", "inf"), ("family", "B")])).unwrap();
        assert!(c.spec.p.is_infinite() && c.spec.q.is_infinite());
    }
}
