use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt::{self, Write as _};
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    NcScan,
    Validate,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Fig1,
        Experiment::Fig2,
        Experiment::Fig3,
        Experiment::Fig4,
        Experiment::Fig5,
        Experiment::NcScan,
        Experiment::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1 => "fig1",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::NcScan => "nc-scan",
            Experiment::Validate => "validate",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment `{s}`")))
    }
}

/// Parameter grid used by the validation harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GridPreset {
    /// Full cross-validation grid.
    Default,
    /// Near-zero coupling, where every route must return the free evolution.
    Smoke,
}

impl GridPreset {
    pub fn name(self) -> &'static str {
        match self {
            GridPreset::Default => "default",
            GridPreset::Smoke => "smoke",
        }
    }
}

impl FromStr for GridPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "default" => Ok(GridPreset::Default),
            "smoke" => Ok(GridPreset::Smoke),
            other => Err(Error::Config(format!("unknown grid preset `{other}`"))),
        }
    }
}

/// QFI route written by the time sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum QfiMethod {
    Analytic,
    Spectral,
}

impl QfiMethod {
    pub fn tag(self) -> &'static str {
        match self {
            QfiMethod::Analytic => "analytic",
            QfiMethod::Spectral => "spectral",
        }
    }
}

impl FromStr for QfiMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "analytic" => Ok(QfiMethod::Analytic),
            "spectral" => Ok(QfiMethod::Spectral),
            other => Err(Error::Config(format!("unknown QFI method `{other}`"))),
        }
    }
}

/// Fully resolved description of one run.
///
/// Start from [`ExperimentConfig::defaults`] and layer `key = value` settings
/// on top with [`ExperimentConfig::set`]. Keys are case-insensitive and `-`
/// and `_` are interchangeable.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Coupling strengths `γ₀/λ`; sweeps run over every entry.
    pub gamma0: Vec<f64>,
    pub omega0: f64,
    pub n_list: Vec<usize>,
    pub theta_list: Vec<f64>,
    pub t_max: f64,
    pub n_samples: usize,
    pub methods: Vec<QfiMethod>,
    /// Kernel ODE step.
    pub solver_dt: f64,
    /// Simpson panels for the closed-form GP.
    pub k_steps: usize,
    /// Samples of the Pancharatnam product.
    pub gp_steps: usize,
    pub bath_modes: usize,
    pub bath_half_width: f64,
    pub bath_dt: f64,
    pub bath_t_max: f64,
    pub n_max: usize,
    pub grid: GridPreset,
    pub out: Option<PathBuf>,
}

/// Keys accepted by [`ExperimentConfig::set`], in the order they are reported.
pub const KEYS: [&str; 18] = [
    "experiment",
    "gamma0",
    "omega0",
    "n_list",
    "theta_list",
    "t_max",
    "n_samples",
    "methods",
    "solver_dt",
    "k_steps",
    "gp_steps",
    "bath_modes",
    "bath_half_width",
    "bath_dt",
    "bath_t_max",
    "n_max",
    "grid",
    "out",
];

pub fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn theta_grid(points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|i| TAU * i as f64 / last).collect()
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        let mut cfg = ExperimentConfig {
            experiment,
            gamma0: vec![0.05],
            omega0: 5.0,
            n_list: vec![1, 2, 4, 8],
            theta_list: vec![FRAC_PI_4],
            t_max: 30.0,
            n_samples: 301,
            methods: vec![QfiMethod::Analytic],
            solver_dt: crate::kernel::DEFAULT_DT,
            k_steps: 800,
            gp_steps: 4000,
            bath_modes: crate::bath::DEFAULT_MODES,
            bath_half_width: crate::bath::DEFAULT_HALF_WIDTH,
            bath_dt: crate::bath::DEFAULT_DT,
            bath_t_max: 10.0,
            n_max: 20,
            grid: GridPreset::Default,
            out: None,
        };
        match experiment {
            Experiment::Fig1 | Experiment::Validate => {}
            Experiment::Fig2 => {
                cfg.gamma0 = vec![10.0];
                cfg.t_max = 3.0;
            }
            Experiment::Fig3 => {
                cfg.n_list = (8..=14).collect();
                cfg.t_max = 50.0;
                cfg.n_samples = 501;
            }
            Experiment::Fig4 => {
                cfg.gamma0 = vec![0.05, 10.0];
                cfg.n_list = (0..=10).map(|k| 1 << k).collect();
            }
            Experiment::Fig5 => {
                cfg.gamma0 = vec![0.05, 10.0];
                cfg.n_list = vec![2];
                cfg.theta_list = theta_grid(65);
            }
            Experiment::NcScan => {
                cfg.t_max = 50.0;
                cfg.n_samples = 5001;
            }
        }
        cfg
    }

    /// Builds a config from `key = value` pairs. The `experiment` key, if
    /// present, selects the defaults; `fallback` is used otherwise.
    pub fn from_pairs<'a, I>(fallback: Experiment, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let pairs: Vec<(String, &str)> = pairs
            .into_iter()
            .map(|(k, v)| (normalize_key(k), v))
            .collect();
        let experiment = match pairs.iter().rev().find(|(k, _)| k == "experiment") {
            Some((_, v)) => v.parse()?,
            None => fallback,
        };
        let mut cfg = Self::defaults(experiment);
        for (k, v) in pairs.iter().filter(|(k, _)| k != "experiment") {
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Overrides one key. The experiment itself is fixed at construction, so
    /// `experiment` is only accepted when it names the current one.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = normalize_key(key);
        let value = value.trim();
        match key.as_str() {
            "experiment" => {
                let e: Experiment = value.parse()?;
                if e != self.experiment {
                    return Err(Error::Config(format!(
                        "experiment `{e}` conflicts with `{}`",
                        self.experiment
                    )));
                }
            }
            "gamma0" => self.gamma0 = parse_list(&key, value)?,
            "omega0" => self.omega0 = parse_one(&key, value)?,
            "n_list" => self.n_list = parse_list(&key, value)?,
            "theta_list" => self.theta_list = parse_list(&key, value)?,
            "t_max" => self.t_max = parse_one(&key, value)?,
            "n_samples" => self.n_samples = parse_one(&key, value)?,
            "methods" => self.methods = parse_list(&key, value)?,
            "solver_dt" => self.solver_dt = parse_one(&key, value)?,
            "k_steps" => self.k_steps = parse_one(&key, value)?,
            "gp_steps" => self.gp_steps = parse_one(&key, value)?,
            "bath_modes" => self.bath_modes = parse_one(&key, value)?,
            "bath_half_width" => self.bath_half_width = parse_one(&key, value)?,
            "bath_dt" => self.bath_dt = parse_one(&key, value)?,
            "bath_t_max" => self.bath_t_max = parse_one(&key, value)?,
            "n_max" => self.n_max = parse_one(&key, value)?,
            "grid" => self.grid = value.parse()?,
            "out" => self.out = (!value.is_empty()).then(|| PathBuf::from(value)),
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.gamma0.is_empty()
            || self.n_list.is_empty()
            || self.theta_list.is_empty()
            || self.methods.is_empty()
        {
            return fail("gamma0, n_list, theta_list and methods must be nonempty".into());
        }
        if let Some(g) = self.gamma0.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return fail(format!("gamma0 must be finite and >= 0, got {g}"));
        }
        if self.n_list.contains(&0) {
            return fail("n_list entries must be >= 1".into());
        }
        if let Some(t) = self.theta_list.iter().find(|t| !(0.0..=TAU).contains(*t)) {
            return fail(format!("theta_list entries must lie in [0, 2π], got {t}"));
        }
        for (name, v) in [
            ("omega0", self.omega0),
            ("t_max", self.t_max),
            ("solver_dt", self.solver_dt),
            ("bath_half_width", self.bath_half_width),
            ("bath_dt", self.bath_dt),
            ("bath_t_max", self.bath_t_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        if self.n_samples < 2 {
            return fail(format!("n_samples must be >= 2, got {}", self.n_samples));
        }
        if self.n_max == 0 {
            return fail("n_max must be >= 1".into());
        }
        if self.bath_modes == 0 || self.k_steps == 0 {
            return fail("bath_modes and k_steps must be >= 1".into());
        }
        if self.gp_steps < crate::gp::MIN_STEPS {
            return fail(format!("gp_steps must be >= {}", crate::gp::MIN_STEPS));
        }
        Ok(())
    }

    /// All keys with their resolved values, in [`KEYS`] order.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let join = |v: Vec<String>| v.join(",");
        let values = [
            self.experiment.to_string(),
            join(self.gamma0.iter().map(|x| x.to_string()).collect()),
            self.omega0.to_string(),
            join(self.n_list.iter().map(|x| x.to_string()).collect()),
            join(self.theta_list.iter().map(|x| x.to_string()).collect()),
            self.t_max.to_string(),
            self.n_samples.to_string(),
            join(self.methods.iter().map(|m| m.tag().to_string()).collect()),
            self.solver_dt.to_string(),
            self.k_steps.to_string(),
            self.gp_steps.to_string(),
            self.bath_modes.to_string(),
            self.bath_half_width.to_string(),
            self.bath_dt.to_string(),
            self.bath_t_max.to_string(),
            self.n_max.to_string(),
            self.grid.name().to_string(),
            self.out
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        ];
        KEYS.into_iter().zip(values).collect()
    }

    /// Single-line `key=value` rendering used in CSV headers. The output path
    /// is left out so that the same run written to two files is byte-identical.
    pub fn comment_line(&self) -> String {
        let mut line = String::from("# config:");
        for (k, v) in self.resolved() {
            if k != "out" {
                let _ = write!(line, " {k}={v}");
            }
        }
        line
    }
}

/// Parses a flat `key = value` file. Blank lines and lines starting with `#`
/// are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "line {}: expected `key = value`, got `{line}`",
                i + 1
            ))
        })?;
        let k = normalize_key(k);
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{value}` for key `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_one(key, s))
        .collect()
}
