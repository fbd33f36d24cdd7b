use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sweep::SweepSpec;
use crate::dynamics::{IntegratorConfig, Method, TimeGrid};
use crate::error::{Error, Result};
use crate::hilbert::HilbertSpace;
use crate::model::{Model, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Schrodinger,
    Lindblad,
    Mcwf,
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "schrodinger" => Ok(Solver::Schrodinger),
            "lindblad" => Ok(Solver::Lindblad),
            "mcwf" => Ok(Solver::Mcwf),
            other => Err(Error::InvalidConfig(format!(
                "unknown solver `{other}` (expected schrodinger, lindblad or mcwf)"
            ))),
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Solver::Schrodinger => "schrodinger",
            Solver::Lindblad => "lindblad",
            Solver::Mcwf => "mcwf",
        })
    }
}

/// Every accepted configuration key.
pub const KEYS: [&str; 25] = [
    "omega0",
    "g0",
    "g10",
    "g20",
    "tau_p",
    "tau_c",
    "delta_t",
    "detuning",
    "kappa",
    "kappa_ratio",
    "n_max",
    "t_start",
    "t_end",
    "n_steps",
    "output_stride",
    "method",
    "abs_tol",
    "rel_tol",
    "renormalize",
    "restrict_to_reachable",
    "solver",
    "n_trajectories",
    "master_seed",
    "sweep_ratios",
    "out",
];

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub params: PhysicalParams,
    /// When set, κ = ratio · g₀ and `params.kappa` is ignored.
    pub kappa_ratio: Option<f64>,
    pub n_max: usize,
    pub grid: TimeGrid,
    pub integrator: IntegratorConfig,
    pub solver: Solver,
    pub n_trajectories: usize,
    pub master_seed: u64,
    pub sweep_ratios: Vec<f64>,
    pub out: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            kappa_ratio: None,
            n_max: 2,
            grid: TimeGrid::default(),
            integrator: IntegratorConfig::default(),
            solver: Solver::Schrodinger,
            n_trajectories: 2000,
            master_seed: 0,
            sweep_ratios: SweepSpec::default_ratios(),
            out: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("cannot parse `{value}` for key `{key}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("cannot parse `{value}` as a boolean for key `{key}`"))),
    }
}

impl ScenarioConfig {
    /// Parses a flat `key = value` file. `#` starts a comment; blank lines
    /// are ignored; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("line {}: expected key = value, got `{line}`", lineno + 1)))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(Error::InvalidConfig(format!("line {}: unknown key `{key}`", lineno + 1)));
            }
            if entries.insert(key, value.trim()).is_some() {
                return Err(Error::InvalidConfig(format!("line {}: key `{key}` given twice", lineno + 1)));
            }
        }
        if entries.contains_key("kappa") && entries.contains_key("kappa_ratio") {
            return Err(Error::InvalidConfig("give either kappa or kappa_ratio, not both".into()));
        }
        if entries.contains_key("g0") && (entries.contains_key("g10") || entries.contains_key("g20")) {
            return Err(Error::InvalidConfig("g0 cannot be combined with g10 or g20".into()));
        }

        let mut config = Self::default();
        for (key, value) in entries {
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Applies one override. Setting `kappa` clears a previous
    /// `kappa_ratio` and vice versa.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let p = &mut self.params;
        match key {
            "omega0" => p.omega0 = parse_num(key, value)?,
            "g0" => {
                p.g10 = parse_num(key, value)?;
                p.g20 = p.g10;
            }
            "g10" => p.g10 = parse_num(key, value)?,
            "g20" => p.g20 = parse_num(key, value)?,
            "tau_p" => p.tau_p = parse_num(key, value)?,
            "tau_c" => p.tau_c = parse_num(key, value)?,
            "delta_t" => p.delta_t = parse_num(key, value)?,
            "detuning" => p.detuning = parse_num(key, value)?,
            "kappa" => {
                p.kappa = parse_num(key, value)?;
                self.kappa_ratio = None;
            }
            "kappa_ratio" => self.kappa_ratio = Some(parse_num(key, value)?),
            "n_max" => self.n_max = parse_num(key, value)?,
            "t_start" => self.grid.t_start = parse_num(key, value)?,
            "t_end" => self.grid.t_end = parse_num(key, value)?,
            "n_steps" => self.grid.n_steps = parse_num(key, value)?,
            "output_stride" => self.grid.output_stride = parse_num(key, value)?,
            "method" => self.integrator.method = value.parse::<Method>()?,
            "abs_tol" => self.integrator.abs_tol = parse_num(key, value)?,
            "rel_tol" => self.integrator.rel_tol = parse_num(key, value)?,
            "renormalize" => self.integrator.renormalize_each_step = parse_bool(key, value)?,
            "restrict_to_reachable" => self.integrator.restrict_to_reachable = parse_bool(key, value)?,
            "solver" => self.solver = value.parse()?,
            "n_trajectories" => self.n_trajectories = parse_num(key, value)?,
            "master_seed" => self.master_seed = parse_num(key, value)?,
            "sweep_ratios" => {
                self.sweep_ratios = value
                    .split(',')
                    .map(|v| parse_num::<f64>(key, v))
                    .collect::<Result<_>>()?
            }
            "out" => self.out = Some(PathBuf::from(value.trim())),
            other => return Err(Error::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Parameters with κ resolved from `kappa_ratio` when present.
    pub fn physical_params(&self) -> PhysicalParams {
        let mut p = self.params;
        if let Some(r) = self.kappa_ratio {
            p.kappa = r * p.g0();
        }
        p
    }

    pub fn kappa_over_g0(&self) -> f64 {
        let p = self.physical_params();
        if p.g0() > 0.0 {
            p.kappa / p.g0()
        } else {
            0.0
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            ratios: self.sweep_ratios.clone(),
            trajectories_per_point: self.n_trajectories,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.kappa_ratio {
            if !(r.is_finite() && r >= 0.0) {
                return Err(Error::InvalidConfig(format!("kappa_ratio must be finite and >= 0, got {r}")));
            }
        }
        self.physical_params().validate()?;
        if self.n_max < 1 {
            return Err(Error::InvalidCutoff(self.n_max));
        }
        self.grid.validate()?;
        self.integrator.validate()?;
        if self.n_trajectories < 1 {
            return Err(Error::InvalidConfig("n_trajectories must be >= 1".into()));
        }
        self.sweep_spec().validate()
    }

    pub fn model(&self) -> Result<Model> {
        self.validate()?;
        Model::new(HilbertSpace::new(self.n_max)?, self.physical_params())
    }

    /// Canonical `key = value` listing that parses back to an equivalent
    /// configuration. κ is written resolved; `out` is omitted.
    pub fn to_text(&self) -> String {
        let p = self.physical_params();
        let ratios: Vec<String> = self.sweep_ratios.iter().map(|r| format!("{r:?}")).collect();
        let lines = [
            ("omega0", p.omega0.to_string()),
            ("g10", p.g10.to_string()),
            ("g20", p.g20.to_string()),
            ("tau_p", format!("{:?}", p.tau_p)),
            ("tau_c", format!("{:?}", p.tau_c)),
            ("delta_t", format!("{:?}", p.delta_t)),
            ("detuning", format!("{:?}", p.detuning)),
            ("kappa", format!("{:?}", p.kappa)),
            ("n_max", self.n_max.to_string()),
            ("t_start", format!("{:?}", self.grid.t_start)),
            ("t_end", format!("{:?}", self.grid.t_end)),
            ("n_steps", self.grid.n_steps.to_string()),
            ("output_stride", self.grid.output_stride.to_string()),
            ("method", self.integrator.method.to_string()),
            ("abs_tol", format!("{:?}", self.integrator.abs_tol)),
            ("rel_tol", format!("{:?}", self.integrator.rel_tol)),
            ("renormalize", self.integrator.renormalize_each_step.to_string()),
            ("restrict_to_reachable", self.integrator.restrict_to_reachable.to_string()),
            ("solver", self.solver.to_string()),
            ("n_trajectories", self.n_trajectories.to_string()),
            ("master_seed", self.master_seed.to_string()),
            ("sweep_ratios", ratios.join(",")),
        ];
        lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}
