//! Flat `key = value` analysis configuration.
//!
//! ```text
//! # sleeping top, sweep in zeta
//! model.id = lagrange_top
//! model.i3 = 1.5
//! ip.params = 1
//! sweep.variable = zeta
//! sweep.range = 0.5, 3
//! sweep.steps = 26
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::catalog::MODEL_IDS;
use crate::error::{Error, Result};

/// Variable swept or searched over: a model parameter or one inner-product parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepVariable {
    Model(String),
    Ip(usize),
}

impl SweepVariable {
    fn parse(s: &str) -> Result<Self> {
        match s.strip_prefix("ip.") {
            Some(idx) => idx
                .parse()
                .map(SweepVariable::Ip)
                .map_err(|_| Error::InvalidParameter(format!("bad inner-product index in `{s}`"))),
            None => Ok(SweepVariable::Model(s.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            SweepVariable::Model(n) => n.clone(),
            SweepVariable::Ip(i) => format!("ip.{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub range: (f64, f64),
    pub steps: usize,
}

impl Sweep {
    pub fn value(&self, index: usize) -> f64 {
        let (lo, hi) = self.range;
        lo + (hi - lo) * index as f64 / (self.steps - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    pub definiteness_rel: f64,
    /// Relative bracket width at which threshold bisection stops.
    pub bisection_rel: f64,
    /// Relative bracket width at which the inner-product search stops.
    pub optimize_rel: f64,
    pub fd_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            definiteness_rel: crate::stability::DEFINITENESS_REL,
            bisection_rel: 1e-12,
            optimize_rel: 1e-6,
            fd_step: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub model: String,
    pub model_params: BTreeMap<String, f64>,
    /// Which of the model's known relative equilibria to analyze.
    pub re_index: usize,
    /// Explicit velocity replacing the model's.
    pub velocity: Option<Vec<f64>>,
    /// Explicit chart point replacing the model's.
    pub point: Option<Vec<f64>>,
    pub ip_params: Option<Vec<f64>>,
    pub sweep: Option<Sweep>,
    pub optimize_ip: bool,
    /// Search interval for each inner-product parameter.
    pub optimize_range: (f64, f64),
    /// Grid size before the golden-section refinement.
    pub optimize_grid: usize,
    pub tolerances: Tolerances,
    pub oracle: bool,
    pub blocks: bool,
    pub json: Option<PathBuf>,
    pub text: Option<PathBuf>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            model: String::new(),
            model_params: BTreeMap::new(),
            re_index: 0,
            velocity: None,
            point: None,
            ip_params: None,
            sweep: None,
            optimize_ip: false,
            optimize_range: (0.05, 10.0),
            optimize_grid: 24,
            tolerances: Tolerances::default(),
            oracle: false,
            blocks: false,
            json: None,
            text: None,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .trim()
        .parse()
        .map_err(|_| Error::InvalidParameter(format!("`{key}`: `{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("`{key}` must be finite")));
    }
    Ok(x)
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split([',', ' ', '\t'])
        .filter(|s| !s.is_empty())
        .map(|s| parse_f64(key, s))
        .collect()
}

fn parse_range(key: &str, v: &str) -> Result<(f64, f64)> {
    match parse_list(key, v)?.as_slice() {
        [lo, hi] if lo < hi => Ok((*lo, *hi)),
        _ => Err(Error::InvalidParameter(format!("`{key}` needs two increasing numbers"))),
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::InvalidParameter(format!("`{key}`: `{v}` is not a boolean"))),
    }
}

impl AnalysisConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = AnalysisConfig::default();
        let mut sweep_var = None;
        let mut sweep_range = None;
        let mut sweep_steps = None;
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParameter(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::InvalidParameter(format!("line {}: `{key}` given twice", lineno + 1)));
            }
            match key {
                "model.id" => cfg.model = value.to_string(),
                "re.index" => {
                    cfg.re_index = value
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("`{key}` must be a non-negative integer")))?
                }
                "re.velocity" | "velocity" => cfg.velocity = Some(parse_list(key, value)?),
                "re.point" => cfg.point = Some(parse_list(key, value)?),
                "ip.params" => cfg.ip_params = Some(parse_list(key, value)?),
                "sweep.variable" => sweep_var = Some(SweepVariable::parse(value)?),
                "sweep.range" => sweep_range = Some(parse_range(key, value)?),
                "sweep.steps" => {
                    sweep_steps = Some(
                        value
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidParameter(format!("`{key}` must be an integer")))?,
                    )
                }
                "optimize_ip" | "optimize.ip" => cfg.optimize_ip = parse_bool(key, value)?,
                "optimize.range" => cfg.optimize_range = parse_range(key, value)?,
                "optimize.grid" => {
                    cfg.optimize_grid = value
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("`{key}` must be an integer")))?
                }
                "tol.definiteness" => cfg.tolerances.definiteness_rel = parse_f64(key, value)?,
                "tol.bisection" => cfg.tolerances.bisection_rel = parse_f64(key, value)?,
                "tol.optimize" => cfg.tolerances.optimize_rel = parse_f64(key, value)?,
                "tol.fd_step" => cfg.tolerances.fd_step = Some(parse_f64(key, value)?),
                "run.oracle" => cfg.oracle = parse_bool(key, value)?,
                "run.blocks" => cfg.blocks = parse_bool(key, value)?,
                "output.json" => cfg.json = Some(PathBuf::from(value)),
                "output.text" => cfg.text = Some(PathBuf::from(value)),
                other => match other.strip_prefix("model.") {
                    Some(name) if !name.is_empty() => {
                        cfg.model_params.insert(name.to_string(), parse_f64(key, value)?);
                    }
                    _ => return Err(Error::InvalidParameter(format!("line {}: unknown key `{other}`", lineno + 1))),
                },
            }
        }
        cfg.sweep = match (sweep_var, sweep_range, sweep_steps) {
            (None, None, None) => None,
            (Some(variable), Some(range), steps) => Some(Sweep {
                variable,
                range,
                steps: steps.unwrap_or(11),
            }),
            _ => return Err(Error::InvalidParameter("sweep needs both `sweep.variable` and `sweep.range`".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.is_empty() {
            return Err(Error::InvalidParameter("`model.id` is required".into()));
        }
        if !MODEL_IDS.contains(&self.model.as_str()) {
            return Err(Error::UnknownModel(self.model.clone()));
        }
        if let Some(s) = &self.sweep {
            if s.steps < 2 {
                return Err(Error::InvalidParameter("`sweep.steps` must be at least 2".into()));
            }
        }
        if self.optimize_ip {
            if self.sweep.is_none() {
                return Err(Error::InvalidParameter(
                    "`optimize_ip` needs a sweep that defines the threshold variable".into(),
                ));
            }
            if self.optimize_grid < 3 {
                return Err(Error::InvalidParameter("`optimize.grid` must be at least 3".into()));
            }
        }
        let t = &self.tolerances;
        for (k, v) in [
            ("tol.definiteness", t.definiteness_rel),
            ("tol.bisection", t.bisection_rel),
            ("tol.optimize", t.optimize_rel),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParameter(format!("`{k}` must lie in (0, 1)")));
            }
        }
        if let Some(h) = t.fd_step {
            if h <= 0.0 {
                return Err(Error::InvalidParameter("`tol.fd_step` must be positive".into()));
            }
        }
        Ok(())
    }
}
