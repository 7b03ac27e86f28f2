//! Running a configuration: single points, sweeps and threshold detection.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rayon::prelude::*;
use serde_json::json;

use super::config::{AnalysisConfig, SweepVariable};
use super::optimize::{optimize_ip, OptimizeOutcome};
use crate::catalog::{self, CatalogEntry};
use crate::error::{Error, Result};
use crate::fd::StepPolicy;
use crate::splitting::build_splitting;
use crate::stability::{
    block_corollary_test, block_forms, full_em_test, omega_crosscheck, rem_test, Complement, ModelFlags,
    StabilityOptions, StabilityReport, Verdict,
};

/// Off-block and cross-check residuals above this are reported as inconsistencies.
pub const DIAGNOSTIC_TOL: f64 = 1e-6;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_INCONSISTENT: i32 = 3;

/// Model parameters and inner-product parameters of one analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub model_params: BTreeMap<String, f64>,
    pub ip: Option<Vec<f64>>,
}

impl Setting {
    pub fn from_config(cfg: &AnalysisConfig) -> Self {
        Setting {
            model_params: cfg.model_params.clone(),
            ip: cfg.ip_params.clone(),
        }
    }

    pub fn with(&self, var: &SweepVariable, value: f64, default_ip: &[f64]) -> Self {
        let mut out = self.clone();
        match var {
            SweepVariable::Model(name) => {
                out.model_params.insert(name.clone(), value);
            }
            SweepVariable::Ip(i) => {
                let mut ip = out.ip.unwrap_or_else(|| default_ip.to_vec());
                if ip.len() <= *i {
                    ip.resize(i + 1, 1.0);
                }
                ip[*i] = value;
                out.ip = Some(ip);
            }
        }
        out
    }
}

/// A model instance ready for analysis.
pub struct Prepared {
    pub entry: CatalogEntry,
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
    pub ip_params: Vec<f64>,
    pub opts: StabilityOptions,
}

pub fn prepare(cfg: &AnalysisConfig, setting: &Setting) -> Result<Prepared> {
    let mut entry = catalog::build(&cfg.model, &setting.model_params)?;
    if let Some(h) = cfg.tolerances.fd_step {
        entry.system = entry.system.clone().with_steps(StepPolicy::with_first(h));
    }
    let re = entry.known_re.get(cfg.re_index).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "`re.index` {} out of range: {} has {} known relative equilibria",
            cfg.re_index,
            cfg.model,
            entry.known_re.len()
        ))
    })?;
    let x = match &cfg.point {
        Some(p) => DVector::from_column_slice(p),
        None => re.x.clone(),
    };
    let xi = match &cfg.velocity {
        Some(v) => DVector::from_column_slice(v),
        None => re.xi.clone(),
    };
    if x.len() != entry.system.dim() {
        return Err(Error::dim("re.point", entry.system.dim(), x.len()));
    }
    if xi.len() != entry.system.group_dim() {
        return Err(Error::dim("re.velocity", entry.system.group_dim(), xi.len()));
    }
    let ip_params = setting.ip.clone().unwrap_or_else(|| entry.default_ip.clone());
    let opts = StabilityOptions {
        definiteness_rel: cfg.tolerances.definiteness_rel,
        flags: ModelFlags {
            gmu_compact: entry.gmu_compact,
            residual_group_abelian: entry.residual_group_abelian,
        },
        ..StabilityOptions::default()
    };
    Ok(Prepared {
        entry,
        x,
        xi,
        ip_params,
        opts,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub index: usize,
    pub value: Option<f64>,
    pub rem: StabilityReport,
    pub blocks: Option<StabilityReport>,
    pub oracle: Option<StabilityReport>,
    /// Residuals that exceeded [`DIAGNOSTIC_TOL`] or verdict disagreements.
    pub diagnostics: Vec<String>,
}

impl PointResult {
    pub fn stable(&self) -> bool {
        self.rem.verdict == Verdict::GmuStable
    }

    /// Smallest eigenvalue (positive branch) or distance from indefiniteness (definite
    /// branch) of the tested form.
    pub fn margin(&self) -> f64 {
        self.rem.residuals.get("margin").copied().unwrap_or(f64::INFINITY)
    }

    pub fn reports(&self) -> impl Iterator<Item = &StabilityReport> {
        std::iter::once(&self.rem).chain(self.blocks.iter()).chain(self.oracle.iter())
    }
}

fn annotate(report: &mut StabilityReport, cfg: &AnalysisConfig, prep: &Prepared, index: usize, value: Option<(&str, f64)>) {
    let p = &mut report.parameters;
    p.insert("model".into(), json!(cfg.model));
    p.insert("model_params".into(), json!(prep.entry.params));
    p.insert("ip_params".into(), json!(prep.ip_params));
    p.insert("point_index".into(), json!(index));
    if let Some((name, v)) = value {
        p.insert("sweep_variable".into(), json!(name));
        p.insert("sweep_value".into(), json!(v));
    }
    for w in &prep.entry.warnings {
        report.assumptions.push(format!("model warning: {w}"));
    }
    if !prep.opts.flags.residual_group_abelian {
        report
            .assumptions
            .push("residual symmetry not abelian: isotypic sub-blocking skipped".into());
    }
}

/// Margin-only evaluation used by bisection and the inner-product search.
pub fn rem_margin(cfg: &AnalysisConfig, setting: &Setting) -> Result<(bool, f64)> {
    let prep = prepare(cfg, setting)?;
    let sys = &prep.entry.system;
    let ip = sys.lie().invariant_inner_product_family(&prep.ip_params)?;
    let split = build_splitting(sys, &prep.x, &prep.xi, &ip, &prep.opts.splitting)?;
    let (report, _) = rem_test(sys, &split, &prep.opts)?;
    let margin = report.residuals.get("margin").copied().unwrap_or(f64::INFINITY);
    Ok((report.verdict == Verdict::GmuStable, margin))
}

/// Full analysis at one setting, with the optional block and oracle routes.
pub fn analyze_point(cfg: &AnalysisConfig, setting: &Setting, index: usize, value: Option<(&str, f64)>) -> Result<PointResult> {
    let prep = prepare(cfg, setting)?;
    let sys = &prep.entry.system;
    let ip = sys.lie().invariant_inner_product_family(&prep.ip_params)?;
    let split = build_splitting(sys, &prep.x, &prep.xi, &ip, &prep.opts.splitting)?;
    let (mut rem, _) = rem_test(sys, &split, &prep.opts)?;
    annotate(&mut rem, cfg, &prep, index, value);
    let mut diagnostics = Vec::new();

    let blocks = if cfg.blocks {
        let mut report = block_corollary_test(sys, &split, &prep.opts)?;
        if report.verdict != Verdict::NotApplicable {
            let forms = block_forms(sys, &split, &prep.opts)?;
            let cross = omega_crosscheck(sys, &split, &forms)?;
            for (k, v) in &forms.residuals {
                report.residuals.insert(k.clone(), *v);
            }
            report.residuals.insert("omega_crosscheck".into(), cross.residual);
            for key in ["hessian_off_block_ratio", "omega_phase"] {
                let v = forms.residuals[key];
                if v > DIAGNOSTIC_TOL {
                    diagnostics.push(format!("point {index}: {key} = {v:e}"));
                }
            }
            if cross.residual > DIAGNOSTIC_TOL {
                diagnostics.push(format!("point {index}: omega_crosscheck = {:e}", cross.residual));
            }
            if report.verdict != rem.verdict {
                diagnostics.push(format!(
                    "point {index}: block verdict {:?} differs from reduced test {:?}",
                    report.verdict, rem.verdict
                ));
            }
        }
        annotate(&mut report, cfg, &prep, index, value);
        Some(report)
    } else {
        None
    };

    let oracle = if cfg.oracle {
        let out = full_em_test(sys, &prep.x, &prep.xi, &ip, Complement::Orthogonal, &prep.opts)?;
        let mut report = out.report;
        if report.verdict != rem.verdict {
            diagnostics.push(format!(
                "point {index}: oracle verdict {:?} differs from reduced test {:?}",
                report.verdict, rem.verdict
            ));
        }
        annotate(&mut report, cfg, &prep, index, value);
        Some(report)
    } else {
        None
    };

    Ok(PointResult {
        index,
        value: value.map(|v| v.1),
        rem,
        blocks,
        oracle,
        diagnostics,
    })
}

/// A verdict change between two neighbouring sweep values, refined by bisection.
#[derive(Debug, Clone, PartialEq)]
pub struct Threshold {
    pub value: f64,
    /// Final bracket.
    pub bracket: (f64, f64),
    /// True when the verdict is `GMU_STABLE` above the threshold.
    pub stable_above: bool,
}

/// Bisection of the verdict boundary between `lo` and `hi`, which must have different
/// verdicts.
pub fn bisect(cfg: &AnalysisConfig, base: &Setting, var: &SweepVariable, default_ip: &[f64], lo: f64, hi: f64) -> Result<Threshold> {
    let stable_at = |v: f64| rem_margin(cfg, &base.with(var, v, default_ip)).map(|r| r.0);
    let s_lo = stable_at(lo)?;
    let s_hi = stable_at(hi)?;
    if s_lo == s_hi {
        return Err(Error::Precondition("bisection bracket has equal verdicts".into()));
    }
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let width = (b - a).abs();
        if width <= cfg.tolerances.bisection_rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if stable_at(mid)? == s_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Threshold {
        value: 0.5 * (a + b),
        bracket: (a, b),
        stable_above: s_hi,
    })
}

/// Verdicts over the sweep grid, evaluated concurrently and returned in grid order.
pub fn sweep_verdicts(cfg: &AnalysisConfig, base: &Setting, default_ip: &[f64]) -> Result<Vec<(f64, bool)>> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Precondition("no sweep configured".into()))?;
    (0..sweep.steps)
        .into_par_iter()
        .map(|i| {
            let v = sweep.value(i);
            rem_margin(cfg, &base.with(&sweep.variable, v, default_ip)).map(|r| (v, r.0))
        })
        .collect()
}

/// All verdict changes along a grid, refined.
pub fn thresholds_from_grid(cfg: &AnalysisConfig, base: &Setting, var: &SweepVariable, default_ip: &[f64], grid: &[(f64, bool)]) -> Result<Vec<Threshold>> {
    grid.windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| bisect(cfg, base, var, default_ip, w[0].0, w[1].0))
        .collect()
}

/// Lowest sweep value above which every grid point is stable, refined by bisection.
/// `None` when the top of the range is not stable or the whole range is stable.
pub fn stability_threshold(cfg: &AnalysisConfig, base: &Setting, default_ip: &[f64]) -> Result<Option<f64>> {
    let grid = sweep_verdicts(cfg, base, default_ip)?;
    let var = &cfg.sweep.as_ref().expect("sweep checked").variable;
    if !grid.last().map(|g| g.1).unwrap_or(false) {
        return Ok(None);
    }
    let first_stable_tail = grid.iter().rposition(|g| !g.1);
    match first_stable_tail {
        None => Ok(None),
        Some(i) => Ok(Some(bisect(cfg, base, var, default_ip, grid[i].0, grid[i + 1].0)?.value)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub points: Vec<PointResult>,
    pub thresholds: Vec<Threshold>,
    pub optimize: Option<OptimizeOutcome>,
    /// Report at the optimal inner product, when optimizing.
    pub optimal_report: Option<StabilityReport>,
    pub diagnostics: Vec<String>,
}

impl RunOutcome {
    pub fn reports(&self) -> Vec<StabilityReport> {
        let mut out: Vec<StabilityReport> = self.points.iter().flat_map(|p| p.reports().cloned()).collect();
        out.extend(self.optimal_report.iter().cloned());
        out
    }

    pub fn exit_code(&self) -> i32 {
        if self.diagnostics.is_empty() {
            EXIT_OK
        } else {
            EXIT_INCONSISTENT
        }
    }
}

pub fn default_ip(cfg: &AnalysisConfig) -> Result<Vec<f64>> {
    Ok(catalog::build(&cfg.model, &cfg.model_params)?.default_ip)
}

/// Runs every analysis requested by the configuration. Nothing is written here.
pub fn run_config(cfg: &AnalysisConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let base = Setting::from_config(cfg);
    let default_ip = default_ip(cfg)?;
    let points: Vec<PointResult> = match &cfg.sweep {
        None => vec![analyze_point(cfg, &base, 0, None)?],
        Some(sweep) => {
            let name = sweep.variable.name();
            (0..sweep.steps)
                .into_par_iter()
                .map(|i| {
                    let v = sweep.value(i);
                    analyze_point(cfg, &base.with(&sweep.variable, v, &default_ip), i, Some((&name, v)))
                })
                .collect::<Result<_>>()?
        }
    };
    let thresholds = match &cfg.sweep {
        None => Vec::new(),
        Some(sweep) => {
            let grid: Vec<(f64, bool)> = points.iter().map(|p| (p.value.unwrap_or(f64::NAN), p.stable())).collect();
            thresholds_from_grid(cfg, &base, &sweep.variable, &default_ip, &grid)?
        }
    };
    let (optimize, optimal_report) = if cfg.optimize_ip {
        let out = optimize_ip(cfg)?;
        let setting = Setting {
            ip: Some(out.best_params.clone()),
            ..base.clone()
        };
        let mut report = analyze_point(cfg, &setting, points.len(), None)?.rem;
        report.parameters.insert("optimal_ip".into(), json!(out.best_params));
        report.parameters.insert("optimal_threshold".into(), json!(out.best_threshold));
        report.parameters.insert("optimize_flags".into(), json!(out.flags));
        (Some(out), Some(report))
    } else {
        (None, None)
    };
    let diagnostics = points.iter().flat_map(|p| p.diagnostics.iter().cloned()).collect();
    Ok(RunOutcome {
        points,
        thresholds,
        optimize,
        optimal_report,
        diagnostics,
    })
}

/// Exit status for an error raised while running.
pub fn exit_code_for(err: &Error) -> i32 {
    if err.is_inconsistency() {
        EXIT_INCONSISTENT
    } else {
        EXIT_INVALID
    }
}

