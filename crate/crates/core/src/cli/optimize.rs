//! Search over the splitting inner product for the lowest stability threshold.

use rayon::prelude::*;

use super::config::AnalysisConfig;
use super::run::{default_ip, stability_threshold, Setting};
use crate::error::{Error, Result};

const GOLDEN: f64 = 0.618_033_988_749_894_9;
/// Relative spread of grid thresholds below which the family is treated as constant.
const CONSTANT_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub best_params: Vec<f64>,
    pub best_threshold: f64,
    /// Parameter values whose threshold was infinite (no stable region in the sweep range).
    pub excluded: Vec<Vec<f64>>,
    pub evaluations: usize,
    /// `constant_threshold`, `non_unimodal_fallback`, `boundary_minimum`.
    pub flags: Vec<String>,
}

struct Search<'a> {
    cfg: &'a AnalysisConfig,
    default_ip: Vec<f64>,
    evaluations: usize,
    excluded: Vec<Vec<f64>>,
}

impl Search<'_> {
    fn threshold(&self, params: &[f64]) -> Result<f64> {
        let setting = Setting {
            ip: Some(params.to_vec()),
            ..Setting::from_config(self.cfg)
        };
        Ok(stability_threshold(self.cfg, &setting, &self.default_ip)?.unwrap_or(f64::INFINITY))
    }

    fn eval_many(&mut self, candidates: &[Vec<f64>]) -> Result<Vec<f64>> {
        let out: Vec<f64> = candidates
            .par_iter()
            .map(|p| self.threshold(p))
            .collect::<Result<_>>()?;
        self.evaluations += candidates.len();
        for (p, t) in candidates.iter().zip(&out) {
            if !t.is_finite() && !self.excluded.contains(p) {
                self.excluded.push(p.clone());
            }
        }
        Ok(out)
    }

    fn eval(&mut self, p: &[f64]) -> Result<f64> {
        Ok(self.eval_many(&[p.to_vec()])?[0])
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo > 0.0 {
        let (a, b) = (lo.ln(), hi.ln());
        (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
    } else {
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }
}

fn local_minima(values: &[f64]) -> usize {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mut count = 0;
    for i in 0..finite.len() {
        let left = i == 0 || finite[i] < finite[i - 1];
        let right = i + 1 == finite.len() || finite[i] <= finite[i + 1];
        if left && right {
            count += 1;
        }
    }
    count
}

/// One-dimensional minimization along coordinate `c`, other coordinates fixed.
fn minimize_coordinate(search: &mut Search, start: &[f64], c: usize, flags: &mut Vec<String>) -> Result<(Vec<f64>, f64)> {
    let cfg = search.cfg;
    let (lo, hi) = cfg.optimize_range;
    let with = |v: f64| {
        let mut p = start.to_vec();
        p[c] = v;
        p
    };
    let mut xs = grid(lo, hi, cfg.optimize_grid);
    let mut ts = search.eval_many(&xs.iter().map(|&v| with(v)).collect::<Vec<_>>())?;
    if local_minima(&ts) > 1 {
        flags.push(format!("non_unimodal_fallback(ip.{c})"));
        xs = grid(lo, hi, 4 * cfg.optimize_grid);
        ts = search.eval_many(&xs.iter().map(|&v| with(v)).collect::<Vec<_>>())?;
    }
    let (best, &tbest) = ts
        .iter()
        .enumerate()
        .filter(|(_, t)| t.is_finite())
        .min_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| Error::Precondition("no stable region for any inner-product parameter in range".into()))?;
    let finite: Vec<f64> = ts.iter().copied().filter(|t| t.is_finite()).collect();
    let tmax = finite.iter().fold(f64::MIN, |a, &b| a.max(b));
    if finite.len() == ts.len() && tmax - tbest <= CONSTANT_REL * tbest.abs().max(f64::MIN_POSITIVE) {
        flags.push(format!("constant_threshold(ip.{c})"));
        return Ok((with(xs[best]), tbest));
    }
    if best == 0 || best + 1 == xs.len() {
        flags.push(format!("boundary_minimum(ip.{c})"));
    }
    let mut a = xs[best.saturating_sub(1)];
    let mut b = xs[(best + 1).min(xs.len() - 1)];
    let mut x1 = b - GOLDEN * (b - a);
    let mut x2 = a + GOLDEN * (b - a);
    let mut f1 = search.eval(&with(x1))?;
    let mut f2 = search.eval(&with(x2))?;
    while (b - a) > cfg.tolerances.optimize_rel * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - GOLDEN * (b - a);
            f1 = search.eval(&with(x1))?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + GOLDEN * (b - a);
            f2 = search.eval(&with(x2))?;
        }
    }
    let mut cands = vec![(x1, f1), (x2, f2), (xs[best], tbest)];
    cands.sort_by(|p, q| p.1.total_cmp(&q.1));
    Ok((with(cands[0].0), cands[0].1))
}

/// Minimizes the stability threshold of the sweep variable over the inner-product
/// parameters: golden section in one dimension, coordinate descent otherwise.
pub fn optimize_ip(cfg: &AnalysisConfig) -> Result<OptimizeOutcome> {
    if cfg.sweep.is_none() {
        return Err(Error::InvalidParameter("optimization needs a sweep".into()));
    }
    let default_ip = default_ip(cfg)?;
    let start = cfg.ip_params.clone().unwrap_or_else(|| default_ip.clone());
    if start.is_empty() {
        return Err(Error::InvalidParameter("the inner-product family has no parameters".into()));
    }
    let mut search = Search {
        cfg,
        default_ip,
        evaluations: 0,
        excluded: Vec::new(),
    };
    let mut flags = Vec::new();
    let mut best = start.clone();
    let mut best_t = search.eval(&best)?;
    let cycles = if start.len() == 1 { 1 } else { 4 };
    for _ in 0..cycles {
        let before = best_t;
        for c in 0..best.len() {
            let (p, t) = minimize_coordinate(&mut search, &best, c, &mut flags)?;
            if t <= best_t || !best_t.is_finite() {
                best = p;
                best_t = t;
            }
        }
        if before.is_finite() && before - best_t <= cfg.tolerances.optimize_rel * best_t.abs() {
            break;
        }
    }
    flags.sort();
    flags.dedup();
    Ok(OptimizeOutcome {
        best_params: best,
        best_threshold: best_t,
        excluded: search.excluded,
        evaluations: search.evaluations,
        flags,
    })
}
