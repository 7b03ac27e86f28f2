//! JSON and plain-text output.

use std::fmt::Write as _;
use std::path::Path;

use super::config::AnalysisConfig;
use super::run::RunOutcome;
use crate::error::{Error, Result};
use crate::stability::StabilityReport;

pub fn reports_to_json(reports: &[StabilityReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::InvalidParameter(format!("serialization failed: {e}")))
}

pub fn reports_from_json(text: &str) -> Result<Vec<StabilityReport>> {
    serde_json::from_str(text).map_err(|e| Error::InvalidParameter(format!("bad report JSON: {e}")))
}

fn verdict(r: &StabilityReport) -> String {
    serde_json::to_value(r.verdict)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn route(r: &StabilityReport) -> String {
    serde_json::to_value(r.route)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Human-readable summary with whitespace-separated numeric columns.
pub fn text_summary(cfg: &AnalysisConfig, out: &RunOutcome) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# model {}", cfg.model);
    for (k, v) in &cfg.model_params {
        let _ = writeln!(s, "# model.{k} = {v}");
    }
    let var = cfg.sweep.as_ref().map(|w| w.variable.name()).unwrap_or_else(|| "-".into());
    let mut header = format!("# index {var} verdict route dim_check margin");
    if cfg.blocks {
        header.push_str(" blocks");
    }
    if cfg.oracle {
        header.push_str(" oracle");
    }
    let _ = writeln!(s, "{header}");
    for p in &out.points {
        let mut line = format!(
            "{} {} {} {} {} {:.12e}",
            p.index,
            p.value.map(|v| format!("{v:.12e}")).unwrap_or_else(|| "-".into()),
            verdict(&p.rem),
            route(&p.rem),
            p.rem.dim_check,
            p.margin()
        );
        if let Some(b) = &p.blocks {
            let _ = write!(line, " {}", verdict(b));
        }
        if let Some(o) = &p.oracle {
            let _ = write!(line, " {}", verdict(o));
        }
        let _ = writeln!(s, "{line}");
    }
    for t in &out.thresholds {
        let _ = writeln!(
            s,
            "threshold {var} {:.12e} bracket {:.12e} {:.12e} {}",
            t.value,
            t.bracket.0,
            t.bracket.1,
            if t.stable_above { "stable_above" } else { "stable_below" }
        );
    }
    if let Some(o) = &out.optimize {
        let params: Vec<String> = o.best_params.iter().map(|v| format!("{v:.12e}")).collect();
        let _ = writeln!(s, "optimal_ip {}", params.join(" "));
        let _ = writeln!(s, "optimal_threshold {var} {:.12e}", o.best_threshold);
        let _ = writeln!(s, "optimize_evaluations {}", o.evaluations);
        if !o.excluded.is_empty() {
            let _ = writeln!(s, "optimize_excluded {}", o.excluded.len());
        }
        for f in &o.flags {
            let _ = writeln!(s, "optimize_flag {f}");
        }
    }
    for d in &out.diagnostics {
        let _ = writeln!(s, "diagnostic {d}");
    }
    s
}

/// Writes both outputs; the caller has already finished every computation.
pub fn write_outputs(json: Option<&Path>, text: Option<&Path>, cfg: &AnalysisConfig, out: &RunOutcome) -> Result<()> {
    let json_text = reports_to_json(&out.reports())?;
    let summary = text_summary(cfg, out);
    let write = |p: &Path, body: &str| {
        std::fs::write(p, body).map_err(|e| Error::InvalidParameter(format!("cannot write {}: {e}", p.display())))
    };
    if let Some(p) = json {
        write(p, &json_text)?;
    }
    if let Some(p) = text {
        write(p, &summary)?;
    }
    Ok(())
}
