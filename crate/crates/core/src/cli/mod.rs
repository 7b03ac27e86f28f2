//! Batch front end: configuration files, sweeps, inner-product optimization and reports.

pub mod config;
pub mod optimize;
pub mod report;
pub mod run;

use std::path::{Path, PathBuf};

pub use config::{AnalysisConfig, Sweep, SweepVariable, Tolerances};
pub use optimize::{optimize_ip, OptimizeOutcome};
pub use report::{reports_from_json, reports_to_json, text_summary};
pub use run::{run_config, RunOutcome, EXIT_INCONSISTENT, EXIT_INVALID, EXIT_OK};

/// Command-line overrides applied on top of the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub json: Option<PathBuf>,
    pub text: Option<PathBuf>,
    pub oracle: bool,
    pub blocks: bool,
    pub tol: Option<f64>,
}

/// Loads, runs and writes; returns the process exit status. Errors go to stderr and no
/// output file is written.
pub fn analyze(config_path: &Path, overrides: &Overrides) -> i32 {
    let mut cfg = match AnalysisConfig::from_path(config_path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVALID;
        }
    };
    if overrides.json.is_some() {
        cfg.json = overrides.json.clone();
    }
    if overrides.text.is_some() {
        cfg.text = overrides.text.clone();
    }
    cfg.oracle |= overrides.oracle;
    cfg.blocks |= overrides.blocks;
    if let Some(t) = overrides.tol {
        cfg.tolerances.definiteness_rel = t;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    let outcome = match run_config(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return run::exit_code_for(&e);
        }
    };
    if let Err(e) = report::write_outputs(cfg.json.as_deref(), cfg.text.as_deref(), &cfg, &outcome) {
        eprintln!("error: {e}");
        return EXIT_INVALID;
    }
    if cfg.text.is_none() {
        print!("{}", text_summary(&cfg, &outcome));
    }
    for d in &outcome.diagnostics {
        eprintln!("inconsistency: {d}");
    }
    outcome.exit_code()
}
