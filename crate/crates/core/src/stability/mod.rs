//! Stability tests at a relative equilibrium: the reduced energy-momentum test, the
//! block-diagonal corollary, and a brute-force phase-space oracle.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::lie_algebra::{matrix_rows, SubspaceBasis};
use crate::linalg;
use crate::splitting::{SplittingData, SplittingOptions};

mod amended;
mod arnold;
mod blocks;
mod correction;
mod hessian;
mod isotypic;
mod oracle;
mod rem;

pub use amended::{regular_case_amended_check, AmendedCheck};
pub use arnold::{arnold_form, ArnoldForm};
pub use blocks::{
    block_corollary_test, block_forms, c_operator, kappa_phase_vector, omega_crosscheck, BlockForms, BlockOmega,
    OmegaCrosscheck,
};
pub use correction::{correction_term, correction_vector};
pub use hessian::{augmented_hessian_on, restricted_augmented_hessian, restricted_form_on};
pub use isotypic::{isotypic_subblocks, isotypic_subblocks_with_actions, IsotypicOutcome, LinearAction};
pub use oracle::{full_em_test, lifted_generator, momentum_jacobian, phase_hessian, Complement, OracleOutcome};
pub use rem::rem_test;

/// Default relative definiteness tolerance.
pub const DEFINITENESS_REL: f64 = 1e-8;
/// Absolute floor for the definiteness tolerance.
pub const DEFINITENESS_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    GmuStable,
    Inconclusive,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Route {
    RemPositiveBranch,
    RemDefiniteBranch,
    BlockCorollary,
    OracleOnly,
}

/// A symmetric bilinear form expressed on the columns of a basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticFormOnBasis {
    pub label: String,
    pub basis: SubspaceBasis,
    #[serde(with = "matrix_rows")]
    pub matrix: DMatrix<f64>,
    /// Ascending eigenvalues of the symmetric part.
    pub eigenvalues: Vec<f64>,
}

impl QuadraticFormOnBasis {
    pub fn new(label: impl Into<String>, basis: SubspaceBasis, matrix: DMatrix<f64>) -> Self {
        let eigenvalues = linalg::sym_eigenvalues(&matrix);
        QuadraticFormOnBasis {
            label: label.into(),
            basis,
            matrix,
            eigenvalues,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn tolerance(&self, rel: f64) -> f64 {
        definiteness_tol(&self.eigenvalues, rel)
    }

    pub fn sign(&self, rel: f64) -> Sign {
        classify(&self.eigenvalues, self.tolerance(rel))
    }

    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.eigenvalues.first().copied()
    }
}

/// `rel * max|eig|`, floored.
pub fn definiteness_tol(eigs: &[f64], rel: f64) -> f64 {
    let max = eigs.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    (rel * max).max(DEFINITENESS_FLOOR)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
    /// Indefinite or degenerate.
    Neither,
    /// The form lives on the zero space.
    Empty,
}

pub fn classify(eigs: &[f64], tol: f64) -> Sign {
    if eigs.is_empty() {
        return Sign::Empty;
    }
    let (pos, neg, _) = linalg::inertia(eigs, tol);
    if pos == eigs.len() {
        Sign::Positive
    } else if neg == eigs.len() {
        Sign::Negative
    } else {
        Sign::Neither
    }
}

/// Model-level facts that enter reports as assumptions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelFlags {
    pub gmu_compact: bool,
    pub residual_group_abelian: bool,
}

impl Default for ModelFlags {
    fn default() -> Self {
        ModelFlags {
            gmu_compact: true,
            residual_group_abelian: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityOptions {
    pub definiteness_rel: f64,
    pub splitting: SplittingOptions,
    pub flags: ModelFlags,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions {
            definiteness_rel: DEFINITENESS_REL,
            splitting: SplittingOptions::default(),
            flags: ModelFlags::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub route: Route,
    pub dim_check: usize,
    pub block_spectra: BTreeMap<String, Vec<f64>>,
    pub residuals: BTreeMap<String, f64>,
    pub assumptions: Vec<String>,
    pub parameters: BTreeMap<String, serde_json::Value>,
}

impl StabilityReport {
    pub(crate) fn new(verdict: Verdict, route: Route, split: &SplittingData, opts: &StabilityOptions) -> Self {
        let mut parameters = BTreeMap::new();
        parameters.insert("x".to_string(), serde_json::json!(split.x));
        parameters.insert("xi".to_string(), serde_json::json!(split.xi));
        parameters.insert("mu".to_string(), serde_json::json!(split.mu));
        parameters.insert("xi_perp".to_string(), serde_json::json!(split.xi_perp));
        parameters.insert("definiteness_rel".to_string(), serde_json::json!(opts.definiteness_rel));
        let mut residuals = BTreeMap::new();
        for (k, v) in &split.residuals {
            residuals.insert(k.clone(), *v);
        }
        StabilityReport {
            verdict,
            route,
            dim_check: split.dim_check(),
            block_spectra: BTreeMap::new(),
            residuals,
            assumptions: base_assumptions(opts),
            parameters,
        }
    }
}

fn base_assumptions(opts: &StabilityOptions) -> Vec<String> {
    let mut out = vec!["stabilizers handled at the Lie algebra level (connected components assumed)".to_string()];
    if opts.flags.gmu_compact {
        out.push("G_mu compact (asserted by the model)".to_string());
    } else {
        out.push("G_mu not known to be compact: verdict refers to leafwise stability only".to_string());
    }
    out
}
