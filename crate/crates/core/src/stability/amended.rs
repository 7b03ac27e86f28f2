//! Regular-case comparison of the amended-potential Hessian with `d^2 V_xi + corr`.

use serde::{Deserialize, Serialize};

use super::hessian::restricted_form_on;
use crate::error::Result;
use crate::fd;
use crate::geometry::ChartedSystem;
use crate::linalg;
use crate::mechanics;
use crate::splitting::SplittingData;

/// Accepted deviation relative to the larger of the two Hessians.
pub const AMENDED_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmendedCheck {
    pub applicable: bool,
    /// Largest entry of the difference on the `Sigma` basis.
    pub residual: f64,
    pub scale: f64,
    pub passes: bool,
}

/// `d^2 V_mu` on `Sigma` by finite differences of the amended potential, compared with
/// `d^2 V_xi + corr`. Not applicable unless the action is locally free at `x`.
pub fn regular_case_amended_check(sys: &ChartedSystem, split: &SplittingData) -> Result<AmendedCheck> {
    if !split.h.is_empty() {
        return Ok(AmendedCheck {
            applicable: false,
            residual: 0.0,
            scale: 0.0,
            passes: false,
        });
    }
    let x = split.x();
    let mu = split.mu();
    let basis = &split.sigma.vectors;
    let direct = fd::hessian_on_basis(
        |y| mechanics::amended_potential(sys, y, &mu),
        &x,
        basis,
        sys.steps().second_at(&x),
    )?;
    let direct = (&direct + direct.transpose()) * 0.5;
    let via_xi = restricted_form_on(sys, split, basis)?;
    let residual = if basis.ncols() == 0 { 0.0 } else { linalg::max_abs(&(&direct - &via_xi)) };
    let scale = linalg::max_abs(&direct).max(linalg::max_abs(&via_xi)).max(f64::MIN_POSITIVE);
    Ok(AmendedCheck {
        applicable: true,
        residual,
        scale,
        passes: residual <= AMENDED_REL_TOL * scale,
    })
}
