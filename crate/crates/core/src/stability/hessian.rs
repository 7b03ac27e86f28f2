use nalgebra::DMatrix;

use super::correction::correction_term;
use super::QuadraticFormOnBasis;
use crate::error::Result;
use crate::fd;
use crate::geometry::ChartedSystem;
use crate::lie_algebra::{Ambient, SubspaceBasis};
use crate::linalg::RANK_TOL;
use crate::mechanics;
use crate::splitting::SplittingData;

/// Second derivative of `V_{xi_perp}` at `x` on the columns of `basis`.
pub fn augmented_hessian_on(sys: &ChartedSystem, split: &SplittingData, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if basis.ncols() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let x = split.x();
    let xi = split.xi_perp();
    let h = fd::hessian_on_basis(
        |y| mechanics::augmented_potential(sys, y, &xi),
        &x,
        basis,
        sys.steps().second_at(&x),
    )?;
    Ok((&h + h.transpose()) * 0.5)
}

/// `d^2 V_{xi_perp} + corr` on the columns of `basis`.
pub fn restricted_form_on(sys: &ChartedSystem, split: &SplittingData, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(augmented_hessian_on(sys, split, basis)? + correction_term(sys, split, basis)?)
}

/// `d^2 V_{xi_perp} + corr` on `Sigma`.
pub fn restricted_augmented_hessian(sys: &ChartedSystem, split: &SplittingData) -> Result<QuadraticFormOnBasis> {
    let m = restricted_form_on(sys, split, &split.sigma.vectors)?;
    let basis = SubspaceBasis::new(Ambient::Tangent, split.sigma.vectors.clone(), RANK_TOL)?;
    Ok(QuadraticFormOnBasis::new("sigma_hessian", basis, m))
}
