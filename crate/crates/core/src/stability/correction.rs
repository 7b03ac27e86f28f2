use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::linalg;
use crate::mechanics;
use crate::splitting::SplittingData;

/// `P_r[(DII . v)(xi_perp)]` in `r`-basis coordinates.
pub fn correction_vector(sys: &ChartedSystem, split: &SplittingData, v: &DVector<f64>) -> Result<DVector<f64>> {
    let dii = mechanics::d_locked_inertia(sys, &split.x(), v)?;
    Ok(split.restrict_to_r(&dii.partial(&split.xi_perp())))
}

/// Gram matrix of the correction term on the columns of `basis`.
pub fn correction_term(sys: &ChartedSystem, split: &SplittingData, basis: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = basis.ncols();
    let rd = split.r.dim();
    if rd == 0 || k == 0 {
        return Ok(DMatrix::zeros(k, k));
    }
    let mut c = DMatrix::zeros(rd, k);
    for j in 0..k {
        c.set_column(j, &correction_vector(sys, split, &basis.column(j).into_owned())?);
    }
    let sol = linalg::solve_spd(&split.ii_r(), &c)
        .ok_or_else(|| Error::Inconsistency("locked inertia singular on r".into()))?;
    let corr = c.transpose() * sol;
    Ok((&corr + corr.transpose()) * 0.5)
}
