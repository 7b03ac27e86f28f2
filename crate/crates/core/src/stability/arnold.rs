use nalgebra::{DMatrix, DVector};

use super::QuadraticFormOnBasis;
use crate::error::Result;
use crate::geometry::ChartedSystem;
use crate::linalg;
use crate::splitting::SplittingData;

/// Relative asymmetry accepted before symmetrizing.
pub const ASYMMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct ArnoldForm {
    /// Symmetrized form on the `qmu` basis (raw matrix when not symmetric).
    pub form: QuadraticFormOnBasis,
    pub raw: DMatrix<f64>,
    pub asymmetry: f64,
    pub symmetric: bool,
}

impl ArnoldForm {
    /// Empty forms count as non-degenerate.
    pub fn nondegenerate(&self, rel: f64) -> bool {
        let tol = self.form.tolerance(rel);
        self.symmetric && self.form.eigenvalues.iter().all(|e| e.abs() > tol)
    }
}

/// `Ar(l1, l2) = <ad*_{l1} mu, II_r^{-1}(ad*_{l2} mu) + [ad_{l2} II_r^{-1} mu]_r>` on `qmu`.
pub fn arnold_form(sys: &ChartedSystem, split: &SplittingData) -> Result<ArnoldForm> {
    let lie = sys.lie();
    let mu = split.mu();
    let q = split.qmu.dim();
    let base = split.ii_r_inverse(&mu)?;
    let mut lam_image = Vec::with_capacity(q);
    let mut coad = Vec::with_capacity(q);
    for j in 0..q {
        let l = split.qmu.vector(j);
        let ad_star = lie.coadjoint(&l, &mu)?;
        let image: DVector<f64> = split.ii_r_inverse(&ad_star)? + split.r_component(&lie.bracket(&l, &base)?)?;
        lam_image.push(image);
        coad.push(ad_star);
    }
    let raw = DMatrix::from_fn(q, q, |i, j| coad[i].dot(&lam_image[j]));
    let scale = linalg::max_abs(&raw).max(f64::MIN_POSITIVE);
    let asymmetry = linalg::max_abs(&(&raw - raw.transpose()));
    let symmetric = asymmetry <= ASYMMETRY_TOL * scale || q == 0;
    let matrix = if symmetric { (&raw + raw.transpose()) * 0.5 } else { raw.clone() };
    Ok(ArnoldForm {
        form: QuadraticFormOnBasis::new("arnold", split.qmu.clone(), matrix),
        raw,
        asymmetry,
        symmetric,
    })
}
