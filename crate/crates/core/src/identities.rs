//! Covariant-derivative identities for generator fields and tube-adapted extensions of
//! slice vectors. Each side is evaluated by a separate code path so the pair can be
//! compared in tests.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::AlgebraVector;
use crate::linalg;
use crate::mechanics;
use crate::splitting::OrbitSplitting;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub item: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Natural size of either side for unit-scale inputs; floors the relative error.
    pub scale: f64,
}

impl IdentityCheck {
    /// `|lhs - rhs| / max(|lhs|, |rhs|, floor * scale)`.
    pub fn relative_error(&self, floor: f64) -> f64 {
        let denom = self.lhs.abs().max(self.rhs.abs()).max(floor * self.scale);
        if denom == 0.0 {
            0.0
        } else {
            (self.lhs - self.rhs).abs() / denom
        }
    }
}

/// Inputs for one evaluation. `v` and `w` must lie in the slice at the point.
#[derive(Debug, Clone)]
pub struct IdentityInputs {
    pub xi_i: AlgebraVector,
    pub xi_j: AlgebraVector,
    pub xi: AlgebraVector,
    pub lambda: AlgebraVector,
    pub v: DVector<f64>,
    pub w: DVector<f64>,
}

/// Decomposition of an algebra vector along `g = h + r`.
fn h_r_parts(orbit: &OrbitSplitting, v: &AlgebraVector) -> Result<(AlgebraVector, AlgebraVector)> {
    let d = v.len();
    let hr = linalg::hstack(&[&orbit.h, &orbit.r], d);
    let c = hr
        .lu()
        .solve(v)
        .ok_or_else(|| Error::Inconsistency("h and r are not complementary".into()))?;
    let k = orbit.h.ncols();
    let h = &orbit.h * c.rows(0, k);
    let r = &orbit.r * c.rows(k, orbit.r.ncols());
    Ok((h, r))
}

/// Evaluates the five identities at `x`.
pub fn connection_identities(sys: &ChartedSystem, x: &DVector<f64>, orbit: &OrbitSplitting, inp: &IdentityInputs) -> Result<Vec<IdentityCheck>> {
    sys.require_slice_vector(x, &inp.v)?;
    sys.require_slice_vector(x, &inp.w)?;
    let lie = sys.lie();
    let m = sys.metric(x)?;
    let a = sys.generators(x)?;
    let ii = a.transpose() * &m * &a;
    let pair = |u: &DVector<f64>, w: &DVector<f64>| u.dot(&(&m * w));
    let gen_field = |xi: &AlgebraVector| {
        let xi = xi.clone();
        move |q: &DVector<f64>| sys.generator(q, &xi)
    };
    let scale = linalg::norm2(&m) * linalg::norm2(&a).max(1.0).powi(2);
    let lam_q = &a * &inp.lambda;
    let (_, xi_i_r) = h_r_parts(orbit, &inp.xi_i)?;
    let (xi_h, xi_r) = h_r_parts(orbit, &inp.xi)?;
    let mut out = Vec::with_capacity(5);

    // (i) and (ii): nabla_{xi_i Q} xi_j Q
    let nabla_ij = sys.covariant_derivative_of_field(x, &(&a * &inp.xi_i), gen_field(&inp.xi_j))?;
    let dii_i = mechanics::d_locked_inertia(sys, x, &(&a * &xi_i_r))?;
    let br = lie.bracket(&inp.xi_j, &inp.lambda)?;
    out.push(IdentityCheck {
        item: "i".into(),
        lhs: pair(&nabla_ij, &lam_q),
        rhs: 0.5 * (dii_i.eval(&inp.xi_j, &inp.lambda) - xi_i_r.dot(&(&ii * br))),
        scale: scale * inp.xi_i.norm() * inp.xi_j.norm() * inp.lambda.norm(),
    });
    let dii_w = mechanics::d_locked_inertia(sys, x, &inp.w)?;
    out.push(IdentityCheck {
        item: "ii".into(),
        lhs: pair(&nabla_ij, &inp.w),
        rhs: -0.5 * dii_w.eval(&xi_i_r, &inp.xi_j),
        scale: scale * inp.xi_i.norm() * inp.xi_j.norm() * inp.w.norm(),
    });

    // (iii): nabla_{xi_Q} vbar
    let nabla_xi_v = sys.tube_extension_derivative(x, &inp.v, &xi_r)?;
    let dii_v = mechanics::d_locked_inertia(sys, x, &inp.v)?;
    let vscale = scale * inp.xi.norm() * inp.v.norm();
    out.push(IdentityCheck {
        item: "iii".into(),
        lhs: pair(&nabla_xi_v, &lam_q),
        rhs: 0.5 * dii_v.eval(&xi_r, &inp.lambda),
        scale: vscale * inp.lambda.norm(),
    });

    // (iv) and (v): nabla_{vbar} xi_Q, which only needs vbar(x) = v
    let nabla_v_xi = sys.covariant_derivative_of_field(x, &inp.v, gen_field(&inp.xi))?;
    out.push(IdentityCheck {
        item: "iv".into(),
        lhs: pair(&nabla_v_xi, &lam_q),
        rhs: 0.5 * dii_v.eval(&inp.xi, &inp.lambda),
        scale: vscale * inp.lambda.norm(),
    });
    let iso = if xi_h.norm() == 0.0 {
        DMatrix::zeros(sys.dim(), sys.dim())
    } else {
        sys.linearized_isotropy_action(x, &xi_h)?
    };
    out.push(IdentityCheck {
        item: "v".into(),
        lhs: pair(&nabla_v_xi, &inp.w),
        rhs: pair(&nabla_xi_v, &inp.w) + pair(&(iso * &inp.v), &inp.w),
        scale: vscale * inp.w.norm(),
    });
    Ok(out)
}
