//! Rigid body with `SO(3)` acting by left multiplication, optionally carrying one internal
//! shape coordinate that couples into the inertia tensor.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::params::Params;
use super::so3;
use super::{Analytic, CatalogEntry, KnownRe};
use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::LieAlgebraSpec;

pub const ID: &str = "rigid_body";

const MAX_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidBodyParams {
    pub inertia: [f64; 3],
    /// `(coupling, stiffness, shape mass)` of the internal mode.
    pub internal: Option<(f64, f64, f64)>,
}

impl RigidBodyParams {
    fn inertia_at(&self, s: f64) -> Matrix3<f64> {
        let mut e = Matrix3::from_diagonal(&Vector3::from(self.inertia));
        if let Some((beta, _, _)) = self.internal {
            e[(0, 2)] += beta * s;
            e[(2, 0)] += beta * s;
        }
        e
    }
}

pub fn system(p: RigidBodyParams) -> ChartedSystem {
    let n = if p.internal.is_some() { 4 } else { 3 };
    let rot = |q: &DVector<f64>| Vector3::new(q[0], q[1], q[2]);
    ChartedSystem::new(
        ID,
        n,
        LieAlgebraSpec::so3(),
        move |q| {
            let v = rot(q);
            let lam = so3::exp(&v);
            let j = so3::left_jacobian(&v);
            let s = if n == 4 { q[3] } else { 0.0 };
            let m3: Matrix3<f64> = j.transpose() * lam * p.inertia_at(s) * lam.transpose() * j;
            let mut m = DMatrix::zeros(n, n);
            m.view_mut((0, 0), (3, 3)).copy_from(&m3);
            if let Some((_, _, ms)) = p.internal {
                m[(3, 3)] = ms;
            }
            m
        },
        move |q| match p.internal {
            Some((_, kappa, _)) => 0.5 * kappa * q[3] * q[3] + 0.25 * q[3].powi(4),
            None => 0.0,
        },
        move |q| {
            let jinv = so3::left_jacobian(&rot(q))
                .try_inverse()
                .expect("left Jacobian invertible inside the chart");
            let mut a = DMatrix::zeros(n, 3);
            a.view_mut((0, 0), (3, 3)).copy_from(&jinv);
            a
        },
    )
    .with_flow(move |lam, t, q| {
        let w = Vector3::new(lam[0], lam[1], lam[2]) * t;
        let out = so3::log(&(so3::exp(&w) * so3::exp(&rot(q))));
        let mut y = q.clone();
        y.rows_mut(0, 3).copy_from(&out);
        y
    })
    .with_domain(move |q| {
        rot(q).norm() < MAX_ANGLE
            && (n == 3 || p.inertia_at(q[3]).cholesky().is_some())
    })
}

pub fn build(given: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let p = Params::resolve(
        ID,
        given,
        &[
            ("i1", 1.0),
            ("i2", 2.0),
            ("i3", 3.0),
            ("axis", 3.0),
            ("omega", 1.0),
            ("internal", 0.0),
            ("beta", 0.3),
            ("kappa", 1.0),
            ("ms", 1.0),
        ],
    )?;
    let axis = p.get("axis");
    if !(axis == 1.0 || axis == 2.0 || axis == 3.0) {
        return Err(Error::InvalidParameter("`axis` must be 1, 2 or 3".into()));
    }
    let internal = match p.get("internal") {
        x if x == 0.0 => None,
        x if x == 1.0 => Some((p.get("beta"), p.positive("kappa")?, p.positive("ms")?)),
        _ => return Err(Error::InvalidParameter("`internal` must be 0 or 1".into())),
    };
    let rb = RigidBodyParams {
        inertia: [p.positive("i1")?, p.positive("i2")?, p.positive("i3")?],
        internal,
    };
    let n = if internal.is_some() { 4 } else { 3 };
    let mut xi = DVector::zeros(3);
    xi[axis as usize - 1] = p.get("omega");
    Ok(CatalogEntry {
        id: ID.to_string(),
        system: system(rb),
        known_re: vec![KnownRe {
            label: format!("steady rotation about axis {axis}"),
            x: DVector::zeros(n),
            xi,
        }],
        analytic: Some(Analytic::RigidBody(rb)),
        residual_group_abelian: true,
        gmu_compact: true,
        default_ip: vec![1.0, 1.0, 1.0],
        warnings: Vec::new(),
        params: p.into_map(),
    })
}
