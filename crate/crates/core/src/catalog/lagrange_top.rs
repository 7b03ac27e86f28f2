//! Axisymmetric heavy top with its `T^2` symmetry, charted by rotation vectors near the
//! identity.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::params::Params;
use super::so3;
use super::{Analytic, CatalogEntry, KnownRe};
use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::LieAlgebraSpec;

pub const ID: &str = "lagrange_top";

const MAX_ANGLE: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopParams {
    pub i: f64,
    pub i3: f64,
    pub m: f64,
    pub g: f64,
    pub l: f64,
}

impl TopParams {
    pub fn mgl(&self) -> f64 {
        self.m * self.g * self.l
    }

    /// Smallest `zeta^2` for which the slice Hessian is positive definite with `ip = diag(k, 1)`,
    /// or `None` when `k i3 + i3 - i <= 0`.
    pub fn threshold_zeta_sq(&self, k: f64) -> Option<f64> {
        let den = k * self.i3 + self.i3 - self.i;
        (den > 0.0).then(|| (1.0 + k).powi(2) * self.mgl() / den)
    }

    pub fn optimal_k(&self) -> f64 {
        (2.0 * self.i - self.i3) / self.i3
    }

    pub fn optimal_bound(&self) -> f64 {
        4.0 * self.mgl() * self.i / (self.i3 * self.i3)
    }
}

fn v3(q: &DVector<f64>) -> Vector3<f64> {
    Vector3::new(q[0], q[1], q[2])
}

fn dvec(v: Vector3<f64>) -> DVector<f64> {
    DVector::from_column_slice(v.as_slice())
}

pub fn system(p: TopParams) -> ChartedSystem {
    let inertia = Matrix3::from_diagonal(&Vector3::new(p.i, p.i, p.i3));
    let mgl = p.mgl();
    ChartedSystem::new(
        ID,
        3,
        LieAlgebraSpec::abelian(2),
        move |q| {
            let q = v3(q);
            let lam = so3::exp(&q);
            let j = so3::left_jacobian(&q);
            let m: Matrix3<f64> = j.transpose() * lam * inertia * lam.transpose() * j;
            DMatrix::from_column_slice(3, 3, m.as_slice())
        },
        move |q| {
            let lam = so3::exp(&v3(q));
            mgl * lam[(2, 2)]
        },
        |q| {
            let q = v3(q);
            let lam = so3::exp(&q);
            let jinv = so3::left_jacobian(&q)
                .try_inverse()
                .expect("left Jacobian invertible inside the chart");
            let left = jinv * Vector3::z();
            let right = -(jinv * lam * Vector3::z());
            DMatrix::from_columns(&[dvec(left), dvec(right)])
        },
    )
    .with_flow(|lam, t, q| {
        let rot = so3::rot_z(t * lam[0]) * so3::exp(&v3(q)) * so3::rot_z(-t * lam[1]);
        dvec(so3::log(&rot))
    })
    .with_domain(|q| v3(q).norm() < MAX_ANGLE)
}

pub fn build(given: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let p = Params::resolve(
        ID,
        given,
        &[
            ("i", 1.0),
            ("i3", 1.5),
            ("m", 1.0),
            ("g", 1.0),
            ("l", 1.0),
            ("zeta", 2.0),
            ("zeta_sq", f64::NAN),
            ("r", 0.0),
        ],
    )?;
    let top = TopParams {
        i: p.positive("i")?,
        i3: p.positive("i3")?,
        m: p.positive("m")?,
        g: p.get("g"),
        l: p.get("l"),
    };
    let zeta = if p.get("zeta_sq").is_nan() {
        p.get("zeta")
    } else if p.get("zeta_sq") >= 0.0 {
        p.get("zeta_sq").sqrt()
    } else {
        return Err(Error::InvalidParameter("`zeta_sq` must be non-negative".into()));
    };
    let r = p.get("r");
    let mut warnings = Vec::new();
    if top.i3 > 2.0 * top.i {
        warnings.push(format!(
            "i3 = {} exceeds 2 i = {}: the optimal inner-product parameter is not positive",
            top.i3,
            2.0 * top.i
        ));
    }
    Ok(CatalogEntry {
        id: ID.to_string(),
        system: system(top),
        known_re: vec![KnownRe {
            label: format!("sleeping top, zeta = {zeta}"),
            x: DVector::zeros(3),
            xi: DVector::from_vec(vec![zeta + r, r]),
        }],
        analytic: Some(Analytic::LagrangeTop(top)),
        residual_group_abelian: true,
        gmu_compact: true,
        default_ip: vec![1.0],
        warnings,
        params: p.into_map(),
    })
}
