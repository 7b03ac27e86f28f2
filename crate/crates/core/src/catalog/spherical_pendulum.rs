//! Spherical pendulum charted by stereographic projection from the upright point, with
//! rotations about the vertical.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, DVector};

use super::params::Params;
use super::{Analytic, CatalogEntry, KnownRe};
use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::LieAlgebraSpec;

pub const ID: &str = "spherical_pendulum";

/// Largest stereographic radius accepted by the chart (polar angle about 0.987 pi).
pub const MAX_RADIUS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams {
    pub m: f64,
    pub g: f64,
    pub l: f64,
}

impl PendulumParams {
    /// Spin rate of the conical relative equilibrium at polar angle `theta0` from the
    /// hanging position.
    pub fn conical_rate(&self, theta0: f64) -> f64 {
        (self.g / (self.l * theta0.cos())).sqrt()
    }
}

/// Chart point at polar angle `theta` (from the hanging position) and azimuth `phi`.
pub fn chart_point(theta: f64, phi: f64) -> Result<DVector<f64>> {
    if !(0.0..PI).contains(&theta) {
        return Err(Error::ChartDomain(format!(
            "polar angle {theta} is at or beyond the upright pole"
        )));
    }
    let rho = (0.5 * theta).tan();
    if rho >= MAX_RADIUS {
        return Err(Error::ChartDomain(format!("polar angle {theta} too close to the upright pole")));
    }
    Ok(DVector::from_vec(vec![rho * phi.cos(), rho * phi.sin()]))
}

pub fn system(p: PendulumParams) -> ChartedSystem {
    let PendulumParams { m, g, l } = p;
    ChartedSystem::new(
        ID,
        2,
        LieAlgebraSpec::abelian(1),
        move |q| {
            let r2 = q.norm_squared();
            DMatrix::identity(2, 2) * (m * l * l * 4.0 / ((1.0 + r2) * (1.0 + r2)))
        },
        move |q| {
            let r2 = q.norm_squared();
            m * g * l * (r2 - 1.0) / (r2 + 1.0)
        },
        |q| DMatrix::from_column_slice(2, 1, &[-q[1], q[0]]),
    )
    .with_flow(|lam, t, q| {
        let (s, c) = (t * lam[0]).sin_cos();
        DVector::from_vec(vec![c * q[0] - s * q[1], s * q[0] + c * q[1]])
    })
    .with_domain(|q| q.norm() < MAX_RADIUS)
}

pub fn build(given: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let p = Params::resolve(
        ID,
        given,
        &[
            ("m", 1.0),
            ("g", 1.0),
            ("l", 1.0),
            ("theta0", std::f64::consts::FRAC_PI_4),
            ("phi0", 0.0),
            ("omega", 0.0),
        ],
    )?;
    let pp = PendulumParams {
        m: p.positive("m")?,
        g: p.positive("g")?,
        l: p.positive("l")?,
    };
    let theta0 = p.get("theta0");
    let x = chart_point(theta0, p.get("phi0"))?;
    let hanging = KnownRe {
        label: "hanging equilibrium".into(),
        x: DVector::zeros(2),
        xi: DVector::from_vec(vec![p.get("omega")]),
    };
    let mut known_re = Vec::new();
    if theta0 == 0.0 {
        known_re.push(hanging);
    } else if theta0 < FRAC_PI_2 {
        known_re.push(KnownRe {
            label: format!("conical, theta0 = {theta0}"),
            x,
            xi: DVector::from_vec(vec![pp.conical_rate(theta0)]),
        });
        known_re.push(hanging);
    } else {
        return Err(Error::InvalidParameter(format!(
            "no conical relative equilibrium at theta0 = {theta0}"
        )));
    }
    Ok(CatalogEntry {
        id: ID.to_string(),
        system: system(pp),
        known_re,
        analytic: Some(Analytic::SphericalPendulum(pp)),
        residual_group_abelian: true,
        gmu_compact: true,
        default_ip: vec![1.0],
        warnings: Vec::new(),
        params: p.into_map(),
    })
}
