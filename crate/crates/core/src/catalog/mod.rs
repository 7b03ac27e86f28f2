//! Built-in models with known relative equilibria.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;

pub mod lagrange_top;
mod params;
pub mod rigid_body;
pub mod so3;
pub mod spherical_pendulum;
pub mod synthetic;

pub use lagrange_top::TopParams;
pub use rigid_body::RigidBodyParams;
pub use spherical_pendulum::PendulumParams;
pub use synthetic::SyntheticParams;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownRe {
    pub label: String,
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
}

/// Closed-form data kept alongside a model for cross-checks.
#[derive(Debug, Clone, PartialEq)]
pub enum Analytic {
    LagrangeTop(TopParams),
    SphericalPendulum(PendulumParams),
    RigidBody(RigidBodyParams),
    Synthetic(SyntheticParams),
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub id: String,
    pub system: ChartedSystem,
    /// The first entry is the relative equilibrium selected by the parameters.
    pub known_re: Vec<KnownRe>,
    pub analytic: Option<Analytic>,
    pub residual_group_abelian: bool,
    pub gmu_compact: bool,
    pub default_ip: Vec<f64>,
    pub warnings: Vec<String>,
    /// Resolved parameters including defaults.
    pub params: BTreeMap<String, f64>,
}

impl CatalogEntry {
    pub fn selected(&self) -> &KnownRe {
        &self.known_re[0]
    }
}

pub const MODEL_IDS: [&str; 4] = [
    lagrange_top::ID,
    spherical_pendulum::ID,
    synthetic::ID,
    rigid_body::ID,
];

pub fn build(id: &str, params: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    match id {
        lagrange_top::ID => lagrange_top::build(params),
        spherical_pendulum::ID => spherical_pendulum::build(params),
        synthetic::ID => synthetic::build(params),
        rigid_body::ID => rigid_body::build(params),
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Convenience for building from a slice of `(name, value)` pairs.
pub fn build_with(id: &str, params: &[(&str, f64)]) -> Result<CatalogEntry> {
    let map = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    build(id, &map)
}

