//! Stability analysis of relative equilibria of simple mechanical systems with symmetry,
//! including points with nontrivial isotropy.
//!
//! A model is a [`geometry::ChartedSystem`]: a chart, a kinetic-energy metric, a potential
//! and the infinitesimal generators of a Lie algebra action. At a relative equilibrium
//! `(x, xi)` the [`splitting`] module builds the algebra and tangent-space decompositions,
//! and [`stability`] runs the reduced energy-momentum test, the block test and an
//! independent phase-space oracle.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod fd;
pub mod geometry;
pub mod identities;
pub mod lie_algebra;
pub mod linalg;
pub mod mechanics;
pub mod splitting;
pub mod stability;

pub use error::{Error, Result};
pub use geometry::ChartedSystem;
pub use lie_algebra::{AlgebraVector, CoalgebraVector, LieAlgebraSpec, SubspaceBasis};
pub use splitting::{build_splitting, SplittingData, SplittingOptions};
pub use stability::{StabilityOptions, StabilityReport, Verdict};
