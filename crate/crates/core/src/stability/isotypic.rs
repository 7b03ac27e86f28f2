//! Splitting `Sigma` into isotypic components of an abelian residual symmetry and
//! restricting a quadratic form to each of them.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QuadraticFormOnBasis;
use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::{AlgebraVector, Ambient, SubspaceBasis};
use crate::linalg::{self, RANK_TOL};
use crate::splitting::SplittingData;

/// Relative commutator size above which the actions are treated as non-commuting.
pub const COMMUTATOR_TOL: f64 = 1e-6;
/// Relative eigenvalue gap separating two components.
const CLUSTER_TOL: f64 = 1e-6;

/// A linear map on `T_x Q` coming from the residual symmetry.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearAction {
    /// Infinitesimal generator (skew with respect to the metric).
    Infinitesimal(DMatrix<f64>),
    /// Group element (orthogonal with respect to the metric).
    Element(DMatrix<f64>),
}

impl LinearAction {
    fn matrix(&self) -> &DMatrix<f64> {
        match self {
            LinearAction::Infinitesimal(m) | LinearAction::Element(m) => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsotypicOutcome {
    pub applicable: bool,
    pub reason: Option<String>,
    pub components: Vec<QuadraticFormOnBasis>,
    /// Largest cross-component entry relative to the largest entry of the form.
    pub cross_block_residual: f64,
    /// How far `Sigma` is from being invariant under the actions.
    pub invariance_residual: f64,
    pub commutator_residual: f64,
}

impl IsotypicOutcome {
    fn not_applicable(reason: String, invariance: f64, commutator: f64) -> Self {
        IsotypicOutcome {
            applicable: false,
            reason: Some(reason),
            components: Vec::new(),
            cross_block_residual: 0.0,
            invariance_residual: invariance,
            commutator_residual: commutator,
        }
    }
}

/// Isotypic blocks of `form` (given on the `Sigma` basis) for the linearized actions of
/// the given isotropy generators.
pub fn isotypic_subblocks(sys: &ChartedSystem, split: &SplittingData, form: &QuadraticFormOnBasis, generators: &[AlgebraVector]) -> Result<IsotypicOutcome> {
    let x = split.x();
    let actions = generators
        .iter()
        .map(|g| Ok(LinearAction::Infinitesimal(sys.linearized_isotropy_action(&x, g)?)))
        .collect::<Result<Vec<_>>>()?;
    isotypic_subblocks_with_actions(split, form, &actions)
}

/// As [`isotypic_subblocks`], with the actions on `T_x Q` supplied directly.
pub fn isotypic_subblocks_with_actions(split: &SplittingData, form: &QuadraticFormOnBasis, actions: &[LinearAction]) -> Result<IsotypicOutcome> {
    let b = &form.basis.vectors;
    let m = &split.metric;
    let k = b.ncols();
    if form.dim() != k {
        return Err(Error::dim("form on basis", k, form.dim()));
    }
    if k == 0 {
        return Ok(IsotypicOutcome {
            applicable: true,
            reason: None,
            components: Vec::new(),
            cross_block_residual: 0.0,
            invariance_residual: 0.0,
            commutator_residual: 0.0,
        });
    }
    // Metric-orthonormal basis u = b l of the same space.
    let gram = b.transpose() * m * b;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Precondition("basis is degenerate for the metric".into()))?;
    let l = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("basis is degenerate for the metric".into()))?;
    let u = b * &l;
    let form_u = l.transpose() * &form.matrix * &l;

    // Actions restricted to the space, in the orthonormal coordinates.
    let mut restricted = Vec::with_capacity(actions.len());
    let mut invariance = 0.0_f64;
    for act in actions {
        let a = act.matrix();
        if a.shape() != (m.nrows(), m.nrows()) {
            return Err(Error::dim("linear action", m.nrows(), a.nrows()));
        }
        let image = a * &u;
        let coords = u.transpose() * m * &image;
        let miss = &image - &u * &coords;
        let scale = linalg::max_abs(&image).max(f64::MIN_POSITIVE);
        invariance = invariance.max(linalg::max_abs(&miss) / scale);
        restricted.push((act, coords));
    }
    if invariance > 1e-5 {
        return Ok(IsotypicOutcome::not_applicable(
            format!("space is not invariant under the actions (residual {invariance:e})"),
            invariance,
            0.0,
        ));
    }
    let mut commutator = 0.0_f64;
    for (i, (_, a)) in restricted.iter().enumerate() {
        for (_, c) in restricted.iter().skip(i + 1) {
            let scale = (linalg::max_abs(a) * linalg::max_abs(c)).max(f64::MIN_POSITIVE);
            commutator = commutator.max(linalg::max_abs(&(a * c - c * a)) / scale);
        }
    }
    if commutator > COMMUTATOR_TOL {
        return Ok(IsotypicOutcome::not_applicable(
            "actions do not commute: non-abelian residual symmetry".into(),
            invariance,
            commutator,
        ));
    }

    // Symmetric operators whose joint eigenspaces are the isotypic components.
    let mut family: Vec<DMatrix<f64>> = Vec::new();
    for (i, (act, a)) in restricted.iter().enumerate() {
        match act {
            LinearAction::Element(_) => family.push((a + a.transpose()) * 0.5),
            LinearAction::Infinitesimal(_) => {
                for (act2, c) in restricted.iter().skip(i) {
                    if matches!(act2, LinearAction::Infinitesimal(_)) {
                        family.push(a * c + c * a);
                    }
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x15_07_79);
    let mut combo = DMatrix::zeros(k, k);
    for f in &family {
        let s = linalg::max_abs(f);
        if s > 0.0 {
            combo += f * (rng.gen_range(0.5..1.5) / s);
        }
    }
    let combo = (&combo + combo.transpose()) * 0.5;
    let (eigs, vecs) = linalg::sym_eigen(&combo);
    let spread = eigs.iter().fold(0.0_f64, |a, e| a.max(e.abs())).max(1.0);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, e) in eigs.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (e - eigs[*g.last().unwrap()]).abs() <= CLUSTER_TOL * spread => g.push(i),
            _ => groups.push(vec![i]),
        }
    }

    let fscale = linalg::max_abs(&form_u).max(f64::MIN_POSITIVE);
    let blocks: Vec<DMatrix<f64>> = groups
        .iter()
        .map(|g| DMatrix::from_fn(k, g.len(), |r, c| vecs[(r, g[c])]))
        .collect();
    let mut cross = 0.0_f64;
    for (i, ei) in blocks.iter().enumerate() {
        for ej in blocks.iter().skip(i + 1) {
            cross = cross.max(linalg::max_abs(&(ei.transpose() * &form_u * ej)) / fscale);
        }
    }
    let components = blocks
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let sub = e.transpose() * &form_u * e;
            let sub = (&sub + sub.transpose()) * 0.5;
            let basis = SubspaceBasis::new(Ambient::Tangent, &u * e, RANK_TOL)?;
            Ok(QuadraticFormOnBasis::new(format!("{}_isotypic_{i}", form.label), basis, sub))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IsotypicOutcome {
        applicable: true,
        reason: None,
        components,
        cross_block_residual: cross,
        invariance_residual: invariance,
        commutator_residual: commutator,
    })
}
