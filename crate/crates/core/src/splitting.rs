//! Algebra and tangent-space decompositions at a relative equilibrium.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::{matrix_rows, Ambient, AlgebraVector, SubspaceBasis};
use crate::linalg::{self, RANK_TOL};
use crate::mechanics;

/// Principal-angle threshold for declaring two subspaces equal.
pub const SUBSPACE_ANGLE_TOL: f64 = 1e-6;
/// Relative rank tolerance for matrices assembled from first finite differences.
pub const FD_RANK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingOptions {
    pub rank_tol: f64,
    /// Seed for a randomized initial complement of `h + p` before `II`-orthogonalization.
    pub complement_seed: Option<u64>,
    /// Skip the relative-equilibrium residual check.
    pub skip_re_check: bool,
}

impl Default for SplittingOptions {
    fn default() -> Self {
        SplittingOptions {
            rank_tol: RANK_TOL,
            complement_seed: None,
            skip_re_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplittingData {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub mu: Vec<f64>,
    pub xi_perp: Vec<f64>,
    pub h: SubspaceBasis,
    pub gmu: SubspaceBasis,
    pub gpx: SubspaceBasis,
    pub p: SubspaceBasis,
    pub t: SubspaceBasis,
    pub r: SubspaceBasis,
    /// Metric-orthonormal basis of the slice.
    pub slice: SubspaceBasis,
    pub qmu: SubspaceBasis,
    /// Columns: images of the `qmu` basis first, then the slice basis.
    pub sigma: SubspaceBasis,
    pub sigma_rig: SubspaceBasis,
    #[serde(with = "matrix_rows")]
    pub inner_product: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub locked_inertia: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub metric: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub generators: DMatrix<f64>,
    pub residuals: BTreeMap<String, f64>,
}

impl SplittingData {
    pub fn x(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.x)
    }
    pub fn xi(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.xi)
    }
    pub fn mu(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.mu)
    }
    pub fn xi_perp(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.xi_perp)
    }

    /// `n - d + dim h`, which equals the slice dimension.
    pub fn dim_check(&self) -> usize {
        self.x.len() + self.h.dim() - self.h.ambient_dim
    }

    /// Matrix of `II` restricted to `r` in the `r` basis.
    pub fn ii_r(&self) -> DMatrix<f64> {
        let r = &self.r.vectors;
        r.transpose() * &self.locked_inertia * r
    }

    /// Coordinates of a covector restricted to the `r` basis.
    pub fn restrict_to_r(&self, nu: &DVector<f64>) -> DVector<f64> {
        self.r.vectors.transpose() * nu
    }

    /// `II_r^{-1}` applied to a covector (through its restriction to `r`).
    pub fn ii_r_inverse(&self, nu: &DVector<f64>) -> Result<AlgebraVector> {
        if self.r.is_empty() {
            return Ok(DVector::zeros(self.r.ambient_dim));
        }
        let rhs = DMatrix::from_column_slice(self.r.dim(), 1, self.restrict_to_r(nu).as_slice());
        let c = linalg::solve_spd(&self.ii_r(), &rhs)
            .ok_or_else(|| Error::Inconsistency("locked inertia singular on r".into()))?;
        Ok(&self.r.vectors * c.column(0))
    }

    /// Component in `r` of an algebra vector with respect to `g = h + r`.
    pub fn r_component(&self, v: &AlgebraVector) -> Result<AlgebraVector> {
        let d = v.len();
        let hr = linalg::hstack(&[&self.h.vectors, &self.r.vectors], d);
        let c = hr
            .lu()
            .solve(v)
            .ok_or_else(|| Error::Inconsistency("h and r are not complementary".into()))?;
        let k = self.h.dim();
        Ok(&self.r.vectors * c.rows(k, self.r.dim()))
    }

    /// Metric-orthogonal projection of a tangent vector onto the slice.
    pub fn slice_coords(&self, v: &DVector<f64>) -> DVector<f64> {
        self.slice.vectors.transpose() * &self.metric * v
    }
}

/// Orbit data at an arbitrary point: `h = ker II`, a Euclidean complement `r`, and a
/// metric-orthonormal slice basis.
#[derive(Debug, Clone)]
pub struct OrbitSplitting {
    pub h: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub slice: DMatrix<f64>,
}

pub fn orbit_splitting(sys: &ChartedSystem, x: &DVector<f64>, rank_tol: f64) -> Result<OrbitSplitting> {
    let d = sys.group_dim();
    let ii = mechanics::locked_inertia(sys, x)?.matrix;
    let h = linalg::null_space(&ii, rank_tol);
    let r = linalg::orthogonal_complement(&h, d);
    let slice = slice_basis(sys, x, rank_tol)?;
    Ok(OrbitSplitting { h, r, slice })
}

fn slice_basis(sys: &ChartedSystem, x: &DVector<f64>, rank_tol: f64) -> Result<DMatrix<f64>> {
    let m = sys.metric(x)?;
    let a = sys.generators(x)?;
    let raw = linalg::null_space(&(a.transpose() * &m), rank_tol.max(1e-12));
    linalg::orthonormalize_with(&raw, &m)
        .ok_or_else(|| Error::Precondition("metric not positive definite".into()))
}

fn basis(ambient: Ambient, m: DMatrix<f64>) -> Result<SubspaceBasis> {
    SubspaceBasis::new(ambient, m, RANK_TOL)
}

/// Builds every splitting used by the stability tests at the relative equilibrium `(x, xi)`
/// with the inner product `ip` on the algebra.
pub fn build_splitting(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector, ip: &DMatrix<f64>, opts: &SplittingOptions) -> Result<SplittingData> {
    let d = sys.group_dim();
    let n = sys.dim();
    if xi.len() != d {
        return Err(Error::dim("velocity", d, xi.len()));
    }
    if ip.shape() != (d, d) {
        return Err(Error::dim("inner product", d, ip.nrows()));
    }
    let mut residuals = BTreeMap::new();
    if !opts.skip_re_check {
        let re = mechanics::require_relative_equilibrium(sys, x, xi)?;
        residuals.insert("re_residual".to_string(), re.norm);
    }
    let lie = sys.lie();
    let m = sys.metric(x)?;
    let a = sys.generators(x)?;
    let ii = a.transpose() * &m * &a;
    let ii = (&ii + ii.transpose()) * 0.5;

    let h = linalg::null_space(&ii, opts.rank_tol);
    let mu = &ii * xi;
    let gmu = lie.momentum_isotropy_algebra(&mu, opts.rank_tol)?.vectors;

    let cscale = lie.entries().iter().fold(0.0_f64, |s, e| s.max(e.3.abs()));
    let iso_res = lie.coadjoint(xi, &mu)?.norm();
    if iso_res > 1e-8 * cscale * xi.norm() * mu.norm() + 1e-14 {
        return Err(Error::VelocityNotInIsotropy(iso_res));
    }
    residuals.insert("xi_isotropy".to_string(), iso_res);

    let gpx = linalg::intersection(&h, &gmu, opts.rank_tol);

    // p: ip-orthogonal complement of gpx inside gmu, ip-orthonormal.
    let p = if gpx.ncols() == 0 {
        gmu.clone()
    } else {
        let c = linalg::null_space(&(gpx.transpose() * ip * &gmu), opts.rank_tol);
        &gmu * c
    };
    let p = linalg::orthonormalize_with(&p, ip)
        .ok_or_else(|| Error::InvalidInnerProduct("not positive definite on p".into()))?;

    // t: complement of h + p, II-orthogonal to p.
    let hp = linalg::hstack(&[&h, &p], d);
    let mut t0 = linalg::orthogonal_complement(&hp, d);
    if let Some(seed) = opts.complement_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mix = DMatrix::from_fn(hp.ncols(), t0.ncols(), |_, _| rng.gen_range(-1.0..1.0));
        let rot = DMatrix::from_fn(t0.ncols(), t0.ncols(), |i, j| {
            rng.gen_range(-0.5..0.5) + if i == j { 1.5 } else { 0.0 }
        });
        t0 = &t0 * rot + &hp * mix;
    }
    let t = if p.ncols() == 0 || t0.ncols() == 0 {
        t0
    } else {
        let pip = p.transpose() * &ii * &p;
        let coeff = linalg::solve_spd(&pip, &(p.transpose() * &ii * &t0))
            .ok_or_else(|| Error::Inconsistency("II singular on p".into()))?;
        &t0 - &p * coeff
    };
    let pt = if t.ncols() * p.ncols() == 0 {
        0.0
    } else {
        (p.transpose() * &ii * &t).amax()
    };
    residuals.insert("p_t_ii_orthogonality".to_string(), pt);
    let r = linalg::hstack(&[&p, &t], d);

    let xi_perp = if p.ncols() == 0 {
        DVector::zeros(d)
    } else {
        // p is ip-orthonormal, so the projection is p p^T G xi.
        &p * (p.transpose() * ip * xi)
    };

    let slice = slice_basis(sys, x, opts.rank_tol)?;

    let qmu = if h.ncols() == 0 || t.ncols() == 0 {
        t.clone()
    } else {
        let mut k = DMatrix::zeros(h.ncols(), t.ncols());
        for j in 0..t.ncols() {
            let ad = lie.coadjoint(&t.column(j).into_owned(), &mu)?;
            for i in 0..h.ncols() {
                k[(i, j)] = ad.dot(&h.column(i));
            }
        }
        let c = linalg::null_space(&k, opts.rank_tol);
        &t * c
    };
    let sigma_rig = &a * &qmu;
    let sigma = linalg::hstack(&[&sigma_rig, &slice], n);

    let orbit = linalg::range_basis(&(&a * &gmu), opts.rank_tol);
    if sigma.ncols() > 0 && orbit.ncols() > 0 {
        let overlap = linalg::intersection(&sigma, &orbit, 1e-8);
        if overlap.ncols() > 0 {
            return Err(Error::Inconsistency("Sigma meets the g_mu orbit directions".into()));
        }
    }

    Ok(SplittingData {
        x: x.iter().copied().collect(),
        xi: xi.iter().copied().collect(),
        mu: mu.iter().copied().collect(),
        xi_perp: xi_perp.iter().copied().collect(),
        h: basis(Ambient::Algebra, h)?,
        gmu: basis(Ambient::Algebra, gmu)?,
        gpx: basis(Ambient::Algebra, gpx)?,
        p: basis(Ambient::Algebra, p)?,
        t: basis(Ambient::Algebra, t)?,
        r: basis(Ambient::Algebra, r)?,
        slice: basis(Ambient::Tangent, slice)?,
        qmu: basis(Ambient::Algebra, qmu)?,
        sigma: basis(Ambient::Tangent, sigma)?,
        sigma_rig: basis(Ambient::Tangent, sigma_rig)?,
        inner_product: ip.clone(),
        locked_inertia: ii,
        metric: m,
        generators: a,
        residuals,
    })
}

/// Pairs `(lambda, b)` in `qmu + S` whose tangent images span `Sigma_int`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WintData {
    /// Algebra parts `lambda`, one column per pair.
    #[serde(with = "matrix_rows")]
    pub lambdas: DMatrix<f64>,
    /// Slice parts `b`, one column per pair.
    #[serde(with = "matrix_rows")]
    pub slice_parts: DMatrix<f64>,
    /// Columns `lambda_Q(x) + b`.
    pub sigma_int: SubspaceBasis,
    /// Largest `|(DII . v)(xi_perp, h_i)|` over the `Sigma_int` basis.
    pub h_pairing_residual: f64,
}

impl WintData {
    pub fn dim(&self) -> usize {
        self.sigma_int.dim()
    }
}

/// Pairings `(DII . v)(xi_perp, e)` for `e` in the columns of `targets`.
pub fn dii_pairings(sys: &ChartedSystem, split: &SplittingData, v: &DVector<f64>, targets: &DMatrix<f64>) -> Result<DVector<f64>> {
    let dii = mechanics::d_locked_inertia(sys, &split.x(), v)?;
    let w = dii.partial(&split.xi_perp());
    Ok(targets.transpose() * w)
}

/// Solves for `w_int`: pairs `(lambda, b)` with `(DII . (lambda_Q + b))(xi_perp)` annihilating `t`.
pub fn build_wint(sys: &ChartedSystem, split: &SplittingData) -> Result<WintData> {
    let n = sys.dim();
    let d = sys.group_dim();
    let a = &split.generators;
    let q = split.qmu.dim();
    let s = split.slice.dim();
    let mut cols = Vec::with_capacity(q + s);
    for i in 0..q {
        cols.push(a * split.qmu.vector(i));
    }
    for j in 0..s {
        cols.push(split.slice.vector(j));
    }
    let t_orth = linalg::range_basis(&split.t.vectors, RANK_TOL);
    let mut w = DMatrix::zeros(t_orth.ncols(), q + s);
    for (c, v) in cols.iter().enumerate() {
        let vn = v.norm();
        let pairing = dii_pairings(sys, split, &(v / vn), &t_orth)?;
        w.set_column(c, &pairing);
    }
    let scale = linalg::norm2(&split.locked_inertia).max(1.0) * split.xi_perp().norm();
    let smax = linalg::norm2(&w);
    let coeffs = linalg::null_space_abs(&w, (FD_RANK_TOL * smax).max(1e-7 * scale));
    let k = coeffs.ncols();
    let mut lambdas = DMatrix::zeros(d, k);
    let mut parts = DMatrix::zeros(n, k);
    let mut images = DMatrix::zeros(n, k);
    for j in 0..k {
        let c = coeffs.column(j);
        let mut lam = DVector::zeros(d);
        for i in 0..q {
            lam += split.qmu.vector(i) * (c[i] / cols[i].norm());
        }
        let mut b = DVector::zeros(n);
        for i in 0..s {
            b += split.slice.vector(i) * (c[q + i] / cols[q + i].norm());
        }
        images.set_column(j, &(a * &lam + &b));
        lambdas.set_column(j, &lam);
        parts.set_column(j, &b);
    }
    let mut h_res = 0.0_f64;
    for j in 0..k {
        let v = images.column(j).into_owned();
        let pairing = dii_pairings(sys, split, &v, &split.h.vectors)?;
        h_res = h_res.max(pairing.amax());
    }
    Ok(WintData {
        lambdas,
        slice_parts: parts,
        sigma_int: SubspaceBasis::new(Ambient::Tangent, images, RANK_TOL)?,
        h_pairing_residual: h_res,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaDecomposition {
    pub applicable: bool,
    pub dim_sigma: usize,
    pub dim_rig: usize,
    pub dim_int: usize,
    pub intersection_dim: usize,
    pub holds: bool,
}

/// Checks `Sigma = Sigma_rig + Sigma_int` (direct). Not applicable when the Arnold form
/// is degenerate.
pub fn check_sigma_decomposition(split: &SplittingData, wint: &WintData, arnold_nondegenerate: bool) -> SigmaDecomposition {
    let inter = linalg::intersection(&split.sigma_rig.vectors, &wint.sigma_int.vectors, 1e-8).ncols();
    let dims_ok = split.sigma_rig.dim() + wint.dim() == split.sigma.dim();
    SigmaDecomposition {
        applicable: arnold_nondegenerate,
        dim_sigma: split.sigma.dim(),
        dim_rig: split.sigma_rig.dim(),
        dim_int: wint.dim(),
        intersection_dim: inter,
        holds: arnold_nondegenerate && inter == 0 && dims_ok,
    }
}
