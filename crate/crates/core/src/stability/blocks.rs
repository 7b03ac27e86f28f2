//! Block-diagonal form of the symplectic matrix and Hessian on the symplectic normal space,
//! and the corollary test built on it.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::arnold::{arnold_form, ArnoldForm};
use super::hessian::restricted_form_on;
use super::oracle::phase_hessian;
use super::{QuadraticFormOnBasis, Route, Sign, StabilityOptions, StabilityReport, Verdict};
use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::ChartedSystem;
use crate::lie_algebra::{matrix_rows, AlgebraVector};
use crate::linalg;
use crate::mechanics;
use crate::splitting::{self, check_sigma_decomposition, SplittingData, WintData};

/// Matrix of `C(v)`: entry `(i, j)` is `<< nabla_{(r_j)_Q} vbar, s_i >>` for the `r` basis
/// `r_j` and the slice basis `s_i`.
pub fn c_operator(sys: &ChartedSystem, split: &SplittingData, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let x = split.x();
    let mut out = DMatrix::zeros(split.slice.dim(), split.r.dim());
    for j in 0..split.r.dim() {
        let d = sys.tube_extension_derivative(&x, v, &split.r.vector(j))?;
        out.set_column(j, &split.slice_coords(&d));
    }
    Ok(out)
}

/// `<< C(a)(xi_perp), . >>` on the slice basis.
fn c_applied(sys: &ChartedSystem, split: &SplittingData, a: &DVector<f64>) -> Result<DVector<f64>> {
    let d = sys.tube_extension_derivative(&split.x(), a, &split.xi_perp())?;
    Ok(split.slice_coords(&d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockOmega {
    #[serde(with = "matrix_rows")]
    pub xi_block: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub psi: DMatrix<f64>,
    #[serde(with = "matrix_rows")]
    pub s_mu: DMatrix<f64>,
    /// Full matrix with column order `qmu`, `Sigma_int`, `S*`.
    #[serde(with = "matrix_rows")]
    pub full: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockForms {
    pub omega: BlockOmega,
    pub arnold: ArnoldForm,
    pub sigma_int: QuadraticFormOnBasis,
    /// Metric on `S*` in the basis dual to the slice parts of `Sigma_int`.
    pub sstar: DMatrix<f64>,
    /// `diag(Ar, sigma_int, sstar)`.
    pub hessian: DMatrix<f64>,
    pub wint: WintData,
    /// Phase-space vectors of the parameterization, one column per basis element.
    pub kappa_basis: DMatrix<f64>,
    pub residuals: BTreeMap<String, f64>,
}

impl BlockForms {
    /// Largest off-diagonal Hessian block relative to the diagonal blocks.
    pub fn off_block_ratio(&self) -> f64 {
        self.residuals.get("hessian_off_block_ratio").copied().unwrap_or(0.0)
    }
}

/// Phase-space vector `(dq, dp)` of `kappa(lambda, a, gamma)` in chart coordinates, where
/// `gamma` is given by its values on the slice basis.
pub fn kappa_phase_vector(sys: &ChartedSystem, split: &SplittingData, lambda: &AlgebraVector, a: &DVector<f64>, gamma: &DVector<f64>) -> Result<DVector<f64>> {
    let n = sys.dim();
    let x = split.x();
    let lie = sys.lie();
    let xi_perp = split.xi_perp();
    let mu = split.mu();
    let gens = &split.generators;
    let m = &split.metric;
    let dq = gens * lambda + a;

    let along_orbit = mechanics::d_locked_inertia(sys, &x, &(gens * &xi_perp))?;
    let along_a = mechanics::d_locked_inertia(sys, &x, a)?;
    let nu = along_orbit.partial(lambda) + lie.coadjoint(lambda, &mu)? - along_a.partial(&xi_perp);
    let rho = split.ii_r_inverse(&(nu * 0.5))?;
    let horizontal = m * (gens * rho);

    let c = if a.norm() == 0.0 {
        DVector::zeros(split.slice.dim())
    } else {
        c_applied(sys, split, a)?
    };
    let mut alpha = gamma + c;
    for i in 0..split.slice.dim() {
        let s = split.slice.vector(i);
        let dii = mechanics::d_locked_inertia(sys, &x, &s)?;
        alpha[i] -= 0.5 * dii.eval(&xi_perp, lambda);
    }
    let vertical = horizontal + m * (&split.slice.vectors * alpha);

    let p = m * (gens * split.xi());
    let gamma_sym = sys.christoffel(&x)?;
    let mut dp = vertical;
    for k in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gamma_sym.get(i, k, j) * dq[i] * p[j];
            }
        }
        dp[k] += s;
    }
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&dq);
    out.rows_mut(n, n).copy_from(&dp);
    Ok(out)
}

fn canonical_form(n: usize) -> DMatrix<f64> {
    // omega((dq1, dp1), (dq2, dp2)) = <dp2, dq1> - <dp1, dq2>
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// Assembles `Omega` and the Hessian blocks in the parameterization by `qmu`, `Sigma_int`
/// and `S*`, and checks them against the full phase-space Hessian and canonical form.
pub fn block_forms(sys: &ChartedSystem, split: &SplittingData, opts: &StabilityOptions) -> Result<BlockForms> {
    let lie = sys.lie();
    let mu = split.mu();
    let x = split.x();
    let n = sys.dim();
    let arnold = arnold_form(sys, split)?;
    if !arnold.nondegenerate(opts.definiteness_rel) {
        return Err(Error::Precondition("Arnold form is degenerate or not symmetric".into()));
    }
    let wint = splitting::build_wint(sys, split)?;
    if wint.dim() != split.slice.dim() {
        return Err(Error::Inconsistency(format!(
            "Sigma_int has dimension {} but the slice has dimension {}",
            wint.dim(),
            split.slice.dim()
        )));
    }
    let dec = check_sigma_decomposition(split, &wint, true);
    if !dec.holds {
        return Err(Error::Inconsistency("Sigma is not the direct sum of Sigma_rig and Sigma_int".into()));
    }

    let q = split.qmu.dim();
    let k = wint.dim();
    let qb: Vec<AlgebraVector> = split.qmu.iter().collect();
    let lam_a: Vec<AlgebraVector> = (0..k).map(|j| wint.lambdas.column(j).into_owned()).collect();
    let a_parts: Vec<DVector<f64>> = (0..k).map(|j| wint.slice_parts.column(j).into_owned()).collect();
    let pair = |u: &AlgebraVector, v: &AlgebraVector| -> Result<f64> { Ok(mu.dot(&lie.bracket(u, v)?)) };

    let mut xi_block = DMatrix::zeros(q, q);
    for i in 0..q {
        for j in 0..q {
            xi_block[(i, j)] = -pair(&qb[i], &qb[j])?;
        }
    }
    let mut psi = DMatrix::zeros(q, k);
    for i in 0..q {
        for j in 0..k {
            psi[(i, j)] = pair(&qb[i], &lam_a[j])?;
        }
    }
    // slice coordinates of the a-parts and of C(a)(xi_perp)
    let a_coords = DMatrix::from_fn(split.slice.dim(), k, |i, j| split.slice_coords(&a_parts[j])[i]);
    let c_vals: Vec<DVector<f64>> = a_parts.iter().map(|a| c_applied(sys, split, a)).collect::<Result<_>>()?;
    let mut s_mu = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            let cj_ai = c_vals[j].dot(&a_coords.column(i));
            let ci_aj = c_vals[i].dot(&a_coords.column(j));
            s_mu[(i, j)] = -pair(&lam_a[i], &lam_a[j])? + cj_ai - ci_aj;
        }
    }
    let dim = q + 2 * k;
    let mut full = DMatrix::zeros(dim, dim);
    full.view_mut((0, 0), (q, q)).copy_from(&xi_block);
    full.view_mut((0, q), (q, k)).copy_from(&(-&psi));
    full.view_mut((q, 0), (k, q)).copy_from(&psi.transpose());
    full.view_mut((q, q), (k, k)).copy_from(&s_mu);
    for i in 0..k {
        full[(q + i, q + k + i)] = 1.0;
        full[(q + k + i, q + i)] = -1.0;
    }
    let omega = BlockOmega {
        xi_block,
        psi,
        s_mu,
        full,
    };

    // Hessian blocks.
    let int_form = restricted_form_on(sys, split, &wint.sigma_int.vectors)?;
    let sigma_int = QuadraticFormOnBasis::new("sigma_int_hessian", wint.sigma_int.clone(), int_form);
    let a_inv = a_coords
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Inconsistency("slice parts of Sigma_int are dependent".into()))?;
    let sstar = &a_inv * a_inv.transpose();
    let mut hessian = DMatrix::zeros(dim, dim);
    hessian.view_mut((0, 0), (q, q)).copy_from(&arnold.form.matrix);
    hessian.view_mut((q, q), (k, k)).copy_from(&sigma_int.matrix);
    hessian.view_mut((q + k, q + k), (k, k)).copy_from(&sstar);

    let mut residuals = BTreeMap::new();
    let diag_scale = linalg::max_abs(&hessian).max(f64::MIN_POSITIVE);

    // Configuration-space route: the full restricted form on Sigma_rig + Sigma_int.
    let rig_int = linalg::hstack(&[&split.sigma_rig.vectors, &wint.sigma_int.vectors], n);
    let config_form = restricted_form_on(sys, split, &rig_int)?;
    let config_off = if q * k == 0 { 0.0 } else { linalg::max_abs(&config_form.view((0, q), (q, k)).into_owned()) };
    let arnold_match = if q == 0 {
        0.0
    } else {
        linalg::max_abs(&(config_form.view((0, 0), (q, q)).into_owned() - &arnold.form.matrix))
    };
    residuals.insert("arnold_vs_hessian".into(), arnold_match / diag_scale);

    // Phase-space route: evaluate the Hamiltonian Hessian and canonical form on the
    // images of the basis.
    let mut kappa = DMatrix::zeros(2 * n, dim);
    let zero_alg = DVector::zeros(sys.group_dim());
    let zero_tan = DVector::zeros(n);
    let zero_s = DVector::zeros(split.slice.dim());
    for i in 0..q {
        kappa.set_column(i, &kappa_phase_vector(sys, split, &qb[i], &zero_tan, &zero_s)?);
    }
    for j in 0..k {
        kappa.set_column(q + j, &kappa_phase_vector(sys, split, &lam_a[j], &a_parts[j], &zero_s)?);
    }
    for j in 0..k {
        let gamma = a_inv.transpose().column(j).into_owned();
        kappa.set_column(q + k + j, &kappa_phase_vector(sys, split, &zero_alg, &zero_tan, &gamma)?);
    }
    let p = split.metric.clone() * (&split.generators * split.xi());
    let phase = phase_hessian(sys, &x, &p, &split.xi_perp())?;
    let phase_blocks = kappa.transpose() * &phase * &kappa;
    let mut phase_off = 0.0_f64;
    let ranges = [(0, q), (q, k), (q + k, k)];
    for (bi, &(r0, rl)) in ranges.iter().enumerate() {
        for (bj, &(c0, cl)) in ranges.iter().enumerate() {
            if bi != bj && rl * cl > 0 {
                phase_off = phase_off.max(linalg::max_abs(&phase_blocks.view((r0, c0), (rl, cl)).into_owned()));
            }
        }
    }
    let phase_diag = {
        let mut d = phase_blocks.clone();
        for (bi, &(r0, rl)) in ranges.iter().enumerate() {
            for (bj, &(c0, cl)) in ranges.iter().enumerate() {
                if bi != bj && rl * cl > 0 {
                    d.view_mut((r0, c0), (rl, cl)).fill(0.0);
                }
            }
        }
        linalg::max_abs(&(d - &hessian))
    };
    let omega_phase = kappa.transpose() * canonical_form(n) * &kappa;
    let omega_scale = linalg::max_abs(&omega.full).max(f64::MIN_POSITIVE);
    let dj = super::oracle::momentum_jacobian(sys, &x, &p)?;
    let in_ker = linalg::max_abs(&(dj * &kappa)) / (linalg::max_abs(&kappa) * linalg::norm2(&split.generators)).max(f64::MIN_POSITIVE);

    residuals.insert("hessian_off_block_ratio".into(), config_off.max(phase_off) / diag_scale);
    residuals.insert("hessian_off_block_config".into(), config_off / diag_scale);
    residuals.insert("hessian_off_block_phase".into(), phase_off / diag_scale);
    residuals.insert("hessian_diag_phase".into(), phase_diag / diag_scale);
    residuals.insert("omega_antisymmetry".into(), linalg::max_abs(&(&omega.full + omega.full.transpose())));
    residuals.insert("omega_phase".into(), linalg::max_abs(&(&omega_phase - &omega.full)) / omega_scale);
    residuals.insert("kappa_in_ker_dj".into(), in_ker);
    residuals.insert("wint_h_pairing".into(), wint.h_pairing_residual);
    residuals.insert("arnold_asymmetry".into(), arnold.asymmetry);

    Ok(BlockForms {
        omega,
        arnold,
        sigma_int,
        sstar,
        hessian,
        wint,
        kappa_basis: kappa,
        residuals,
    })
}

/// Stability test from the block-diagonal Hessian: positive definiteness of the Arnold
/// form and of the internal block when the slice is nontrivial, definiteness of the
/// Arnold form otherwise.
pub fn block_corollary_test(sys: &ChartedSystem, split: &SplittingData, opts: &StabilityOptions) -> Result<StabilityReport> {
    let arnold = arnold_form(sys, split)?;
    let mut report = StabilityReport::new(Verdict::NotApplicable, Route::BlockCorollary, split, opts);
    report.block_spectra.insert("arnold".into(), arnold.form.eigenvalues.clone());
    report.residuals.insert("arnold_asymmetry".into(), arnold.asymmetry);
    if !arnold.nondegenerate(opts.definiteness_rel) {
        report.assumptions.push("Arnold form degenerate or asymmetric: corollary not applicable".into());
        return Ok(report);
    }
    let wint = splitting::build_wint(sys, split)?;
    if wint.dim() != split.slice.dim() {
        return Err(Error::Inconsistency(format!(
            "Sigma_int has dimension {} but the slice has dimension {}",
            wint.dim(),
            split.slice.dim()
        )));
    }
    let dec = check_sigma_decomposition(split, &wint, true);
    if !dec.holds {
        return Err(Error::Inconsistency("Sigma is not the direct sum of Sigma_rig and Sigma_int".into()));
    }
    let int_form = QuadraticFormOnBasis::new(
        "sigma_int_hessian",
        wint.sigma_int.clone(),
        restricted_form_on(sys, split, &wint.sigma_int.vectors)?,
    );
    report.block_spectra.insert("sigma_int_hessian".into(), int_form.eigenvalues.clone());
    report.residuals.insert("wint_h_pairing".into(), wint.h_pairing_residual);
    let ar = arnold.form.sign(opts.definiteness_rel);
    let stable = if split.dim_check() > 0 {
        matches!(ar, Sign::Positive | Sign::Empty)
            && matches!(int_form.sign(opts.definiteness_rel), Sign::Positive | Sign::Empty)
    } else {
        matches!(ar, Sign::Positive | Sign::Negative | Sign::Empty)
    };
    report.verdict = if stable { Verdict::GmuStable } else { Verdict::Inconclusive };
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OmegaCrosscheck {
    pub matrix: DMatrix<f64>,
    /// `max |Omega_blocks - Omega_direct| / max |Omega_blocks|`.
    pub residual: f64,
}

/// Derivative of `chi^{xi_perp}` (chart components) along a curve with the given tangent.
fn chi_derivative<C>(sys: &ChartedSystem, xi_perp: &AlgebraVector, curve: C, h: f64) -> Result<DVector<f64>>
where
    C: Fn(f64) -> Result<DVector<f64>>,
{
    fd::richardson(|t| Ok(mechanics::chi_one_form(sys, &curve(t)?, xi_perp)?.coords), h)
}

/// Recomputes `Omega` on the same basis from the momentum pairings, the canonical pairing
/// between `S*` and `Sigma_int`, and the exterior derivative of `chi^{xi_perp}`.
pub fn omega_crosscheck(sys: &ChartedSystem, split: &SplittingData, forms: &BlockForms) -> Result<OmegaCrosscheck> {
    let lie = sys.lie();
    let mu = split.mu();
    let x = split.x();
    let xi_perp = split.xi_perp();
    let q = split.qmu.dim();
    let k = forms.wint.dim();
    let dim = q + 2 * k;
    let d = sys.group_dim();
    let n = sys.dim();
    let h = sys.steps().second_at(&x);

    // (eta, dq, alpha(dq), beta as chart covector) for every basis element
    let a_coords = DMatrix::from_fn(split.slice.dim(), k, |i, j| {
        split.slice_coords(&forms.wint.slice_parts.column(j).into_owned())[i]
    });
    let a_inv_t = a_coords
        .try_inverse()
        .ok_or_else(|| Error::Inconsistency("slice parts of Sigma_int are dependent".into()))?
        .transpose();
    struct Elem {
        eta: DVector<f64>,
        dq_alg: DVector<f64>,
        dq_slice: DVector<f64>,
        beta: DVector<f64>,
    }
    let mut elems = Vec::with_capacity(dim);
    for i in 0..q {
        elems.push(Elem {
            eta: split.qmu.vector(i),
            dq_alg: DVector::zeros(d),
            dq_slice: DVector::zeros(n),
            beta: DVector::zeros(n),
        });
    }
    for j in 0..k {
        elems.push(Elem {
            eta: DVector::zeros(d),
            dq_alg: forms.wint.lambdas.column(j).into_owned(),
            dq_slice: forms.wint.slice_parts.column(j).into_owned(),
            beta: DVector::zeros(n),
        });
    }
    for j in 0..k {
        let coeffs = a_inv_t.column(j).into_owned();
        elems.push(Elem {
            eta: DVector::zeros(d),
            dq_alg: DVector::zeros(d),
            dq_slice: DVector::zeros(n),
            beta: &split.metric * (&split.slice.vectors * coeffs),
        });
    }
    // D chi along each dq: orbit curve for the algebra part, chart line for the slice part.
    let dchi: Vec<DVector<f64>> = elems
        .iter()
        .map(|e| {
            let mut out = DVector::zeros(n);
            let an = e.dq_alg.norm();
            if an > 0.0 {
                let dir = &e.dq_alg / an;
                out += chi_derivative(sys, &xi_perp, |t| sys.action_flow(&dir, t, &x), h)? * an;
            }
            let sn = e.dq_slice.norm();
            if sn > 0.0 {
                let dir = &e.dq_slice / sn;
                out += chi_derivative(sys, &xi_perp, |t| Ok(&x + &dir * t), h)? * sn;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let dq: Vec<DVector<f64>> = elems
        .iter()
        .map(|e| &split.generators * &e.dq_alg + &e.dq_slice)
        .collect();
    let pair = |u: &DVector<f64>, v: &DVector<f64>| -> Result<f64> { Ok(mu.dot(&lie.bracket(u, v)?)) };
    let mut m = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let (e1, e2) = (&elems[a], &elems[b]);
            let mut v = -pair(&e1.eta, &e2.eta)? - pair(&e1.eta, &e2.dq_alg)? + pair(&e2.eta, &e1.dq_alg)?;
            v += e2.beta.dot(&dq[a]) - e1.beta.dot(&dq[b]);
            let dchi_ab = dchi[a].dot(&dq[b]) - dchi[b].dot(&dq[a]);
            v -= dchi_ab;
            m[(a, b)] = v;
        }
    }
    let scale = linalg::max_abs(&forms.omega.full).max(f64::MIN_POSITIVE);
    let residual = linalg::max_abs(&(&m - &forms.omega.full)) / scale;
    Ok(OmegaCrosscheck { matrix: m, residual })
}

