//! Brute-force energy-momentum test on the full cotangent bundle in chart coordinates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{classify, definiteness_tol, Route, Sign, StabilityOptions, StabilityReport, Verdict};
use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::ChartedSystem;
use crate::lie_algebra::AlgebraVector;
use crate::linalg::{self, RANK_TOL};
use crate::mechanics;
use crate::splitting::{self, FD_RANK_TOL};

/// How the symplectic normal space is chosen inside `ker dJ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Complement {
    /// Euclidean orthogonal complement of the orbit directions.
    Orthogonal,
    /// A random complement drawn from the given seed.
    Random(u64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    pub report: StabilityReport,
    pub eigenvalues: Vec<f64>,
    /// `(positive, negative, zero)` counts.
    pub inertia: (usize, usize, usize),
    pub vs_dim: usize,
    /// Columns span the chosen complement, as phase-space vectors `(dq, dp)`.
    pub vs_basis: DMatrix<f64>,
}

fn split_phase(z: &DVector<f64>, n: usize) -> (DVector<f64>, DVector<f64>) {
    (z.rows(0, n).into_owned(), z.rows(n, n).into_owned())
}

/// `h(q, p) - <J(q, p), xi>` with `h = p^T M^{-1} p / 2 + V` and `J_i = p^T A e_i`.
fn augmented_hamiltonian(sys: &ChartedSystem, z: &DVector<f64>, xi: &AlgebraVector) -> Result<f64> {
    let n = sys.dim();
    let (q, p) = split_phase(z, n);
    let m = sys.metric(&q)?;
    let v = m
        .cholesky()
        .ok_or_else(|| Error::Precondition("metric not positive definite".into()))?
        .solve(&p);
    let a = sys.generators(&q)?;
    Ok(0.5 * p.dot(&v) + sys.potential(&q)? - p.dot(&(a * xi)))
}

/// Chart Hessian of the augmented Hamiltonian at `(x, p)`.
pub fn phase_hessian(sys: &ChartedSystem, x: &DVector<f64>, p: &DVector<f64>, xi: &AlgebraVector) -> Result<DMatrix<f64>> {
    let n = sys.dim();
    let mut z = DVector::zeros(2 * n);
    z.rows_mut(0, n).copy_from(x);
    z.rows_mut(n, n).copy_from(p);
    let h = sys.steps().second_at(&z);
    let hess = fd::hessian(|w| augmented_hamiltonian(sys, w, xi), &z, h)?;
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Jacobian of the momentum map `J(q, p) = A(q)^T p`, shape `d x 2n`.
pub fn momentum_jacobian(sys: &ChartedSystem, x: &DVector<f64>, p: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = sys.dim();
    let d = sys.group_dim();
    let mut jac = DMatrix::zeros(d, 2 * n);
    let h = sys.steps().first_at(x);
    for i in 0..n {
        let col = fd::central(
            |t| {
                let mut y = x.clone();
                y[i] += t;
                Ok(sys.generators(&y)?.transpose() * p)
            },
            h,
        )?;
        jac.set_column(i, &col);
    }
    let at = sys.generators(x)?.transpose();
    jac.view_mut((0, n), (d, n)).copy_from(&at);
    Ok(jac)
}

/// Cotangent-lifted generator of `lambda` at `(x, p)`: `(A lambda, -d_q <p, A lambda>)`.
pub fn lifted_generator(sys: &ChartedSystem, x: &DVector<f64>, p: &DVector<f64>, lambda: &AlgebraVector) -> Result<DVector<f64>> {
    let n = sys.dim();
    let base = sys.generator(x, lambda)?;
    let grad = fd::gradient(|y| Ok(p.dot(&sys.generator(y, lambda)?)), x, sys.steps().first_at(x))?;
    let mut out = DVector::zeros(2 * n);
    out.rows_mut(0, n).copy_from(&base);
    out.rows_mut(n, n).copy_from(&(-grad));
    Ok(out)
}

/// Energy-momentum test on the symplectic normal space built directly in `T^*Q`.
pub fn full_em_test(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector, ip: &DMatrix<f64>, complement: Complement, opts: &StabilityOptions) -> Result<OracleOutcome> {
    let n = sys.dim();
    mechanics::require_relative_equilibrium(sys, x, xi)?;
    let lie = sys.lie();
    let p = mechanics::chi_one_form(sys, x, xi)?.coords;
    let mu = sys.generators(x)?.transpose() * &p;
    let gmu = lie.momentum_isotropy_algebra(&mu, opts.splitting.rank_tol)?.vectors;

    let lifted: Vec<DVector<f64>> = (0..gmu.ncols())
        .map(|i| lifted_generator(sys, x, &p, &gmu.column(i).into_owned()))
        .collect::<Result<_>>()?;
    let lifted = linalg::column_matrix(&lifted, 2 * n);

    // Isotropy of z inside g_mu and the velocity component complementary to it.
    let gz = &gmu * linalg::null_space(&lifted, FD_RANK_TOL);
    let xi_perp = {
        let comp = if gz.ncols() == 0 {
            gmu.clone()
        } else {
            &gmu * linalg::null_space(&(gz.transpose() * ip * &gmu), RANK_TOL)
        };
        let comp = linalg::orthonormalize_with(&comp, ip)
            .ok_or_else(|| Error::InvalidInnerProduct("not positive definite".into()))?;
        &comp * (comp.transpose() * ip * xi)
    };

    let dj = momentum_jacobian(sys, x, &p)?;
    let ker = linalg::null_space(&dj, FD_RANK_TOL);
    let orbit = linalg::range_basis(&lifted, FD_RANK_TOL);
    let free = ker.ncols() - orbit.ncols().min(ker.ncols());
    let vs = match complement {
        Complement::Orthogonal => {
            if orbit.ncols() == 0 {
                ker.clone()
            } else {
                &ker * linalg::null_space(&(orbit.transpose() * &ker), RANK_TOL)
            }
        }
        Complement::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut tries = 0;
            loop {
                let mix = DMatrix::from_fn(ker.ncols(), free, |_, _| rng.gen_range(-1.0..1.0));
                let cand = &ker * mix;
                let both = linalg::hstack(&[&orbit, &cand], 2 * n);
                if linalg::rank(&both, 1e-6) == orbit.ncols() + free {
                    break cand;
                }
                tries += 1;
                if tries > 20 {
                    return Err(Error::Inconsistency("no random complement found".into()));
                }
            }
        }
    };

    let split = splitting::build_splitting(sys, x, xi, ip, &opts.splitting)?;
    let expected = split.qmu.dim() + 2 * split.slice.dim();
    if vs.ncols() != expected {
        return Err(Error::Inconsistency(format!(
            "symplectic normal space has dimension {} but qmu + 2 slice gives {expected} (ker dJ {}, orbit {})",
            vs.ncols(),
            ker.ncols(),
            orbit.ncols()
        )));
    }

    let hess = phase_hessian(sys, x, &p, &xi_perp)?;
    let restricted = vs.transpose() * &hess * &vs;
    let eigs = linalg::sym_eigenvalues(&restricted);
    let tol = definiteness_tol(&eigs, opts.definiteness_rel);
    let sign = classify(&eigs, tol);
    let verdict = match sign {
        Sign::Positive | Sign::Negative | Sign::Empty => Verdict::GmuStable,
        Sign::Neither => Verdict::Inconclusive,
    };
    let inertia = linalg::inertia(&eigs, tol);
    let mut report = StabilityReport::new(verdict, Route::OracleOnly, &split, opts);
    report.block_spectra.insert("phase_hessian".into(), eigs.clone());
    report.residuals.insert("definiteness_tol".into(), tol);
    report
        .residuals
        .insert("xi_perp_mismatch".into(), (&xi_perp - split.xi_perp()).norm());
    report.parameters.insert("vs_dim".into(), serde_json::json!(vs.ncols()));
    report.parameters.insert(
        "complement".into(),
        serde_json::json!(match complement {
            Complement::Orthogonal => "orthogonal".to_string(),
            Complement::Random(s) => format!("random:{s}"),
        }),
    );
    Ok(OracleOutcome {
        report,
        eigenvalues: eigs,
        inertia,
        vs_dim: vs.ncols(),
        vs_basis: vs,
    })
}
