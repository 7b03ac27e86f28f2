//! Locked inertia, momentum, augmented potential and relative-equilibrium residuals.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd;
use crate::geometry::{ChartedSystem, CotangentVector};
use crate::lie_algebra::{AlgebraVector, CoalgebraVector};

/// Relative tolerance on the relative-equilibrium residual.
pub const RE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct LockedInertia {
    pub at: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LockedInertiaDerivative {
    pub at: DVector<f64>,
    pub direction: DVector<f64>,
    pub matrix: DMatrix<f64>,
}

impl LockedInertiaDerivative {
    /// `(DII . v)(a, b)`.
    pub fn eval(&self, a: &AlgebraVector, b: &AlgebraVector) -> f64 {
        a.dot(&(&self.matrix * b))
    }

    /// The covector `(DII . v)(a, .)`.
    pub fn partial(&self, a: &AlgebraVector) -> CoalgebraVector {
        &self.matrix * a
    }
}

/// `II(x) = A^T M A`.
pub fn locked_inertia(sys: &ChartedSystem, x: &DVector<f64>) -> Result<LockedInertia> {
    let a = sys.generators(x)?;
    let m = sys.metric(x)?;
    Ok(LockedInertia {
        at: x.clone(),
        matrix: a.transpose() * m * a,
    })
}

fn locked_matrix(sys: &ChartedSystem, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    Ok(locked_inertia(sys, x)?.matrix)
}

/// Derivative of `II` along the chart line `x + t v`.
pub fn d_locked_inertia(sys: &ChartedSystem, x: &DVector<f64>, v: &DVector<f64>) -> Result<LockedInertiaDerivative> {
    if v.len() != sys.dim() {
        return Err(Error::dim("DII direction", sys.dim(), v.len()));
    }
    let d = sys.group_dim();
    let vn = v.norm();
    let matrix = if vn == 0.0 {
        DMatrix::zeros(d, d)
    } else {
        let h = sys.steps().first_at(x) / vn;
        fd::central(|t| locked_matrix(sys, &(x + v * t)), h)?
    };
    Ok(LockedInertiaDerivative {
        at: x.clone(),
        direction: v.clone(),
        matrix,
    })
}

/// `mu = II(x) xi`.
pub fn momentum_of_generator(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector) -> Result<CoalgebraVector> {
    if xi.len() != sys.group_dim() {
        return Err(Error::dim("velocity", sys.group_dim(), xi.len()));
    }
    Ok(locked_matrix(sys, x)? * xi)
}

/// `V_xi(x) = V(x) - 1/2 xi^T II(x) xi`.
pub fn augmented_potential(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector) -> Result<f64> {
    let ii = locked_matrix(sys, x)?;
    Ok(sys.potential(x)? - 0.5 * xi.dot(&(ii * xi)))
}

/// `V_mu(x) = V(x) + 1/2 mu^T II(x)^{-1} mu`, defined where `II` is invertible.
pub fn amended_potential(sys: &ChartedSystem, x: &DVector<f64>, mu: &CoalgebraVector) -> Result<f64> {
    let ii = locked_matrix(sys, x)?;
    let sol = ii
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Precondition("locked inertia is singular".into()))?
        .solve(mu);
    Ok(sys.potential(x)? + 0.5 * mu.dot(&sol))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReResidual {
    pub gradient: DVector<f64>,
    /// `sqrt(g^T M^{-1} g)`.
    pub norm: f64,
    pub threshold: f64,
}

impl ReResidual {
    pub fn accepted(&self) -> bool {
        self.norm <= self.threshold
    }
}

/// Gradient of the augmented potential at `x` and its metric norm.
pub fn re_residual(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector) -> Result<ReResidual> {
    let h = sys.steps().first_at(x);
    let g = fd::gradient(|y| augmented_potential(sys, y, xi), x, h)?;
    let m = sys.metric(x)?;
    let sol = m
        .cholesky()
        .ok_or_else(|| Error::Precondition("metric not positive definite".into()))?
        .solve(&g);
    Ok(ReResidual {
        norm: g.dot(&sol).max(0.0).sqrt(),
        threshold: RE_TOL * (1.0 + sys.potential(x)?.abs()),
        gradient: g,
    })
}

/// Errors with `NotRelativeEquilibrium` when the residual exceeds its threshold.
pub fn require_relative_equilibrium(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector) -> Result<ReResidual> {
    let r = re_residual(sys, x, xi)?;
    if !r.accepted() {
        return Err(Error::NotRelativeEquilibrium {
            residual: r.norm,
            threshold: r.threshold,
        });
    }
    Ok(r)
}

/// `chi^xi(x) = M(x) A(x) xi`, the Legendre transform of `xi_Q`.
pub fn chi_one_form(sys: &ChartedSystem, x: &DVector<f64>, xi: &AlgebraVector) -> Result<CotangentVector> {
    let v = sys.generator(x, xi)?;
    Ok(CotangentVector {
        base: x.clone(),
        coords: sys.metric(x)? * v,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    pub iterations: usize,
    pub residual: ReResidual,
}

/// Damped Newton iteration on the gradient of the augmented potential. The Hessian is
/// regularized with a pseudo-inverse so that group directions (flat for `V_xi`) do not
/// stall the step.
pub fn find_relative_equilibrium(sys: &ChartedSystem, x0: &DVector<f64>, xi: &AlgebraVector, max_iter: usize) -> Result<NewtonOutcome> {
    let mut x = x0.clone();
    for it in 0..max_iter {
        let r = re_residual(sys, &x, xi)?;
        if r.accepted() {
            return Ok(NewtonOutcome {
                x,
                iterations: it,
                residual: r,
            });
        }
        let h = fd::hessian(|y| augmented_potential(sys, y, xi), &x, sys.steps().second_at(&x))?;
        let svd = h.svd(true, true);
        let step = svd
            .solve(&r.gradient, 1e-10 * svd.singular_values.max())
            .map_err(|e| Error::Inconsistency(e.to_string()))?;
        let f0 = augmented_potential(sys, &x, xi)?;
        let mut damping = 1.0;
        let mut next = &x - &step;
        while damping > 1e-6 {
            next = &x - &step * damping;
            if sys.in_domain(&next) {
                let r_next = re_residual(sys, &next, xi)?;
                if r_next.norm < r.norm || (augmented_potential(sys, &next, xi)? - f0).abs() < 1e-14 {
                    break;
                }
            }
            damping *= 0.5;
        }
        x = next;
    }
    let r = re_residual(sys, &x, xi)?;
    if r.accepted() {
        return Ok(NewtonOutcome {
            x,
            iterations: max_iter,
            residual: r,
        });
    }
    Err(Error::NotRelativeEquilibrium {
        residual: r.norm,
        threshold: r.threshold,
    })
}
