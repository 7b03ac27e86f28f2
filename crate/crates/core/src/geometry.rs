//! Mechanical systems in a single chart: metric, potential, infinitesimal generators and
//! group flows, with Levi-Civita connection data computed by finite differences.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fd::{self, StepPolicy};
use crate::lie_algebra::{AlgebraVector, LieAlgebraSpec};

type ScalarField = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type MatrixField = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type FlowMap = Arc<dyn Fn(&AlgebraVector, f64, &DVector<f64>) -> DVector<f64> + Send + Sync>;
type DomainCheck = Arc<dyn Fn(&DVector<f64>) -> bool + Send + Sync>;

/// Number of RK4 steps used when no closed-form flow is supplied.
const RK4_STEPS: usize = 1000;

/// A tangent vector in chart coordinates together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: DVector<f64>,
    pub coords: DVector<f64>,
}

/// A covector in chart coordinates together with its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentVector {
    pub base: DVector<f64>,
    pub coords: DVector<f64>,
}

#[derive(Clone)]
pub struct ChartedSystem {
    pub name: String,
    n: usize,
    lie: LieAlgebraSpec,
    metric: MatrixField,
    potential: ScalarField,
    generators: MatrixField,
    flow: Option<FlowMap>,
    domain: Option<DomainCheck>,
    steps: StepPolicy,
}

impl fmt::Debug for ChartedSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChartedSystem")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("algebra", &self.lie.name)
            .field("closed_form_flow", &self.flow.is_some())
            .field("steps", &self.steps)
            .finish()
    }
}

impl ChartedSystem {
    /// `metric(q)` is the `n x n` kinetic matrix, `generators(q)` the `n x d` matrix whose
    /// column `i` is the infinitesimal generator of `e_i` at `q`.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        lie: LieAlgebraSpec,
        metric: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        potential: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        generators: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        ChartedSystem {
            name: name.into(),
            n,
            lie,
            metric: Arc::new(metric),
            potential: Arc::new(potential),
            generators: Arc::new(generators),
            flow: None,
            domain: None,
            steps: StepPolicy::default(),
        }
    }

    /// Closed-form group flow `(lambda, t, q) -> exp(t lambda) . q`.
    pub fn with_flow(
        mut self,
        flow: impl Fn(&AlgebraVector, f64, &DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        self.flow = Some(Arc::new(flow));
        self
    }

    pub fn with_domain(mut self, domain: impl Fn(&DVector<f64>) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Some(Arc::new(domain));
        self
    }

    pub fn with_steps(mut self, steps: StepPolicy) -> Self {
        self.steps = steps;
        self
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn group_dim(&self) -> usize {
        self.lie.dim()
    }

    pub fn lie(&self) -> &LieAlgebraSpec {
        &self.lie
    }

    pub fn steps(&self) -> StepPolicy {
        self.steps
    }

    pub fn has_closed_form_flow(&self) -> bool {
        self.flow.is_some()
    }

    pub fn in_domain(&self, q: &DVector<f64>) -> bool {
        q.len() == self.n
            && q.iter().all(|v| v.is_finite())
            && self.domain.as_ref().map_or(true, |d| d(q))
    }

    pub fn check_point(&self, q: &DVector<f64>) -> Result<()> {
        if q.len() != self.n {
            return Err(Error::dim("configuration point", self.n, q.len()));
        }
        if !self.in_domain(q) {
            return Err(Error::ChartDomain(format!(
                "{} at {:?}",
                self.name,
                q.as_slice()
            )));
        }
        Ok(())
    }

    fn check_algebra(&self, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.lie.dim() {
            return Err(Error::dim("algebra vector", self.lie.dim(), v.len()));
        }
        Ok(())
    }

    pub fn metric(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_point(q)?;
        Ok((self.metric)(q))
    }

    pub fn potential(&self, q: &DVector<f64>) -> Result<f64> {
        self.check_point(q)?;
        Ok((self.potential)(q))
    }

    pub fn generators(&self, q: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_point(q)?;
        Ok((self.generators)(q))
    }

    /// `lambda_Q(q)`.
    pub fn generator(&self, q: &DVector<f64>, lambda: &AlgebraVector) -> Result<DVector<f64>> {
        self.check_algebra(lambda)?;
        Ok(self.generators(q)? * lambda)
    }

    pub fn inner(&self, q: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        Ok(u.dot(&(self.metric(q)? * v)))
    }

    /// `exp(t lambda) . q`, closed form when available and RK4 on the generator otherwise.
    pub fn action_flow(&self, lambda: &AlgebraVector, t: f64, q: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_algebra(lambda)?;
        self.check_point(q)?;
        let out = match &self.flow {
            Some(flow) => flow(lambda, t, q),
            None => self.rk4_flow(lambda, t, q)?,
        };
        self.check_point(&out)?;
        Ok(out)
    }

    fn rk4_flow(&self, lambda: &AlgebraVector, t: f64, q: &DVector<f64>) -> Result<DVector<f64>> {
        if t == 0.0 {
            return Ok(q.clone());
        }
        let dt = t / RK4_STEPS as f64;
        let field = |y: &DVector<f64>| self.generator(y, lambda);
        let mut y = q.clone();
        for _ in 0..RK4_STEPS {
            let k1 = field(&y)?;
            let k2 = field(&(&y + &k1 * (0.5 * dt)))?;
            let k3 = field(&(&y + &k2 * (0.5 * dt)))?;
            let k4 = field(&(&y + &k3 * dt))?;
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        }
        Ok(y)
    }

    /// Partial derivatives `d_l M` at `q`.
    pub fn metric_derivatives(&self, q: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        let h = self.steps.first_at(q);
        (0..self.n)
            .map(|l| {
                fd::central(
                    |t| {
                        let mut y = q.clone();
                        y[l] += t;
                        self.metric(&y)
                    },
                    h,
                )
            })
            .collect()
    }

    /// Christoffel symbols of the Levi-Civita connection at `q`.
    pub fn christoffel(&self, q: &DVector<f64>) -> Result<Christoffel> {
        let n = self.n;
        let m = self.metric(q)?;
        let minv = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Precondition(format!("metric not positive definite at {:?}", q.as_slice())))?
            .inverse();
        let dm = self.metric_derivatives(q)?;
        let mut data = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += minv[(k, l)] * (dm[i][(l, j)] + dm[j][(l, i)] - dm[l][(i, j)]);
                    }
                    data[(i * n + j) * n + k] = 0.5 * s;
                }
            }
        }
        Ok(Christoffel { n, data })
    }

    /// `D/dt w` at `t0` for a vector field `w(t)` along the curve `c(t)`.
    pub fn covariant_derivative_along<C, W>(&self, curve: C, field: W, t0: f64) -> Result<DVector<f64>>
    where
        C: Fn(f64) -> Result<DVector<f64>>,
        W: Fn(f64) -> Result<DVector<f64>>,
    {
        let c0 = curve(t0)?;
        let h = self.steps.second_at(&c0);
        let cdot = fd::richardson(|s| curve(t0 + s), h)?;
        let wdot = fd::richardson(|s| field(t0 + s), h)?;
        let gamma = self.christoffel(&c0)?;
        Ok(wdot + gamma.contract(&cdot, &field(t0)?))
    }

    /// `nabla_u Y` at `q` for a vector field `Y` on the chart, along the chart line `q + t u`.
    pub fn covariant_derivative_of_field<Y>(&self, q: &DVector<f64>, u: &DVector<f64>, field: Y) -> Result<DVector<f64>>
    where
        Y: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let un = u.norm();
        if un == 0.0 {
            return Ok(DVector::zeros(self.n));
        }
        let h = self.steps.second_at(q) / un;
        let dy = fd::richardson(|t| field(&(q + u * t)), h)?;
        let gamma = self.christoffel(q)?;
        Ok(dy + gamma.contract(u, &field(q)?))
    }

    /// Pushforward of `v` at `q` by the flow of `lambda` for time `t`.
    pub fn flow_pushforward(&self, lambda: &AlgebraVector, t: f64, q: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
        let vn = v.norm();
        if vn == 0.0 {
            return Ok(DVector::zeros(self.n));
        }
        let eps = self.steps.second_at(q) / vn;
        fd::richardson(|s| self.action_flow(lambda, t, &(q + v * s)), eps)
    }

    /// `nabla_{xi_Q} vbar` at `x`, where `vbar` extends the slice vector `v` by pushing it
    /// forward along the group orbit. `xi_r` must have no component in `g_x`.
    pub fn tube_extension_derivative(&self, x: &DVector<f64>, v: &DVector<f64>, xi_r: &AlgebraVector) -> Result<DVector<f64>> {
        self.require_slice_vector(x, v)?;
        self.check_algebra(xi_r)?;
        let speed = xi_r.norm();
        if speed == 0.0 {
            return Ok(DVector::zeros(self.n));
        }
        self.covariant_derivative_along(
            |t| self.action_flow(xi_r, t / speed, x),
            |t| self.flow_pushforward(xi_r, t / speed, x, v),
            0.0,
        )
        .map(|d| d * speed)
    }

    /// Errors unless `v` is metric-orthogonal to every generator at `x`.
    pub fn require_slice_vector(&self, x: &DVector<f64>, v: &DVector<f64>) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::dim("slice vector", self.n, v.len()));
        }
        let m = self.metric(x)?;
        let a = self.generators(x)?;
        let pairing = a.transpose() * &m * v;
        let scale = m.norm() * a.norm().max(1.0) * v.norm();
        if pairing.norm() > 1e-8 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Precondition(format!(
                "vector is not in the slice (generator pairing {:e})",
                pairing.norm()
            )));
        }
        Ok(())
    }

    /// Linearized action `zeta . v = nabla_v zeta_Q` of an element fixing `x`.
    pub fn linearized_isotropy_action(&self, x: &DVector<f64>, zeta: &AlgebraVector) -> Result<DMatrix<f64>> {
        let n = self.n;
        let h = self.steps.second_at(x);
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            let e = crate::lie_algebra::unit(n, j);
            let col = fd::richardson(|t| self.flow_pushforward(zeta, t, x, &e), h)?;
            out.set_column(j, &col);
        }
        Ok(out)
    }
}

/// `Gamma^k_ij` stored at `data[(i n + j) n + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    /// `Gamma(u, w)^k = Gamma^k_ij u^i w^j`.
    pub fn contract(&self, u: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        DVector::from_fn(n, |k, _| {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += self.get(i, j, k) * u[i] * w[j];
                }
            }
            s
        })
    }
}
