//! Products of flat planes rotated by a torus, plus spectator coordinates, with
//! polynomial invariant potentials.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Analytic, CatalogEntry, KnownRe};
use crate::error::{Error, Result};
use crate::geometry::ChartedSystem;
use crate::lie_algebra::LieAlgebraSpec;

pub const ID: &str = "synthetic_product";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub weights: Vec<f64>,
    /// Potential per plane: `a rho^2 + b rho^4`.
    pub quadratic: Vec<f64>,
    pub quartic: Vec<f64>,
    /// `coupling * rho_0^2 * rho_1^2`.
    pub coupling: f64,
    /// Spectator potential `c s^2 + s^4 / 4`.
    pub spectator: Vec<f64>,
}

impl SyntheticParams {
    pub fn planes(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        2 * self.planes() + self.spectator.len()
    }

    fn rho_sq(&self, q: &DVector<f64>) -> Vec<f64> {
        (0..self.planes())
            .map(|k| q[2 * k] * q[2 * k] + q[2 * k + 1] * q[2 * k + 1])
            .collect()
    }

    pub fn potential(&self, q: &DVector<f64>) -> f64 {
        let r = self.rho_sq(q);
        let mut v = 0.0;
        for k in 0..self.planes() {
            v += self.quadratic[k] * r[k] + self.quartic[k] * r[k] * r[k];
        }
        if self.planes() >= 2 {
            v += self.coupling * r[0] * r[1];
        }
        let off = 2 * self.planes();
        for (j, c) in self.spectator.iter().enumerate() {
            let s = q[off + j];
            v += c * s * s + 0.25 * s.powi(4);
        }
        v
    }

    /// Exact locked inertia `diag(w_k rho_k^2)`.
    pub fn locked_inertia(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let r = self.rho_sq(q);
        DMatrix::from_fn(self.planes(), self.planes(), |i, j| {
            if i == j {
                self.weights[i] * r[i]
            } else {
                0.0
            }
        })
    }

    /// Exact derivative of the locked inertia along `v`.
    pub fn d_locked_inertia(&self, q: &DVector<f64>, v: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::from_fn(self.planes(), self.planes(), |i, j| {
            if i == j {
                2.0 * self.weights[i] * (q[2 * i] * v[2 * i] + q[2 * i + 1] * v[2 * i + 1])
            } else {
                0.0
            }
        })
    }

    /// Squared spin rate for a plane held at radius `rho` given the other radii.
    pub fn spin_rate_sq(&self, k: usize, rho_sq: &[f64]) -> f64 {
        let mut dv = self.quadratic[k] + 2.0 * self.quartic[k] * rho_sq[k];
        if self.planes() >= 2 && k < 2 {
            dv += self.coupling * rho_sq[1 - k];
        }
        2.0 * dv / self.weights[k]
    }
}

pub fn system(p: SyntheticParams) -> ChartedSystem {
    let n = p.dim();
    let planes = p.planes();
    let metric = {
        let mut diag = vec![1.0; n];
        for k in 0..planes {
            diag[2 * k] = p.weights[k];
            diag[2 * k + 1] = p.weights[k];
        }
        DMatrix::from_diagonal(&DVector::from_vec(diag))
    };
    let pot = p.clone();
    ChartedSystem::new(
        ID,
        n,
        LieAlgebraSpec::abelian(planes),
        move |_| metric.clone(),
        move |q| pot.potential(q),
        move |q| {
            let mut a = DMatrix::zeros(n, planes);
            for k in 0..planes {
                a[(2 * k, k)] = -q[2 * k + 1];
                a[(2 * k + 1, k)] = q[2 * k];
            }
            a
        },
    )
    .with_flow(move |lam, t, q| {
        let mut y = q.clone();
        for k in 0..planes {
            let (s, c) = (t * lam[k]).sin_cos();
            y[2 * k] = c * q[2 * k] - s * q[2 * k + 1];
            y[2 * k + 1] = s * q[2 * k] + c * q[2 * k + 1];
        }
        y
    })
}

fn indexed(given: &BTreeMap<String, f64>, prefix: &str, k: usize) -> Option<f64> {
    given.get(&format!("{prefix}{k}")).copied()
}

/// Parameters: `seed`, `planes`, `spectators`, `coupling`, and per-plane overrides `w<k>`,
/// `a<k>`, `b<k>`, `rho<k>`, `omega<k>`, per-spectator `c<j>`. Plane 0 sits at radius 0.8
/// and the others at the origin unless overridden.
pub fn build(given: &BTreeMap<String, f64>) -> Result<CatalogEntry> {
    let seed = given.get("seed").copied().unwrap_or(7.0);
    let planes = given.get("planes").copied().unwrap_or(2.0);
    let spectators = given.get("spectators").copied().unwrap_or(1.0);
    for (name, v) in [("seed", seed), ("planes", planes), ("spectators", spectators)] {
        if v < 0.0 || v.fract() != 0.0 {
            return Err(Error::InvalidParameter(format!("`{name}` must be a non-negative integer")));
        }
    }
    let planes = planes as usize;
    let spectators = spectators as usize;
    if planes == 0 {
        return Err(Error::InvalidParameter("`planes` must be at least 1".into()));
    }
    for key in given.keys() {
        let ok = matches!(key.as_str(), "seed" | "planes" | "spectators" | "coupling")
            || ["w", "a", "b", "rho", "omega"].iter().any(|p| {
                key.strip_prefix(p)
                    .and_then(|s| s.parse::<usize>().ok())
                    .is_some_and(|k| k < planes)
            })
            || key
                .strip_prefix('c')
                .and_then(|s| s.parse::<usize>().ok())
                .is_some_and(|j| j < spectators);
        if !ok {
            return Err(Error::InvalidParameter(format!("`{key}` is not a parameter of {ID}")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    let mut sp = SyntheticParams {
        weights: Vec::new(),
        quadratic: Vec::new(),
        quartic: Vec::new(),
        coupling: given.get("coupling").copied().unwrap_or(0.0),
        spectator: Vec::new(),
    };
    let mut rho = Vec::new();
    let mut omega = Vec::new();
    for k in 0..planes {
        let w = rng.gen_range(0.5..2.0);
        let a = rng.gen_range(0.2..1.0);
        let b = rng.gen_range(0.2..1.0);
        sp.weights.push(indexed(given, "w", k).unwrap_or(w));
        sp.quadratic.push(indexed(given, "a", k).unwrap_or(a));
        sp.quartic.push(indexed(given, "b", k).unwrap_or(b));
        rho.push(indexed(given, "rho", k).unwrap_or(if k == 0 { 0.8 } else { 0.0 }));
        omega.push(indexed(given, "omega", k).unwrap_or(0.0));
    }
    for j in 0..spectators {
        let c = rng.gen_range(0.5..1.5);
        sp.spectator.push(indexed(given, "c", j).unwrap_or(c));
    }
    if sp.weights.iter().any(|w| *w <= 0.0) {
        return Err(Error::InvalidParameter("plane weights must be positive".into()));
    }
    let rho_sq: Vec<f64> = rho.iter().map(|r| r * r).collect();
    let mut x = DVector::zeros(sp.dim());
    let mut xi = DVector::zeros(planes);
    for k in 0..planes {
        if rho[k] != 0.0 {
            let w2 = sp.spin_rate_sq(k, &rho_sq);
            if w2 < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "plane {k} has no relative equilibrium at radius {}",
                    rho[k]
                )));
            }
            x[2 * k] = rho[k];
            xi[k] = w2.sqrt();
        } else {
            xi[k] = omega[k];
        }
    }
    let mut params = BTreeMap::new();
    params.insert("seed".to_string(), seed);
    params.insert("planes".to_string(), planes as f64);
    params.insert("spectators".to_string(), spectators as f64);
    params.insert("coupling".to_string(), sp.coupling);
    for k in 0..planes {
        params.insert(format!("w{k}"), sp.weights[k]);
        params.insert(format!("a{k}"), sp.quadratic[k]);
        params.insert(format!("b{k}"), sp.quartic[k]);
        params.insert(format!("rho{k}"), rho[k]);
        params.insert(format!("omega{k}"), xi[k]);
    }
    for j in 0..spectators {
        params.insert(format!("c{j}"), sp.spectator[j]);
    }
    Ok(CatalogEntry {
        id: ID.to_string(),
        system: system(sp.clone()),
        known_re: vec![KnownRe {
            label: "rotating planes".into(),
            x,
            xi,
        }],
        analytic: Some(Analytic::Synthetic(sp)),
        residual_group_abelian: true,
        gmu_compact: true,
        default_ip: vec![1.0; planes],
        warnings: Vec::new(),
        params,
    })
}
