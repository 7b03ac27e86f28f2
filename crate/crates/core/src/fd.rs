//! Central finite differences with an environment-overridable step policy.

use std::ops::{Mul, Sub};
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

/// Environment variable overriding the relative first-derivative step.
pub const FD_STEP_ENV: &str = "REMSTAB_FD_STEP";

pub const DEFAULT_FIRST_STEP: f64 = 1e-5;
pub const DEFAULT_SECOND_STEP: f64 = 1e-3;

fn env_step() -> Option<f64> {
    static STEP: OnceLock<Option<f64>> = OnceLock::new();
    *STEP.get_or_init(|| {
        std::env::var(FD_STEP_ENV)
            .ok()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .filter(|h| h.is_finite() && *h > 0.0)
    })
}

/// Step sizes for first and nested/second derivatives, relative to `1 + |q|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPolicy {
    pub first: f64,
    pub second: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        match env_step() {
            Some(h) => StepPolicy {
                first: h,
                second: h * (DEFAULT_SECOND_STEP / DEFAULT_FIRST_STEP),
            },
            None => StepPolicy {
                first: DEFAULT_FIRST_STEP,
                second: DEFAULT_SECOND_STEP,
            },
        }
    }
}

impl StepPolicy {
    pub fn with_first(first: f64) -> Self {
        StepPolicy {
            first,
            second: first * (DEFAULT_SECOND_STEP / DEFAULT_FIRST_STEP),
        }
    }

    pub fn first_at(&self, q: &DVector<f64>) -> f64 {
        self.first * (1.0 + q.norm())
    }

    pub fn second_at(&self, q: &DVector<f64>) -> f64 {
        self.second * (1.0 + q.norm())
    }
}

/// `(f(h) - f(-h)) / 2h`.
pub fn central<T, F>(f: F, h: f64) -> Result<T>
where
    F: Fn(f64) -> Result<T>,
    T: Sub<Output = T> + Mul<f64, Output = T>,
{
    Ok((f(h)? - f(-h)?) * (0.5 / h))
}

/// Central difference with one Richardson step (ratio 2): fourth-order accurate.
pub fn richardson<T, F>(f: F, h: f64) -> Result<T>
where
    F: Fn(f64) -> Result<T>,
    T: Sub<Output = T> + Mul<f64, Output = T> + Clone,
{
    let fine = central(&f, h)?;
    let coarse = central(&f, 2.0 * h)?;
    Ok(fine.clone() * (4.0 / 3.0) - coarse * (1.0 / 3.0))
}

pub fn gradient<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DVector<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let n = x.len();
    let mut g = DVector::zeros(n);
    for i in 0..n {
        g[i] = central(
            |t| {
                let mut y = x.clone();
                y[i] += t;
                f(&y)
            },
            h,
        )?;
    }
    Ok(g)
}

/// Second derivatives of `f(x + B c)` at `c = 0`, with per-direction steps `h / |b_i|`
/// and Richardson extrapolation.
pub fn hessian_on_basis<F>(f: F, x: &DVector<f64>, basis: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let k = basis.ncols();
    let steps: Vec<f64> = (0..k)
        .map(|i| h / basis.column(i).norm().max(f64::MIN_POSITIVE))
        .collect();
    let at = |si: f64, i: usize, sj: f64, j: usize| -> Result<f64> {
        let mut y = x.clone();
        y += basis.column(i) * si;
        if sj != 0.0 {
            y += basis.column(j) * sj;
        }
        f(&y)
    };
    let f0 = f(x)?;
    let level = |scale: f64| -> Result<DMatrix<f64>> {
        let mut hm = DMatrix::zeros(k, k);
        for i in 0..k {
            let hi = steps[i] * scale;
            let fp = at(hi, i, 0.0, i)?;
            let fm = at(-hi, i, 0.0, i)?;
            hm[(i, i)] = (fp - 2.0 * f0 + fm) / (hi * hi);
            for j in 0..i {
                let hj = steps[j] * scale;
                let pp = at(hi, i, hj, j)?;
                let pm = at(hi, i, -hj, j)?;
                let mp = at(-hi, i, hj, j)?;
                let mm = at(-hi, i, -hj, j)?;
                let v = (pp - pm - mp + mm) / (4.0 * hi * hj);
                hm[(i, j)] = v;
                hm[(j, i)] = v;
            }
        }
        Ok(hm)
    };
    let fine = level(1.0)?;
    let coarse = level(2.0)?;
    Ok(fine * (4.0 / 3.0) - coarse * (1.0 / 3.0))
}

pub fn hessian<F>(f: F, x: &DVector<f64>, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&DVector<f64>) -> Result<f64>,
{
    let n = x.len();
    hessian_on_basis(f, x, &DMatrix::identity(n, n), h)
}
