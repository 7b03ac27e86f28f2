#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use remstab::catalog::{self, CatalogEntry, KnownRe};
use remstab::splitting::{build_splitting, SplittingData, SplittingOptions};

pub struct Case {
    pub name: String,
    pub entry: CatalogEntry,
    pub re: KnownRe,
}

impl Case {
    pub fn split(&self) -> SplittingData {
        self.split_with(&self.entry.default_ip, SplittingOptions::default())
    }

    pub fn split_with(&self, ip: &[f64], opts: SplittingOptions) -> SplittingData {
        let ip = self.entry.system.lie().invariant_inner_product_family(ip).unwrap();
        build_splitting(&self.entry.system, &self.re.x, &self.re.xi, &ip, &opts).unwrap()
    }

    pub fn ip(&self) -> DMatrix<f64> {
        self.entry
            .system
            .lie()
            .invariant_inner_product_family(&self.entry.default_ip)
            .unwrap()
    }
}

pub fn cases_for(id: &str, params: &[(&str, f64)]) -> Vec<Case> {
    let entry = catalog::build_with(id, params).unwrap();
    entry
        .known_re
        .iter()
        .map(|re| Case {
            name: format!("{id} {params:?} {}", re.label),
            entry: entry.clone(),
            re: re.clone(),
        })
        .collect()
}

/// Every catalog relative equilibrium used by the property suites.
pub fn catalog_cases() -> Vec<Case> {
    let mut out = Vec::new();
    for (id, params) in [
        ("lagrange_top", vec![("zeta", 2.0)]),
        ("lagrange_top", vec![("zeta", 1.0), ("r", 0.7), ("i", 2.0), ("i3", 1.0)]),
        ("spherical_pendulum", vec![("theta0", std::f64::consts::FRAC_PI_4)]),
        ("spherical_pendulum", vec![("theta0", 1.2), ("l", 2.0)]),
        ("synthetic_product", vec![]),
        ("synthetic_product", vec![("seed", 11.0), ("coupling", 0.2), ("rho1", 0.5)]),
        ("rigid_body", vec![]),
        ("rigid_body", vec![("axis", 1.0)]),
        ("rigid_body", vec![("internal", 1.0)]),
    ] {
        out.extend(cases_for(id, &params));
    }
    out
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_combination(rng: &mut ChaCha8Rng, basis: &DMatrix<f64>) -> DVector<f64> {
    basis * random_vector(rng, basis.ncols())
}

pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Worst relative error of the connection identities over `count` random evaluations
/// around the case's relative equilibrium, half of them at the point itself.
pub fn identity_worst_error(case: &Case, rng: &mut ChaCha8Rng, count: usize, floor: f64) -> (f64, String) {
    use remstab::identities::{connection_identities, IdentityInputs};
    use remstab::splitting::orbit_splitting;

    let sys = &case.entry.system;
    let d = sys.group_dim();
    let mut worst = (0.0, String::new());
    for k in 0..count {
        let x = if k % 2 == 0 {
            case.re.x.clone()
        } else {
            loop {
                let y = &case.re.x + random_vector(rng, sys.dim()) * 0.3;
                if sys.in_domain(&y) {
                    break y;
                }
            }
        };
        let orbit = orbit_splitting(sys, &x, 1e-9).unwrap();
        let inp = IdentityInputs {
            xi_i: random_vector(rng, d),
            xi_j: random_vector(rng, d),
            xi: random_vector(rng, d),
            lambda: random_vector(rng, d),
            v: random_combination(rng, &orbit.slice),
            w: random_combination(rng, &orbit.slice),
        };
        for check in connection_identities(sys, &x, &orbit, &inp).unwrap() {
            let e = check.relative_error(floor);
            if e > worst.0 {
                worst = (e, format!("{} item {} at {:?}", case.name, check.item, x.as_slice()));
            }
        }
    }
    worst
}
