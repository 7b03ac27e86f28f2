mod common;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{catalog_cases, random_vector};
use remstab::geometry::ChartedSystem;
use remstab::lie_algebra::LieAlgebraSpec;
use remstab::Error;

fn polar() -> ChartedSystem {
    ChartedSystem::new(
        "polar",
        2,
        LieAlgebraSpec::abelian(1),
        |q| DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, q[0] * q[0]])),
        |_| 0.0,
        |_| DMatrix::from_column_slice(2, 1, &[0.0, 1.0]),
    )
}

fn near(sys: &ChartedSystem, base: &DVector<f64>, rng: &mut ChaCha8Rng, radius: f64) -> DVector<f64> {
    loop {
        let q = base + random_vector(rng, sys.dim()) * radius;
        if sys.in_domain(&q) {
            return q;
        }
    }
}

#[test]
fn constant_field_in_flat_metric_has_zero_derivative() {
    let sys = ChartedSystem::new(
        "plane",
        2,
        LieAlgebraSpec::abelian(0),
        |_| DMatrix::identity(2, 2),
        |_| 0.0,
        |_| DMatrix::zeros(2, 0),
    );
    let gamma = sys.christoffel(&DVector::from_vec(vec![0.3, -1.0])).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                assert!(gamma.get(i, j, k).abs() < 1e-10);
            }
        }
    }
    let d = sys
        .covariant_derivative_along(
            |t| Ok(DVector::from_vec(vec![t.sin(), t * t])),
            |_| Ok(DVector::from_vec(vec![1.0, 2.0])),
            0.4,
        )
        .unwrap();
    assert!(d.norm() < 1e-10);
}

#[test]
fn christoffel_symbols_are_symmetric_in_lower_indices() {
    let case = &catalog_cases()[0];
    let sys = &case.entry.system;
    let g = sys.christoffel(&DVector::from_vec(vec![0.2, -0.1, 0.3])).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                assert!((g.get(i, j, k) - g.get(j, i, k)).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn velocity_of_a_geodesic_is_parallel() {
    // the Cartesian line (1, t) written in polar coordinates
    let sys = polar();
    let curve = |t: f64| Ok(DVector::from_vec(vec![(1.0 + t * t).sqrt(), t.atan()]));
    let velocity = |t: f64| {
        let r = (1.0 + t * t).sqrt();
        Ok(DVector::from_vec(vec![t / r, 1.0 / (1.0 + t * t)]))
    };
    for t0 in [0.0, 0.5, 1.3] {
        let d = sys.covariant_derivative_along(curve, velocity, t0).unwrap();
        assert!(d.norm() < 1e-8, "t0 = {t0}: {d}");
    }
}

#[test]
fn parallel_transport_along_a_circle_matches_integrated_transport() {
    // transport along r = 2 by integrating the transport equation with fine RK4 steps
    let sys = polar();
    let r = 2.0;
    let rhs = |w: &DVector<f64>| DVector::from_vec(vec![r * w[1], -w[0] / r]);
    let steps = 2000;
    let t_end = 0.7;
    let dt = t_end / steps as f64;
    let mut w = DVector::from_vec(vec![0.3, 0.8]);
    let mut samples = vec![(0.0, w.clone())];
    for s in 0..steps {
        let k1 = rhs(&w);
        let k2 = rhs(&(&w + &k1 * (dt / 2.0)));
        let k3 = rhs(&(&w + &k2 * (dt / 2.0)));
        let k4 = rhs(&(&w + &k3 * dt));
        w += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        samples.push(((s + 1) as f64 * dt, w.clone()));
    }
    // closed form of the same transport: rotation in the orthonormal frame
    let exact = |t: f64| {
        let (s, c) = t.sin_cos();
        let (a, b) = (0.3, 0.8 * r);
        DVector::from_vec(vec![c * a + s * b, (-s * a + c * b) / r])
    };
    for (t, w) in samples.iter().step_by(500) {
        assert!((w - exact(*t)).norm() < 1e-10);
    }
    let d = sys
        .covariant_derivative_along(|t| Ok(DVector::from_vec(vec![r, t])), |t| Ok(exact(t)), 0.35)
        .unwrap();
    assert!(d.norm() < 1e-8, "{d}");
}

#[test]
fn polar_christoffel_symbols() {
    let sys = polar();
    let g = sys.christoffel(&DVector::from_vec(vec![1.7, 0.2])).unwrap();
    assert!((g.get(1, 1, 0) + 1.7).abs() < 1e-8);
    assert!((g.get(0, 1, 1) - 1.0 / 1.7).abs() < 1e-8);
}

#[test]
fn flows_are_generated_by_the_generators() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in catalog_cases() {
        let sys = &case.entry.system;
        for _ in 0..50 {
            let q = near(sys, &case.re.x, &mut rng, 0.3);
            let lam = random_vector(&mut rng, sys.group_dim());
            let h = 1e-4;
            let fd = (sys.action_flow(&lam, h, &q).unwrap() - sys.action_flow(&lam, -h, &q).unwrap()) / (2.0 * h);
            let a = sys.generator(&q, &lam).unwrap();
            assert!((fd - &a).norm() <= 1e-6 * (1.0 + a.norm()), "{}", case.name);
        }
    }
}

#[test]
fn flows_compose() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for case in catalog_cases() {
        let sys = &case.entry.system;
        for _ in 0..10 {
            let q = near(sys, &case.re.x, &mut rng, 0.2);
            let lam = random_vector(&mut rng, sys.group_dim());
            let (s, t) = (rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            let two = sys.action_flow(&lam, s, &sys.action_flow(&lam, t, &q).unwrap()).unwrap();
            let one = sys.action_flow(&lam, s + t, &q).unwrap();
            assert!((two - one).norm() < 1e-10, "{}", case.name);
        }
    }
}

#[test]
fn fallback_integrator_matches_closed_form_flow() {
    let case = &catalog_cases()[0];
    let sys = &case.entry.system;
    let generic = ChartedSystem::new(
        "top without flow",
        3,
        sys.lie().clone(),
        {
            let s = sys.clone();
            move |q| s.metric(q).unwrap()
        },
        |_| 0.0,
        {
            let s = sys.clone();
            move |q| s.generators(q).unwrap()
        },
    );
    let q = DVector::from_vec(vec![0.1, -0.2, 0.05]);
    let lam = DVector::from_vec(vec![0.7, -0.3]);
    let a = sys.action_flow(&lam, 0.5, &q).unwrap();
    let b = generic.action_flow(&lam, 0.5, &q).unwrap();
    assert!((a - b).norm() < 1e-9);
}

#[test]
fn action_is_isometric() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for case in catalog_cases() {
        let sys = &case.entry.system;
        for _ in 0..10 {
            let q = near(sys, &case.re.x, &mut rng, 0.2);
            let lam = random_vector(&mut rng, sys.group_dim());
            let u = random_vector(&mut rng, sys.dim());
            let w = random_vector(&mut rng, sys.dim());
            let t = 0.3;
            let qt = sys.action_flow(&lam, t, &q).unwrap();
            let ut = sys.flow_pushforward(&lam, t, &q, &u).unwrap();
            let wt = sys.flow_pushforward(&lam, t, &q, &w).unwrap();
            let before = sys.inner(&q, &u, &w).unwrap();
            let after = sys.inner(&qt, &ut, &wt).unwrap();
            assert!((before - after).abs() < 1e-8 * (1.0 + before.abs()), "{}", case.name);
        }
    }
}

#[test]
fn tube_extension_derivative_vanishes_for_zero_velocity_and_flat_products() {
    let case = common::cases_for("synthetic_product", &[("spectators", 1.0)]).remove(0);
    let split = case.split();
    let sys = &case.entry.system;
    let x = split.x();
    let v = split.slice.vector(0);
    let zero = sys.tube_extension_derivative(&x, &v, &DVector::zeros(sys.group_dim())).unwrap();
    assert_eq!(zero.norm(), 0.0);
    // the spectator direction is untouched by the rotations
    let mut s = DVector::zeros(sys.dim());
    s[sys.dim() - 1] = 1.0;
    let d = sys.tube_extension_derivative(&x, &s, &split.xi_perp()).unwrap();
    assert!(d.norm() < 1e-9);
}

#[test]
fn tube_extension_derivative_ignores_isotropy_perturbations() {
    // replace the orbit curve exp(t xi) x by exp(t xi) exp(t^2 eta) x with eta fixing x
    let case = &catalog_cases()[0];
    let sys = &case.entry.system;
    let split = case.split();
    let x = split.x();
    let eta = split.h.vector(0);
    let xi_r = DVector::from_vec(vec![0.8, -0.4]);
    let xi_r = split.r_component(&xi_r).unwrap();
    for j in 0..split.slice.dim() {
        let v = split.slice.vector(j);
        let reference = sys.tube_extension_derivative(&x, &v, &xi_r).unwrap();
        let perturbed = sys
            .covariant_derivative_along(
                |t| {
                    let y = sys.action_flow(&eta, t * t, &x)?;
                    sys.action_flow(&xi_r, t, &y)
                },
                |t| {
                    let y = sys.action_flow(&eta, t * t, &x)?;
                    let vy = sys.flow_pushforward(&eta, t * t, &x, &v)?;
                    sys.flow_pushforward(&xi_r, t, &y, &vy)
                },
                0.0,
            )
            .unwrap();
        let a = split.slice_coords(&reference);
        let b = split.slice_coords(&perturbed);
        assert!((a - b).norm() < 1e-7);
    }
}

#[test]
fn slice_precondition_is_enforced() {
    let case = &catalog_cases()[0];
    let sys = &case.entry.system;
    let split = case.split();
    let not_slice = split.generators.column(0).into_owned();
    let err = sys
        .tube_extension_derivative(&split.x(), &not_slice, &split.xi_perp())
        .unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}

#[test]
fn chart_domain_errors() {
    let case = &catalog_cases()[0];
    let far = DVector::from_vec(vec![2.0, 0.0, 0.0]);
    assert!(matches!(case.entry.system.metric(&far), Err(Error::ChartDomain(_))));
}
