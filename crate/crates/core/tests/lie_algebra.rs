use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use remstab::lie_algebra::LieAlgebraSpec;
use remstab::linalg;
use remstab::Error;

fn vec3() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0f64, 3).prop_map(DVector::from_vec)
}

fn cross(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// The two-dimensional non-abelian algebra `[e0, e1] = e1`.
fn affine() -> LieAlgebraSpec {
    LieAlgebraSpec::from_entries("aff", 2, &[(0, 1, 1, 1.0), (1, 0, 1, -1.0)]).unwrap()
}

proptest! {
    #[test]
    fn so3_bracket_is_the_cross_product(a in vec3(), b in vec3()) {
        let g = LieAlgebraSpec::so3();
        let br = g.bracket(&a, &b).unwrap();
        prop_assert!((br - cross(&a, &b)).norm() < 1e-12);
    }

    #[test]
    fn bracket_is_antisymmetric_and_satisfies_jacobi(a in vec3(), b in vec3(), c in vec3()) {
        let g = LieAlgebraSpec::so3();
        let br = |x: &DVector<f64>, y: &DVector<f64>| g.bracket(x, y).unwrap();
        prop_assert!((br(&a, &b) + br(&b, &a)).norm() < 1e-12);
        let jac = br(&a, &br(&b, &c)) + br(&b, &br(&c, &a)) + br(&c, &br(&a, &b));
        prop_assert!(jac.norm() < 1e-10);
    }

    #[test]
    fn coadjoint_is_the_dual_of_ad(l in vec3(), mu in vec3(), eta in vec3()) {
        let g = LieAlgebraSpec::so3();
        let lhs = g.coadjoint(&l, &mu).unwrap().dot(&eta);
        let rhs = mu.dot(&g.bracket(&l, &eta).unwrap());
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn momentum_isotropy_fixes_mu(mu in vec3()) {
        prop_assume!(mu.norm() > 1e-3);
        let g = LieAlgebraSpec::so3();
        let gmu = g.momentum_isotropy_algebra(&mu, 1e-9).unwrap();
        prop_assert_eq!(gmu.dim(), 1);
        for v in gmu.iter() {
            prop_assert!(g.coadjoint(&v, &mu).unwrap().norm() < 1e-10);
        }
        // rank-nullity for ad*_. mu
        let l = DMatrix::from_fn(3, 3, |r, c| {
            let e = DVector::from_fn(3, |k, _| if k == c { 1.0 } else { 0.0 });
            g.coadjoint(&e, &mu).unwrap()[r]
        });
        prop_assert_eq!(linalg::rank(&l, 1e-9) + gmu.dim(), 3);
    }

    #[test]
    fn affine_isotropy_dimension(m0 in -2.0..2.0f64, m1 in -2.0..2.0f64) {
        prop_assume!(m1.abs() > 1e-3);
        let g = affine();
        let mu = DVector::from_vec(vec![m0, m1]);
        let gmu = g.momentum_isotropy_algebra(&mu, 1e-9).unwrap();
        prop_assert_eq!(gmu.dim(), 0);
    }

    #[test]
    fn scaled_killing_forms_are_invariant(s in 0.1..5.0f64) {
        let g = LieAlgebraSpec::so3();
        let ip = g.invariant_inner_product_family(&[s, s, s]).unwrap();
        prop_assert!(g.ad_invariance_residual(&ip) < 1e-12);
    }

    #[test]
    fn every_positive_diagonal_is_invariant_on_abelian_algebras(d in prop::collection::vec(0.1..5.0f64, 1..5)) {
        let g = LieAlgebraSpec::abelian(d.len());
        let ip = g.invariant_inner_product_family(&d).unwrap();
        prop_assert_eq!(g.ad_invariance_residual(&ip), 0.0);
    }
}

#[test]
fn zero_momentum_has_full_isotropy() {
    let g = LieAlgebraSpec::so3();
    assert_eq!(g.momentum_isotropy_algebra(&DVector::zeros(3), 1e-9).unwrap().dim(), 3);
}

#[test]
fn unequal_diagonal_is_not_so3_invariant() {
    let g = LieAlgebraSpec::so3();
    let ip = g.invariant_inner_product_family(&[1.0, 2.0, 1.0]).unwrap();
    assert!(g.ad_invariance_residual(&ip) > 0.5);
}

#[test]
fn bad_structure_constants_are_rejected() {
    // only one ordering given: not antisymmetric
    let err = LieAlgebraSpec::from_entries("bad", 2, &[(0, 1, 1, 1.0)]).unwrap_err();
    assert!(matches!(err, Error::InvalidAlgebra(_)));
    // antisymmetric, [e0, e1] = e2 and [e1, e2] = e1 violate Jacobi
    let err = LieAlgebraSpec::from_entries(
        "bad",
        3,
        &[(0, 1, 2, 1.0), (1, 0, 2, -1.0), (1, 2, 1, 1.0), (2, 1, 1, -1.0)],
    )
    .unwrap_err();
    assert!(matches!(err, Error::InvalidAlgebra(_)));
    assert!(LieAlgebraSpec::from_entries("bad", 2, &[(0, 2, 1, 1.0)]).is_err());
}

#[test]
fn inner_product_parameters_are_validated() {
    let g = LieAlgebraSpec::abelian(2);
    assert!(g.invariant_inner_product_family(&[1.0, -1.0]).is_err());
    assert!(g.invariant_inner_product_family(&[1.0, 2.0, 3.0, 4.0]).is_err());
    assert!(g.invariant_inner_product_family(&[f64::NAN]).is_err());
    let packed = g.invariant_inner_product_family(&[2.0, 0.5, 1.0]).unwrap();
    assert_eq!(packed, DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]));
    assert!(g.bracket(&DVector::zeros(3), &DVector::zeros(2)).is_err());
}
