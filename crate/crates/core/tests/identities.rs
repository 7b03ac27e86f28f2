mod common;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{catalog_cases, identity_worst_error};
use remstab::identities::{connection_identities, IdentityInputs};
use remstab::splitting::orbit_splitting;
use remstab::Error;

#[test]
fn identities_hold_on_every_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1d);
    for case in catalog_cases() {
        let (err, at) = identity_worst_error(&case, &mut rng, 12, 1e-3);
        assert!(err <= 1e-5, "{err:e} at {at}");
    }
}

#[test]
fn all_five_items_are_reported() {
    let case = catalog_cases().remove(0);
    let sys = &case.entry.system;
    let orbit = orbit_splitting(sys, &case.re.x, 1e-9).unwrap();
    let inp = IdentityInputs {
        xi_i: DVector::from_vec(vec![1.0, 0.0]),
        xi_j: DVector::from_vec(vec![0.3, 0.4]),
        xi: DVector::from_vec(vec![0.0, 1.0]),
        lambda: DVector::from_vec(vec![0.5, -0.5]),
        v: orbit.slice.column(0).into_owned(),
        w: orbit.slice.column(1).into_owned(),
    };
    let items: Vec<String> = connection_identities(sys, &case.re.x, &orbit, &inp)
        .unwrap()
        .into_iter()
        .map(|c| c.item)
        .collect();
    for want in ["i", "ii", "iii", "iv", "v"] {
        assert!(items.iter().any(|i| i == want), "{items:?}");
    }
}

#[test]
fn non_slice_inputs_are_rejected() {
    let case = catalog_cases().remove(0);
    let sys = &case.entry.system;
    let orbit = orbit_splitting(sys, &case.re.x, 1e-9).unwrap();
    let inp = IdentityInputs {
        xi_i: DVector::zeros(2),
        xi_j: DVector::zeros(2),
        xi: DVector::zeros(2),
        lambda: DVector::zeros(2),
        v: DVector::from_vec(vec![0.0, 0.0, 1.0]),
        w: orbit.slice.column(0).into_owned(),
    };
    let err = connection_identities(sys, &case.re.x, &orbit, &inp).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)));
}
