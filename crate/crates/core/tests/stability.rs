mod common;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use common::{catalog_cases, cases_for, Case};
use remstab::geometry::ChartedSystem;
use remstab::lie_algebra::LieAlgebraSpec;
use remstab::linalg;
use remstab::splitting::{build_splitting, SplittingOptions};
use remstab::stability::{
    arnold_form, block_corollary_test, block_forms, correction_term, full_em_test, isotypic_subblocks,
    isotypic_subblocks_with_actions, omega_crosscheck, regular_case_amended_check, rem_test, Complement,
    LinearAction, Route, StabilityOptions, StabilityReport, Verdict,
};

fn opts() -> StabilityOptions {
    StabilityOptions::default()
}

/// Slice Hessian eigenvalue of the sleeping top with `ip = diag(k, 1)` in a metric-orthonormal
/// basis, from the small-angle expansion of the kinetic and potential energies.
fn top_slice_eigenvalue(i: f64, i3: f64, mgl: f64, zeta: f64, k: f64) -> f64 {
    (zeta * zeta * (i3 * (1.0 + k) - i) / (1.0 + k).powi(2) - mgl) / i
}

#[test]
fn sleeping_top_hessian_matches_small_angle_expansion() {
    for (i, i3, zeta, k) in [(1.0, 1.5, 2.0, 1.0), (1.0, 1.5, 1.0, 1.0), (2.0, 1.0, 3.0, 3.0), (1.0, 0.8, 0.5, 0.4)] {
        let case = cases_for("lagrange_top", &[("i", i), ("i3", i3), ("zeta", zeta)]).remove(0);
        let split = case.split_with(&[k], SplittingOptions::default());
        let (_, form) = rem_test(&case.entry.system, &split, &opts()).unwrap();
        let expect = top_slice_eigenvalue(i, i3, 1.0, zeta, k);
        assert_eq!(form.dim(), 2);
        for e in &form.eigenvalues {
            assert!((e - expect).abs() < 1e-6 * (1.0 + expect.abs()), "{e} vs {expect}");
        }
    }
}

#[test]
fn sleeping_top_verdicts() {
    for (zeta, verdict) in [(2.0, Verdict::GmuStable), (1.0, Verdict::Inconclusive), (0.0, Verdict::Inconclusive)] {
        let case = cases_for("lagrange_top", &[("zeta", zeta)]).remove(0);
        let (report, _) = rem_test(&case.entry.system, &case.split(), &opts()).unwrap();
        assert_eq!(report.verdict, verdict, "zeta = {zeta}");
        assert_eq!(report.route, Route::RemPositiveBranch);
        assert_eq!(report.dim_check, 2);
    }
}

#[test]
fn correction_vanishes_for_the_top() {
    for zeta in [0.5, 2.0, 3.0] {
        let case = cases_for("lagrange_top", &[("zeta", zeta), ("m", 2.0)]).remove(0);
        let split = case.split();
        let corr = correction_term(&case.entry.system, &split, &split.sigma.vectors).unwrap();
        assert!(linalg::norm2(&corr) <= 1e-8 * 2.0);
    }
}

#[test]
fn conical_pendulum_matches_amended_potential() {
    for (theta0, g, l) in [(0.3f64, 1.0, 1.0), (0.9, 9.81, 0.5), (1.3, 2.0, 3.0)] {
        let case = cases_for("spherical_pendulum", &[("theta0", theta0), ("g", g), ("l", l)]).remove(0);
        let split = case.split();
        let (report, form) = rem_test(&case.entry.system, &split, &opts()).unwrap();
        let c = theta0.cos();
        let expect = g * (1.0 + 3.0 * c * c) / (l * c);
        assert_eq!(form.dim(), 1);
        assert!((form.eigenvalues[0] - expect).abs() < 1e-6 * expect, "{:?} vs {expect}", form.eigenvalues);
        assert_eq!(report.verdict, Verdict::GmuStable);
        let corr = correction_term(&case.entry.system, &split, &split.sigma.vectors).unwrap();
        assert!(linalg::sym_eigenvalues(&corr)[0] > 1e-6);
    }
}

#[test]
fn hanging_pendulum_is_stable() {
    let case = cases_for("spherical_pendulum", &[("theta0", 0.0), ("omega", 0.3)]).remove(0);
    let (report, _) = rem_test(&case.entry.system, &case.split(), &opts()).unwrap();
    assert_eq!(report.verdict, Verdict::GmuStable);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn correction_is_positive_semidefinite(theta0 in 0.05..1.45f64, seed in 0u64..50, coupling in -0.2..0.2f64) {
        let mut cases = cases_for("spherical_pendulum", &[("theta0", theta0)]);
        cases.extend(cases_for(
            "synthetic_product",
            &[("seed", seed as f64), ("coupling", coupling), ("rho1", 0.4), ("spectators", 2.0)],
        ));
        for case in cases {
            let split = case.split();
            let corr = correction_term(&case.entry.system, &split, &split.sigma.vectors).unwrap();
            let eigs = linalg::sym_eigenvalues(&corr);
            let scale = eigs.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
            prop_assert!(eigs.iter().all(|e| *e >= -1e-10 * scale), "{}: {:?}", case.name, eigs);
        }
    }
}

#[test]
fn top_arnold_form_is_empty() {
    let case = cases_for("lagrange_top", &[]).remove(0);
    let ar = arnold_form(&case.entry.system, &case.split()).unwrap();
    assert_eq!(ar.form.dim(), 0);
    assert!(ar.nondegenerate(1e-8));
}

/// Second variation of `|Pi|^2`-constrained energy of a free rigid body spinning about `axis`,
/// in rotation-vector coordinates of the perpendicular axes.
fn rigid_body_arnold(inertia: [f64; 3], axis: usize, omega: f64) -> DMatrix<f64> {
    let m = inertia[axis] * omega;
    DMatrix::from_fn(3, 3, |r, c| {
        if r != c || r == axis {
            0.0
        } else {
            let other = 3 - axis - r;
            m * m * (1.0 / inertia[other] - 1.0 / inertia[axis])
        }
    })
}

#[test]
fn rigid_body_arnold_form_matches_energy_casimir() {
    for (inertia, axis, omega) in [([1.0, 2.0, 3.0], 2, 1.0), ([1.0, 2.0, 3.0], 0, 0.7), ([1.0, 2.0, 3.0], 1, 1.3), ([2.0, 1.5, 0.5], 2, 2.0)] {
        let case = cases_for(
            "rigid_body",
            &[("i1", inertia[0]), ("i2", inertia[1]), ("i3", inertia[2]), ("axis", (axis + 1) as f64), ("omega", omega)],
        )
        .remove(0);
        let split = case.split();
        let ar = arnold_form(&case.entry.system, &split).unwrap();
        // generators are the identity at the identity chart point
        let t = &ar.form.basis.vectors;
        let expect = t.transpose() * rigid_body_arnold(inertia, axis, omega) * t;
        assert!((&ar.form.matrix - &expect).amax() < 1e-6 * (1.0 + expect.amax()), "{} vs {expect}", ar.form.matrix);
        // the full Sigma Hessian is the Arnold form here
        let (_, form) = rem_test(&case.entry.system, &split, &opts()).unwrap();
        assert!((&form.matrix - &expect).amax() < 1e-6 * (1.0 + expect.amax()));
    }
}

#[test]
fn rigid_body_verdicts() {
    let verdict = |axis: f64| {
        let case = cases_for("rigid_body", &[("axis", axis)]).remove(0);
        let (r, _) = rem_test(&case.entry.system, &case.split(), &opts()).unwrap();
        assert_eq!(r.route, Route::RemDefiniteBranch);
        r.verdict
    };
    assert_eq!(verdict(1.0), Verdict::GmuStable);
    assert_eq!(verdict(2.0), Verdict::Inconclusive);
    assert_eq!(verdict(3.0), Verdict::GmuStable);
}

#[test]
fn degenerate_arnold_form_makes_corollary_not_applicable() {
    let case = cases_for("rigid_body", &[("i1", 3.0), ("i2", 2.0), ("i3", 3.0)]).remove(0);
    let split = case.split();
    let ar = arnold_form(&case.entry.system, &split).unwrap();
    assert!(!ar.nondegenerate(1e-8));
    let report = block_corollary_test(&case.entry.system, &split, &opts()).unwrap();
    assert_eq!(report.verdict, Verdict::NotApplicable);
    assert!(block_forms(&case.entry.system, &split, &opts()).is_err());
}

fn applicable(case: &Case) -> bool {
    arnold_form(&case.entry.system, &case.split()).unwrap().nondegenerate(1e-8)
}

#[test]
fn corollary_agrees_with_rem() {
    for case in catalog_cases() {
        let split = case.split();
        let (rem, _) = rem_test(&case.entry.system, &split, &opts()).unwrap();
        let cor = block_corollary_test(&case.entry.system, &split, &opts()).unwrap();
        if applicable(&case) {
            assert_eq!(rem.verdict, cor.verdict, "{}", case.name);
        } else {
            assert_eq!(cor.verdict, Verdict::NotApplicable);
        }
    }
}

#[test]
fn block_forms_are_consistent_on_the_catalog() {
    for case in catalog_cases() {
        if !applicable(&case) {
            continue;
        }
        let sys = &case.entry.system;
        let split = case.split();
        let forms = block_forms(sys, &split, &opts()).unwrap();
        assert!(forms.off_block_ratio() <= 1e-6, "{}: {:?}", case.name, forms.residuals);
        assert!(forms.residuals["omega_antisymmetry"] <= 1e-9, "{}", case.name);
        assert!(forms.residuals["omega_phase"] <= 1e-6, "{}", case.name);
        assert!(forms.residuals["kappa_in_ker_dj"] <= 1e-6, "{}", case.name);
        let cross = omega_crosscheck(sys, &split, &forms).unwrap();
        assert!(cross.residual <= 1e-6, "{}: {}", case.name, cross.residual);
        let sv = forms.omega.full.singular_values();
        if !sv.is_empty() {
            assert!(sv.min() > 1e-8 * sv.max(), "{}: {sv}", case.name);
        }
    }
}

#[test]
fn top_omega_carries_a_gyroscopic_block() {
    let case = cases_for("lagrange_top", &[("zeta", 2.0)]).remove(0);
    let forms = block_forms(&case.entry.system, &case.split(), &opts()).unwrap();
    let s = &forms.omega.s_mu;
    assert_eq!(s.shape(), (2, 2));
    assert!((s + s.transpose()).amax() < 1e-9);
    assert!(s.amax() > 0.1);
    // vanishes with the spin
    let still = cases_for("lagrange_top", &[("zeta", 0.0)]).remove(0);
    let forms = block_forms(&still.entry.system, &still.split(), &opts()).unwrap();
    assert!(forms.omega.s_mu.amax() < 1e-9);
}

#[test]
fn oracle_agrees_with_rem_on_the_catalog() {
    for case in catalog_cases() {
        let sys = &case.entry.system;
        let split = case.split();
        let (rem, _) = rem_test(sys, &split, &opts()).unwrap();
        let oracle = full_em_test(sys, &case.re.x, &case.re.xi, &case.ip(), Complement::Orthogonal, &opts()).unwrap();
        assert_eq!(oracle.report.verdict, rem.verdict, "{}", case.name);
        assert_eq!(oracle.vs_dim, split.qmu.dim() + 2 * split.slice.dim());
    }
}

#[test]
fn oracle_signature_ignores_the_complement() {
    for case in catalog_cases() {
        let sys = &case.entry.system;
        let base = full_em_test(sys, &case.re.x, &case.re.xi, &case.ip(), Complement::Orthogonal, &opts()).unwrap();
        for seed in [3, 17, 99] {
            let other = full_em_test(sys, &case.re.x, &case.re.xi, &case.ip(), Complement::Random(seed), &opts()).unwrap();
            assert_eq!(other.inertia, base.inertia, "{} seed {seed}", case.name);
        }
    }
}

#[test]
fn isotypic_blocks_of_the_top() {
    let case = cases_for("lagrange_top", &[("zeta", 2.0)]).remove(0);
    let sys = &case.entry.system;
    let split = case.split();
    let (_, form) = rem_test(sys, &split, &opts()).unwrap();
    let out = isotypic_subblocks(sys, &split, &form, &[split.h.vector(0)]).unwrap();
    assert!(out.applicable);
    assert_eq!(out.components.len(), 1);
    assert_eq!(out.components[0].dim(), 2);
    let e = &out.components[0].eigenvalues;
    assert!((e[0] - e[1]).abs() < 1e-6);
}

#[test]
fn isotypic_blocks_of_a_reflection() {
    let case = cases_for("synthetic_product", &[("spectators", 1.0)]).remove(0);
    let split = case.split();
    let (_, form) = rem_test(&case.entry.system, &split, &opts()).unwrap();
    let n = case.entry.system.dim();
    let mut flip = DMatrix::identity(n, n);
    flip[(n - 1, n - 1)] = -1.0;
    let out = isotypic_subblocks_with_actions(&split, &form, &[LinearAction::Element(flip)]).unwrap();
    assert!(out.applicable);
    assert_eq!(out.components.len(), 2);
    assert_eq!(out.components.iter().map(|c| c.dim()).sum::<usize>(), form.dim());
    assert!(out.cross_block_residual < 1e-8);
}

#[test]
fn isotypic_requires_invariance() {
    let case = cases_for("synthetic_product", &[("spectators", 1.0)]).remove(0);
    let split = case.split();
    let (_, form) = rem_test(&case.entry.system, &split, &opts()).unwrap();
    let n = case.entry.system.dim();
    // a shear mixing the spectator into the orbit direction
    let mut shear = DMatrix::identity(n, n);
    shear[(1, n - 1)] = 1.0;
    let out = isotypic_subblocks_with_actions(&split, &form, &[LinearAction::Element(shear)]).unwrap();
    assert!(!out.applicable);
}

#[test]
fn amended_check_on_free_actions() {
    for case in cases_for("spherical_pendulum", &[("theta0", 0.7)])
        .into_iter()
        .take(1)
        .chain(cases_for("rigid_body", &[]))
        .chain(cases_for("rigid_body", &[("internal", 1.0)]))
    {
        let check = regular_case_amended_check(&case.entry.system, &case.split()).unwrap();
        assert!(check.applicable);
        assert!(check.passes, "{}: {check:?}", case.name);
    }
    let top = cases_for("lagrange_top", &[]).remove(0);
    assert!(!regular_case_amended_check(&top.entry.system, &top.split()).unwrap().applicable);
}

#[test]
fn flat_potential_is_inconclusive() {
    let case = cases_for(
        "synthetic_product",
        &[("a0", 0.0), ("b0", 0.0), ("a1", 0.0), ("b1", 0.0), ("rho0", 0.0), ("c0", 0.0)],
    )
    .remove(0);
    let (report, form) = rem_test(&case.entry.system, &case.split(), &opts()).unwrap();
    assert!(form.eigenvalues.iter().all(|e| e.abs() < 1e-8));
    assert_eq!(report.verdict, Verdict::Inconclusive);
}

#[test]
fn decoupled_product_has_the_union_spectrum() {
    let full = cases_for("synthetic_product", &[("seed", 4.0), ("spectators", 1.0)]).remove(0);
    let Some(remstab::catalog::Analytic::Synthetic(sp)) = full.entry.analytic.clone() else {
        panic!("synthetic parameters")
    };
    let (_, form) = rem_test(&full.entry.system, &full.split(), &opts()).unwrap();
    let single = cases_for(
        "synthetic_product",
        &[
            ("planes", 1.0),
            ("spectators", 0.0),
            ("w0", sp.weights[0]),
            ("a0", sp.quadratic[0]),
            ("b0", sp.quartic[0]),
        ],
    )
    .remove(0);
    let (_, part) = rem_test(&single.entry.system, &single.split(), &opts()).unwrap();
    let mut expect = part.eigenvalues.clone();
    expect.push(2.0 * sp.quadratic[1] / sp.weights[1]);
    expect.push(2.0 * sp.quadratic[1] / sp.weights[1]);
    expect.push(2.0 * sp.spectator[0]);
    expect.sort_by(f64::total_cmp);
    assert_eq!(form.eigenvalues.len(), expect.len());
    for (a, b) in form.eigenvalues.iter().zip(&expect) {
        assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{:?} vs {expect:?}", form.eigenvalues);
    }
}

#[test]
fn trivial_group_reduces_to_the_potential_hessian() {
    let sys = ChartedSystem::new(
        "bowl",
        2,
        LieAlgebraSpec::abelian(0),
        |_| DMatrix::identity(2, 2),
        |q| q[0] * q[0] + 2.0 * q[1] * q[1],
        |_| DMatrix::zeros(2, 0),
    );
    let (x, xi, ip) = (DVector::zeros(2), DVector::zeros(0), DMatrix::zeros(0, 0));
    let split = build_splitting(&sys, &x, &xi, &ip, &SplittingOptions::default()).unwrap();
    let (report, form) = rem_test(&sys, &split, &opts()).unwrap();
    assert!((form.eigenvalues[0] - 2.0).abs() < 1e-6 && (form.eigenvalues[1] - 4.0).abs() < 1e-6);
    assert_eq!(report.verdict, Verdict::GmuStable);
    let oracle = full_em_test(&sys, &x, &xi, &ip, Complement::Orthogonal, &opts()).unwrap();
    assert_eq!(oracle.report.verdict, Verdict::GmuStable);
    assert_eq!(oracle.vs_dim, 4);
}

#[test]
fn report_json_round_trip() {
    for case in catalog_cases().into_iter().take(4) {
        let (report, _) = rem_test(&case.entry.system, &case.split(), &opts()).unwrap();
        let text = serde_json::to_string(&report).unwrap();
        let back: StabilityReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        assert!(text.contains("\"verdict\""));
    }
}

