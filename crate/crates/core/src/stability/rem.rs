use super::hessian::restricted_augmented_hessian;
use super::{QuadraticFormOnBasis, Route, Sign, StabilityOptions, StabilityReport, Verdict};
use crate::error::Result;
use crate::geometry::ChartedSystem;
use crate::linalg;
use crate::splitting::SplittingData;

/// Definiteness test of `d^2 V_{xi_perp} + corr` on `Sigma`. Positive definiteness is
/// required when the slice is nontrivial, definiteness of either sign otherwise.
pub fn rem_test(sys: &ChartedSystem, split: &SplittingData, opts: &StabilityOptions) -> Result<(StabilityReport, QuadraticFormOnBasis)> {
    let form = restricted_augmented_hessian(sys, split)?;
    let dim_check = split.dim_check();
    let tol = form.tolerance(opts.definiteness_rel);
    let sign = form.sign(opts.definiteness_rel);
    let (route, stable, margin) = if dim_check > 0 {
        let margin = form.min_eigenvalue().unwrap_or(f64::INFINITY);
        (Route::RemPositiveBranch, sign == Sign::Positive, margin)
    } else {
        let lo = form.eigenvalues.first().copied().unwrap_or(f64::INFINITY);
        let hi = form.eigenvalues.last().copied().unwrap_or(-f64::INFINITY);
        (
            Route::RemDefiniteBranch,
            matches!(sign, Sign::Positive | Sign::Negative | Sign::Empty),
            lo.max(-hi),
        )
    };
    let verdict = if stable { Verdict::GmuStable } else { Verdict::Inconclusive };
    let mut report = StabilityReport::new(verdict, route, split, opts);
    report.block_spectra.insert("sigma_hessian".into(), form.eigenvalues.clone());
    report.residuals.insert("definiteness_tol".into(), tol);
    if margin.is_finite() {
        report.residuals.insert("margin".into(), margin);
    }
    let corr = super::correction::correction_term(sys, split, &split.sigma.vectors)?;
    report.residuals.insert("correction_norm".into(), linalg::norm2(&corr));
    if sign == Sign::Empty {
        report.assumptions.push("Sigma is the zero space: the definiteness condition holds vacuously".into());
    }
    Ok((report, form))
}
