//! Shooting-value sensitivity tests.
//!
//! The library computes the derivative with respect to the shooting value
//! by integrating the linearized system alongside the base one; every
//! result here is checked against central finite differences of the
//! underlying profile, which the library itself never uses.

use approx::assert_relative_eq;
use vss_core::params::{validate, ExponentConfig};
use vss_core::shooter::{self, IntegratorSettings, Termination};
use vss_core::variational::{self, OPERATOR_CHECK_MIN_RADIUS};

fn reference() -> vss_core::DerivedConstants {
    validate(ExponentConfig::new(1, 1.5, 0.9)).unwrap()
}

#[test]
fn series_derivative_matches_finite_differences() {
    let consts = reference();
    let h = 1e-6;
    // The sensitivity series stops one order before the profile series
    // (its quadratic-flux derivative is dropped), so compare at radii
    // where that order sits below the tolerance — which is the regime
    // the series is actually used in: handoff radii are below 1e-4.
    for lambda in [1.0, 0.7] {
        for r in [1e-5, 1e-4, 1e-3] {
            let (fa, fa_prime) = variational::variational_series_weighted(1.0, r, lambda, &consts);
            let (f_plus, fp_plus) = shooter::series_eval_weighted(1.0 + h, r, lambda, &consts);
            let (f_minus, fp_minus) = shooter::series_eval_weighted(1.0 - h, r, lambda, &consts);
            let fa_fd = (f_plus - f_minus) / (2.0 * h);
            let fap_fd = (fp_plus - fp_minus) / (2.0 * h);
            assert_relative_eq!(fa, fa_fd, max_relative = 1e-8);
            assert!(
                (fa_prime - fap_fd).abs() <= 1e-8 * fa_prime.abs().max(1e-8),
                "fa' {fa_prime} vs finite difference {fap_fd} at r = {r}"
            );
        }
    }
}

#[test]
fn series_derivative_absorption_term_has_the_closed_form() {
    let consts = reference();
    let r: f64 = 0.1;
    let (fa1, _) = variational::variational_series_weighted(1.0, r, 1.0, &consts);
    let (fa0, _) = variational::variational_series_weighted(1.0, r, 0.0, &consts);
    // The lambda-linear term is (2+q-p) A2 / ((p-1) a) r^((p+q)/(p-1)).
    let a2 = 25.0 / 168.0 * 4.0f64.powf(1.4);
    let b2 = 1.4 * a2 / 0.5;
    assert_relative_eq!(fa1 - fa0, b2 * r.powf(4.8), max_relative = 1e-10);
}

#[test]
fn integrated_sensitivity_matches_finite_differences() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (base, var) = variational::integrate_variational(1.0, &consts, &settings).unwrap();
    assert_eq!(base.samples.len(), var.samples.len());

    let h = 1e-5;
    let probe = |a: f64, r_target: f64| {
        let r0 = settings.handoff_radius(a, &consts);
        let st = shooter::series_state(a, r0, 1.0, &consts);
        let out = shooter::advance(st, r_target, 1.0, &consts, &settings).unwrap();
        (out.f, shooter::fprime_from_flux(out.flux, &consts))
    };

    let mut compared = 0usize;
    for (s, v) in base
        .samples
        .iter()
        .zip(var.samples.iter())
        .filter(|(s, _)| s.r >= 0.05 && s.r <= 1.0)
        .step_by(16)
    {
        let (f_plus, fp_plus) = probe(1.0 + h, s.r);
        let (f_minus, fp_minus) = probe(1.0 - h, s.r);
        let fa_fd = (f_plus - f_minus) / (2.0 * h);
        let fap_fd = (fp_plus - fp_minus) / (2.0 * h);
        assert!(
            (v.fa - fa_fd).abs() <= 1e-6 * v.fa.abs().max(0.1),
            "fa {} vs finite difference {fa_fd} at r = {}",
            v.fa,
            s.r
        );
        assert!(
            (v.fa_prime - fap_fd).abs() <= 1e-6 * v.fa_prime.abs().max(0.1),
            "fa' {} vs finite difference {fap_fd} at r = {}",
            v.fa_prime,
            s.r
        );
        compared += 1;
    }
    assert!(compared >= 5, "too few comparison radii: {compared}");
}

#[test]
fn sensitivity_grid_aligns_with_the_base_profile() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (base, var) = variational::integrate_variational(1.0, &consts, &settings).unwrap();

    // Same radii, sample by sample; origin row carries fa(0) = 1.
    assert_eq!(base.samples.len(), var.samples.len());
    for (s, v) in base.samples.iter().zip(var.samples.iter()) {
        assert_eq!(s.r, v.r);
    }
    assert_eq!(var.samples[0].r, 0.0);
    assert_eq!(var.samples[0].fa, 1.0);
    assert_eq!(var.samples[0].fa_prime, 0.0);
    assert_eq!(var.samples[0].wa, 0.0);

    // The base profile is the ordinary one: same termination class as a
    // stand-alone integration at the same shooting value.
    let plain = shooter::integrate(1.0, &consts, &settings).unwrap();
    assert!(matches!(
        (base.termination, plain.termination),
        (
            Termination::WCrossedPlateau { .. },
            Termination::WCrossedPlateau { .. }
        )
    ));

    // Sensitivity to the center value is positive everywhere here.
    assert!(var.samples.iter().all(|v| v.fa > 0.0));
}

#[test]
fn gap_coefficient_has_the_closed_form() {
    let consts = reference();
    // (2q - p)/(2 - p) * C2 * c^(q - p + 2) with c = 4 at a = 1.
    let expected = 0.6 * (25.0 / 168.0) * 4.0f64.powf(1.4);
    assert_relative_eq!(
        variational::gap_leading_coefficient(1.0, &consts),
        expected,
        max_relative = 1e-13
    );
    assert_relative_eq!(
        variational::gap_leading_coefficient(1.0, &consts),
        0.6218218309,
        max_relative = 1e-9
    );
}

#[test]
fn monotonicity_gap_stays_positive_with_predicted_minimum() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (base, var) = variational::integrate_variational(1.0, &consts, &settings).unwrap();
    let report = variational::monotonicity_check(&base, &var, &consts);

    assert!(report.pass);
    assert!(report.samples_checked > 100);
    assert!(report.min_gap > 0.0);
    assert!(report.min_wa > 0.0);

    // The checked interval starts at the handoff radius, where both
    // extrema sit: w_a ~ r^mu there, and the gap follows its leading
    // term kappa2 r^(mu + (p+q)/(p-1)) below the cancellation radius.
    let r0 = base.r_switch;
    assert_relative_eq!(report.valid_range.0, r0, max_relative = 1e-12);
    assert_relative_eq!(report.min_wa, r0.powi(3), max_relative = 1e-5);
    let kappa2 = variational::gap_leading_coefficient(1.0, &consts);
    assert_relative_eq!(
        report.min_gap,
        kappa2 * r0.powf(3.0 + 4.8),
        max_relative = 1e-10
    );
    // Cancellation radius (100 eps mu a / kappa2)^((p-1)/(p+q)), frozen.
    assert_relative_eq!(report.series_radius, 1.9856e-3, max_relative = 1e-4);
    assert!(report.valid_range.1 > report.series_radius);
}

#[test]
fn monotonicity_interval_ends_at_the_slope_flip_on_extinction_orbits() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (base, var) = variational::integrate_variational(0.1, &consts, &settings).unwrap();
    assert!(matches!(base.termination, Termination::FHitZero { .. }));
    let flip = base.r_flip.expect("extinction orbits flip w' once");

    let report = variational::monotonicity_check(&base, &var, &consts);
    assert!(report.pass);
    assert!(report.min_gap > 0.0);
    assert!(report.min_wa > 0.0);
    // The checked interval is exactly the initial w' > 0 stretch.
    assert!(report.valid_range.1 <= flip);
    let next_after = base
        .samples
        .iter()
        .find(|s| s.r > report.valid_range.1)
        .expect("samples continue past the flip");
    assert!(next_after.wprime <= 0.0);
}

#[test]
fn linearized_identities_hold_along_the_orbit() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (base, var) = variational::integrate_variational(1.0, &consts, &settings).unwrap();

    let report = variational::linearized_residual(&base, &var, &consts, 0.1);
    assert!(report.samples_checked >= 16);
    assert!(report.r_range.0 >= 0.1);
    assert!(
        report.max_normalized_residual < 1e-12,
        "operator on w_a should vanish, residual {:e}",
        report.max_normalized_residual
    );
    assert!(
        report.max_closed_form_deviation < 1e-9,
        "operator on r w' should match its closed form, deviation {:e}",
        report.max_closed_form_deviation
    );
    assert!(report.all_negative);

    // Farther out the identity resolves even more sharply.
    let far = variational::linearized_residual(&base, &var, &consts, 0.5);
    assert!(far.max_closed_form_deviation < 1e-12);

    // Near the floor the cancellation costs accuracy but the sign and
    // rough magnitude survive in double precision.
    let near = variational::linearized_residual(&base, &var, &consts, OPERATOR_CHECK_MIN_RADIUS);
    assert!(near.max_closed_form_deviation < 1e-4);
    assert!(near.all_negative);
    assert!(near.samples_checked > report.samples_checked);
}

#[test]
fn diagnostic_rows_agree_with_the_aggregate_reports() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (base, var) = variational::integrate_variational(1.0, &consts, &settings).unwrap();
    let rows = variational::diagnostic_samples(&base, &var, &consts, 0.1);

    // One row per sample, on exactly the base radius grid, with the origin
    // row present and trivial.
    assert_eq!(rows.len(), base.samples.len());
    for (row, s) in rows.iter().zip(&base.samples) {
        assert_eq!(row.r, s.r);
    }
    assert_eq!(rows[0].r, 0.0);
    assert_eq!(rows[0].mono_gap, 0.0);
    assert!(rows[0].la_wa.is_none() && rows[0].la_rwprime.is_none());

    // The gap column reproduces the aggregate minimum over the w' > 0
    // stretch bit for bit (same evaluation policy).
    let report = variational::monotonicity_check(&base, &var, &consts);
    let min_gap = rows
        .iter()
        .zip(&base.samples)
        .skip(1)
        .take_while(|(_, s)| s.wprime > 0.0)
        .map(|(row, _)| row.mono_gap)
        .fold(f64::INFINITY, f64::min);
    assert_eq!(min_gap, report.min_gap);

    // Operator columns appear exactly from the requested floor on, vanish
    // on w_a up to roundoff, and stay negative on r w'.
    let lin = variational::linearized_residual(&base, &var, &consts, 0.1);
    let mut checked = 0usize;
    for (row, s) in rows.iter().zip(&base.samples) {
        if row.r < 0.1 {
            assert!(row.la_wa.is_none());
            continue;
        }
        if s.f <= 0.0 || s.fprime == 0.0 {
            continue;
        }
        let la_rw = row.la_rwprime.expect("operator value past the floor");
        assert!(la_rw < 0.0);
        assert!(row.la_wa.is_some());
        checked += 1;
    }
    assert_eq!(checked, lin.samples_checked);
}

#[test]
fn rejects_invalid_shooting_values() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    assert!(variational::integrate_variational(0.0, &consts, &settings).is_err());
    assert!(variational::integrate_variational(-1.0, &consts, &settings).is_err());
    assert!(variational::integrate_variational(f64::NAN, &consts, &settings).is_err());
}
