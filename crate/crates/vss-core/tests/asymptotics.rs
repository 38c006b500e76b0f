//! Tail-measurement tests on synthetic profiles with known laws, plus two
//! integrated orbits as end-to-end checks.
//!
//! Synthetic samples are built directly from closed-form `f`, so every
//! fitted quantity has an exact target: a pure power law must come back
//! with its exponent and amplitude, a perturbed one with the perturbation's
//! decay rate, and a shifted plateau with its entry radius.

use vss_core::asymptotics::{self, TailKind};
use vss_core::classifier::log_grid;
use vss_core::error::Error;
use vss_core::params::{validate, ExponentConfig};
use vss_core::shooter::{self, IntegratorSettings, PlateauCrossing, Sample};

fn reference() -> vss_core::DerivedConstants {
    validate(ExponentConfig::new(1, 1.5, 0.9)).unwrap()
}

/// Samples with consistent `(f, f', w, w')` built from closed forms.
fn synth(
    radii: &[f64],
    consts: &vss_core::DerivedConstants,
    f_of: impl Fn(f64) -> f64,
    fp_of: impl Fn(f64) -> f64,
) -> Vec<Sample<f64>> {
    radii
        .iter()
        .map(|&r| {
            let f = f_of(r);
            let fprime = fp_of(r);
            Sample {
                r,
                f,
                fprime,
                w: r.powf(consts.mu) * f,
                wprime: r.powf(consts.mu - 1.0) * (r * fprime + consts.mu * f),
                energy: 0.0,
            }
        })
        .collect()
}

#[test]
fn tail_fit_recovers_pure_power_laws() {
    let consts = reference();
    let radii = log_grid(1.0, 1e4, 257);
    for (sigma, amp, kind) in [
        (1.5, 0.7, TailKind::Slow),
        (2.6, 0.7, TailKind::Fast),
        (3.0, 2.5, TailKind::Fast),
    ] {
        let samples = synth(
            &radii,
            &consts,
            |r| amp * r.powf(-sigma),
            |r| -sigma * amp * r.powf(-sigma - 1.0),
        );
        let fit = asymptotics::fit_tail(&samples, (10.0, 1e4), &consts).unwrap();
        assert!(
            (fit.exponent - sigma).abs() < 1e-10,
            "exponent {} for sigma {sigma}",
            fit.exponent
        );
        assert!((fit.amplitude / amp - 1.0).abs() < 1e-10);
        assert!(fit.residual < 1e-11);
        assert_eq!(fit.kind, kind);
        assert!(fit.window.0 >= 10.0 && fit.window.1 <= 1e4);
    }
}

#[test]
fn tail_fit_rejects_narrow_windows() {
    let consts = reference();
    let radii = log_grid(1.0, 1e4, 257);
    let samples = synth(&radii, &consts, |r| r.powf(-1.5), |r| -1.5 * r.powf(-2.5));
    // Plenty of samples but only 0.7 decades.
    assert!(matches!(
        asymptotics::fit_tail(&samples, (10.0, 50.0), &consts),
        Err(Error::WindowTooNarrow { .. })
    ));
    // Wide enough window but too few samples inside it.
    let sparse: Vec<Sample<f64>> = samples.iter().step_by(40).cloned().collect();
    assert!(matches!(
        asymptotics::fit_tail(&sparse, (10.0, 100.0), &consts),
        Err(Error::WindowTooNarrow { .. })
    ));
}

#[test]
fn slow_limit_averages_the_last_decade() {
    let consts = reference();
    let radii = log_grid(1.0, 1e4, 257);
    // k approaches 0.4 with a 1/r correction: well converged by r = 1e3.
    let samples = synth(
        &radii,
        &consts,
        |r| 0.4 * r.powf(-1.5) * (1.0 + 1e-3 / r),
        |r| 0.4 * (-1.5 * r.powf(-2.5) - 2.5e-3 * r.powf(-3.5)),
    );
    let slow = asymptotics::slow_limit_k(&samples, &consts).unwrap();
    assert!((slow.k / 0.4 - 1.0).abs() < 1e-5);
    assert!(slow.oscillation < 1e-4);
    assert!(slow.window.0 >= 1e3 * 0.99 && slow.window.1 <= 1e4 * 1.01);
}

#[test]
fn slow_limit_flags_drifting_tails() {
    let consts = reference();
    let radii = log_grid(1.0, 1e4, 257);
    // Wrong exponent: r^(alpha/beta) f = 0.4 r^0.05 drifts 12% per decade.
    let samples = synth(
        &radii,
        &consts,
        |r| 0.4 * r.powf(-1.45),
        |r| -0.58 * r.powf(-2.45),
    );
    assert!(matches!(
        asymptotics::slow_limit_k(&samples, &consts),
        Err(Error::NotConverged { .. })
    ));
}

#[test]
fn log_slope_diagnostic_recovers_limit_and_rate() {
    let consts = reference();
    let radii = log_grid(0.1, 1e6, 449);
    // Lambda = sigma + c theta r^-theta / (1 + c r^-theta) -> sigma at
    // exponential rate theta in tau = ln r.
    let (sigma, c, theta) = (1.5, 0.5, 0.75);
    let samples = synth(
        &radii,
        &consts,
        |r: f64| r.powf(-sigma) * (1.0 + c * r.powf(-theta)),
        |r: f64| {
            -sigma * r.powf(-sigma - 1.0) * (1.0 + c * r.powf(-theta))
                - c * theta * r.powf(-sigma - theta - 1.0)
        },
    );
    let diag = asymptotics::lambda_diagnostic(&samples).unwrap();
    assert!(
        (diag.limit_estimate - sigma).abs() < 1e-4,
        "limit {}",
        diag.limit_estimate
    );
    assert!(
        (diag.rate_estimate - theta).abs() < 0.01,
        "rate {}",
        diag.rate_estimate
    );
    // The trace only keeps r >= 1 and runs monotonically down to sigma.
    assert!(diag.tau_samples.first().unwrap().0 >= 0.0);
    assert!(diag.tau_samples.windows(2).all(|w| w[0].1 > w[1].1));
}

#[test]
fn log_slope_diagnostic_needs_three_decades() {
    let consts = reference();
    let radii = log_grid(0.1, 50.0, 173);
    let samples = synth(&radii, &consts, |r| r.powf(-1.5), |r| -1.5 * r.powf(-2.5));
    assert!(matches!(
        asymptotics::lambda_diagnostic(&samples),
        Err(Error::InsufficientTail { .. })
    ));
}

#[test]
fn plateau_report_measures_a_synthetic_plateau() {
    let consts = reference();
    let w_star = consts.w_star;
    let mu = consts.mu;
    let radii = log_grid(0.1, 1e6, 449);
    // w = w* (1 - d r^-s) enters the 5% band just above r = d/0.05.
    let (d, s) = (0.52, 1.0);
    let samples = synth(
        &radii,
        &consts,
        |r: f64| w_star * r.powf(-mu) * (1.0 - d * r.powf(-s)),
        |r: f64| w_star * r.powf(-mu - 1.0) * (-mu + (mu + s) * d * r.powf(-s)),
    );

    let window = asymptotics::plateau_window(&samples, &consts).expect("plateau exists");
    assert!(
        window.0 > 10.4 && window.0 < 10.8,
        "entry {} should sit just above d/0.05 = 10.4",
        window.0
    );
    assert!((window.1 / 1e6 - 1.0).abs() < 1e-9);

    let report = asymptotics::critical_asymptotics(&samples, &consts).unwrap();
    assert_eq!(report.plateau, window);
    assert!((report.plateau_decades - (1e6 / window.0).log10()).abs() < 1e-12);
    // Largest deviation and drift both occur at the entry radius:
    // |w - w*|/w* = d/r and |r w'|/(mu w*) = s d / (mu r).
    assert!((report.max_w_deviation - d / window.0).abs() < 1e-12);
    assert!((report.max_rwprime - s * d / (mu * window.0)).abs() < 1e-12);
    // f' / (-mu w* r^(-mu-1)) = 1 - (mu+s)/mu d r^-s across the plateau.
    let expected_lo = 1.0 - (mu + s) / mu * d / window.0;
    assert!((report.slope_ratio.0 - expected_lo).abs() < 1e-9);
    assert!(report.slope_ratio.1 < 1.0 + 1e-9);
    assert!(report.slope_ratio.0 > 0.9);
}

#[test]
fn plateau_report_requires_an_actual_plateau() {
    let consts = reference();
    let w_star = consts.w_star;
    let mu = consts.mu;
    let radii = log_grid(0.1, 1e4, 321);
    // w sits at w*/10 everywhere: no sample within the 5% band.
    let samples = synth(
        &radii,
        &consts,
        |r: f64| 0.1 * w_star * r.powf(-mu),
        |r: f64| -0.1 * w_star * mu * r.powf(-mu - 1.0),
    );
    match asymptotics::critical_asymptotics(&samples, &consts) {
        Err(Error::NoPlateau { min_deviation }) => {
            assert!((min_deviation - 0.9).abs() < 1e-12);
        }
        other => panic!("expected no plateau, got {other:?}"),
    }
    assert!(asymptotics::plateau_window(&samples, &consts).is_none());
}

#[test]
fn integrated_supercritical_orbit_has_the_slow_tail() {
    let consts = reference();
    let mut settings = IntegratorSettings::defaults();
    settings.r_max = 1e6;
    let profile = shooter::integrate_with(2.0, &consts, &settings, PlateauCrossing::Record)
        .expect("supercritical orbit integrates to the horizon");

    let fit = asymptotics::fit_tail(&profile.samples, (1e4, 1e6), &consts).unwrap();
    assert_eq!(fit.kind, TailKind::Slow);
    assert!(
        (fit.exponent / consts.slow_exponent - 1.0).abs() < 0.01,
        "exponent {}",
        fit.exponent
    );

    let slow = asymptotics::slow_limit_k(&profile.samples, &consts).unwrap();
    assert!((fit.amplitude / slow.k - 1.0).abs() < 0.01);

    let diag = asymptotics::lambda_diagnostic(&profile.samples).unwrap();
    assert!((diag.limit_estimate / consts.slow_exponent - 1.0).abs() < 1e-3);
}

#[test]
fn integrated_near_critical_orbit_shows_the_plateau_laws() {
    let consts = reference();
    let mut settings = IntegratorSettings::defaults();
    settings.r_max = 1e6;
    // Shooting value pinned to the critical one at 1e-10 relative; the
    // orbit hangs on the plateau for nearly three decades before leaving.
    let profile =
        shooter::integrate_with(2.6818302713727e-1, &consts, &settings, PlateauCrossing::Record)
            .expect("near-critical orbit integrates");
    let report = asymptotics::critical_asymptotics(&profile.samples, &consts).unwrap();
    assert!(
        report.plateau_decades > 2.5,
        "plateau spans {} decades",
        report.plateau_decades
    );
    assert!(report.plateau.0 < 600.0);
    assert!(report.max_rwprime < 0.05);
    assert!(report.max_w_deviation < 0.05);
    assert!(report.slope_ratio.0 > 0.9 && report.slope_ratio.1 < 1.1);
}
