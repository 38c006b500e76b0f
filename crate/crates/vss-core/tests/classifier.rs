//! Orbit classification, bracket seeding, bisection, and grid sweeps.
//!
//! The critical shooting value used as an oracle below,
//! `a* = 2.6818302713727e-1`, was reproduced by an unrelated adaptive
//! integrator (rel_tol 1e-13) running the same classification policy:
//! undetermined midpoints retried at four times the horizon, then decided
//! by comparing `w` at the horizon against the plateau constant.

use vss_core::classifier::{self, ClassLabel};
use vss_core::error::Error;
use vss_core::params::{validate, ExponentConfig};
use vss_core::shooter::IntegratorSettings;

const A_STAR: f64 = 2.6818302713727e-1;

fn reference() -> vss_core::DerivedConstants {
    validate(ExponentConfig::new(1, 1.5, 0.9)).unwrap()
}

#[test]
fn small_values_reach_extinction_after_one_slope_flip() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    match classifier::classify(0.01, &consts, &settings).unwrap() {
        ClassLabel::A {
            r_extinction,
            r_flip,
        } => {
            assert!(r_extinction > 0.0);
            assert!(
                r_flip < r_extinction,
                "the hump of w must turn before f reaches zero"
            );
        }
        other => panic!("expected extinction, got {other:?}"),
    }
}

#[test]
fn large_values_cross_the_plateau() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    match classifier::classify(100.0, &consts, &settings).unwrap() {
        ClassLabel::C { r_cross } => assert!(r_cross > 0.0),
        other => panic!("expected a plateau crossing, got {other:?}"),
    }
}

#[test]
fn near_critical_values_are_undetermined_at_the_horizon() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    match classifier::classify(A_STAR, &consts, &settings).unwrap() {
        ClassLabel::Undetermined {
            w_at_horizon,
            wprime_at_horizon,
        } => {
            // The orbit hangs on the plateau: w near w*, w' nearly flat.
            assert!(
                (w_at_horizon / consts.w_star - 1.0).abs() < 0.05,
                "w at horizon {w_at_horizon} should sit near {}",
                consts.w_star
            );
            assert!(
                (wprime_at_horizon * settings.r_max).abs() < 0.1 * consts.w_star,
                "plateau should be quasi-static, got w' = {wprime_at_horizon}"
            );
        }
        other => panic!("expected an undetermined orbit, got {other:?}"),
    }
}

#[test]
fn rejects_invalid_shooting_values() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    assert!(matches!(
        classifier::classify(0.0, &consts, &settings),
        Err(Error::InvalidShootingValue { .. })
    ));
    assert!(matches!(
        classifier::classify(-2.0, &consts, &settings),
        Err(Error::InvalidShootingValue { .. })
    ));
}

#[test]
fn geometric_seeding_brackets_the_critical_value() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let (lo, hi) = classifier::seed_bracket(&consts, &settings).unwrap();
    assert_eq!(lo, 0.25);
    assert_eq!(hi, 1.0);
    assert!(lo < A_STAR && A_STAR < hi);
}

#[test]
fn bisection_pins_the_critical_value_to_nine_digits() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let bracket = classifier::bisect(0.25, 1.0, 1e-9, &consts, &settings).unwrap();
    assert!(
        bracket.a_lo <= A_STAR && A_STAR <= bracket.a_hi,
        "[{:.12e}, {:.12e}] must cover {A_STAR:.12e}",
        bracket.a_lo,
        bracket.a_hi
    );
    let width = (bracket.a_hi - bracket.a_lo) / bracket.a_lo;
    assert!(width <= 1e-9, "relative width {width:e} above target");
    assert!(
        bracket.iterations >= 25 && bracket.iterations <= 40,
        "halving [0.25, 1] to 1e-9 needs about 32 midpoints, took {}",
        bracket.iterations
    );
    // Deterministic endpoints of this exact call, frozen.
    assert!((bracket.a_lo - 2.681830270449e-1).abs() < 1e-12);
    assert!((bracket.a_hi - 2.681830272195e-1).abs() < 1e-12);
    // The midpoint profile belongs to the bracket midpoint.
    let mid = 0.5 * (bracket.a_lo + bracket.a_hi);
    assert_eq!(bracket.midpoint_profile.a, mid);
}

#[test]
fn bisection_rejects_malformed_brackets() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    // Reversed endpoints.
    assert!(matches!(
        classifier::bisect(1.0, 0.25, 1e-6, &consts, &settings),
        Err(Error::InvalidBracket { .. })
    ));
    // Both endpoints on the crossing side.
    assert!(matches!(
        classifier::bisect(0.5, 1.0, 1e-6, &consts, &settings),
        Err(Error::InvalidBracket { .. })
    ));
    // Both endpoints on the extinction side.
    assert!(matches!(
        classifier::bisect(0.01, 0.1, 1e-6, &consts, &settings),
        Err(Error::InvalidBracket { .. })
    ));
    // Nonsense width.
    assert!(matches!(
        classifier::bisect(0.25, 1.0, 0.0, &consts, &settings),
        Err(Error::InvalidSetting { .. })
    ));
}

#[test]
fn bisection_stops_at_the_resolution_floor() {
    let consts = reference();
    // A short horizon keeps each near-critical classification cheap; the
    // undetermined tiebreak still decides every midpoint, so the loop can
    // only stop by hitting the floor.
    let mut settings = IntegratorSettings::defaults();
    settings.r_max = 1e3;
    match classifier::bisect(0.25, 1.0, 1e-20, &consts, &settings) {
        Err(Error::ResolutionFloor { a_lo, a_hi }) => {
            assert!(a_lo < a_hi);
            let width = a_hi - a_lo;
            assert!(
                width <= 64.0 * f64::EPSILON * a_hi,
                "floor should fire near machine resolution, width {width:e}"
            );
        }
        other => panic!("expected the resolution floor, got {other:?}"),
    }
}

#[test]
fn log_grid_spans_endpoints_with_constant_ratio() {
    let grid: Vec<f64> = classifier::log_grid(1e-2, 1e2, 61);
    assert_eq!(grid.len(), 61);
    assert!((grid[0] / 1e-2 - 1.0).abs() < 1e-14);
    assert!((grid[60] / 1e2 - 1.0).abs() < 1e-14);
    assert!(grid.windows(2).all(|w| w[0] < w[1]));
    let ratio0 = grid[1] / grid[0];
    for w in grid.windows(2) {
        assert!((w[1] / w[0] / ratio0 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn sweep_is_phase_ordered_and_thread_count_invariant() {
    let consts = reference();
    let settings = IntegratorSettings::defaults();
    let grid = classifier::log_grid(1e-2, 1e2, 61);

    let serial = classifier::sweep(&grid, &consts, &settings, 1);
    let parallel = classifier::sweep(&grid, &consts, &settings, 4);
    assert_eq!(serial.len(), 61);

    let mut n_a = 0usize;
    let mut n_c = 0usize;
    let mut seen_c = false;
    for (i, ((a_s, label_s), (a_p, label_p))) in serial.iter().zip(parallel.iter()).enumerate() {
        assert_eq!(a_s, a_p, "sweep order must match the input grid");
        assert_eq!(*a_s, grid[i]);
        let label_s = label_s.as_ref().expect("every grid value classifies");
        let label_p = label_p.as_ref().expect("every grid value classifies");
        // Bit-identical labels regardless of the thread count.
        assert_eq!(label_s, label_p);
        match label_s {
            ClassLabel::A { .. } => {
                assert!(!seen_c, "extinction after a crossing breaks monotonicity");
                n_a += 1;
            }
            ClassLabel::C { .. } => {
                seen_c = true;
                n_c += 1;
            }
            ClassLabel::Undetermined { .. } => {
                panic!("grid values this far from critical must classify")
            }
        }
    }
    // Frozen split of this grid around a* = 0.268...: 22 extinctions,
    // 39 crossings, nothing undetermined.
    assert_eq!((n_a, n_c), (22, 39));
}
