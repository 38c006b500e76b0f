//! Acceptance gate: every verification check must hold at its stated
//! tolerance. Each test prints the check's one-line report before
//! asserting, so a failing run shows the measured value and the bound
//! side by side.

use vss_core::verify;

fn run(check: fn() -> verify::CheckResult) {
    let result = check();
    println!("{}", result.line());
    assert!(result.passed, "{}", result.line());
}

#[test]
fn exponent_identities() {
    run(verify::check_exponent_identities);
}

#[test]
fn profile_shape_bounds() {
    run(verify::check_profile_shape_bounds);
}

#[test]
fn expansion_remainder_order() {
    run(verify::check_expansion_order);
}

#[test]
fn adaptive_vs_fixed_step() {
    run(verify::check_adaptive_vs_fixed_step);
}

#[test]
fn sweep_dichotomy() {
    run(verify::check_sweep_dichotomy);
}

#[test]
fn critical_bracket_plateau() {
    run(verify::check_bracket_plateau);
}

#[test]
fn slow_orbit_tail() {
    run(verify::check_slow_orbit_tail);
}

#[test]
fn variational_suite() {
    run(verify::check_variational_suite);
}

#[test]
fn small_a_limit() {
    run(verify::check_small_a_limit);
}

#[test]
fn second_config_robustness() {
    run(verify::check_robustness);
}
