//! Scratch driver: freeze oracle numbers for the unit tests.

use vss_core::shooter::{self, IntegratorSettings};
use vss_core::variational::{self, OPERATOR_CHECK_MIN_RADIUS};
use vss_core::{classifier, params, ExponentConfig};

fn main() {
    let consts = params::validate(ExponentConfig::new(1, 1.5, 0.9)).unwrap();
    let settings = IntegratorSettings::defaults();

    // f64 linearized residual at a coarse radius floor.
    let (_base, var) = variational::integrate_variational(1.0, &consts, &settings).unwrap();
    let (base, var2) = variational::integrate_variational(1.0, &consts, &settings).unwrap();
    for r_min in [OPERATOR_CHECK_MIN_RADIUS, 0.1, 0.5] {
        let rep = variational::linearized_residual(&base, &var2, &consts, r_min);
        println!(
            "f64 r_min={r_min:.0e}: resid {:.3e} dev {:.3e} neg {} n {}",
            rep.max_normalized_residual,
            rep.max_closed_form_deviation,
            rep.all_negative,
            rep.samples_checked
        );
    }
    let mon = variational::monotonicity_check(&base, &var, &consts);
    println!(
        "monotonicity: gap_min {:.4e} wa_min {:.4e} series_radius {:.4e} n {}",
        mon.min_gap, mon.min_wa, mon.series_radius, mon.samples_checked
    );
    println!(
        "gap_leading_coefficient(1.0) = {:.10}",
        variational::gap_leading_coefficient(1.0, &consts)
    );

    // Seed bracket endpoints.
    let (lo, hi) = classifier::seed_bracket(&consts, &settings).unwrap();
    println!("seed bracket: ({lo}, {hi})");

    // Series value pinned at a=1, r=1e-2.
    let (f, fp) = shooter::series_eval(1.0, 1e-2, &consts);
    println!("series f(1e-2) = {f:.17e}, f'(1e-2) = {fp:.17e}");
    let st = shooter::series_state(1.0, 1e-2, 1.0, &consts);
    println!("series flux(1e-2) = {:.17e}", st.flux);
    println!("handoff(1.0) = {:.6e}", settings.handoff_radius(1.0, &consts));

    // Frozen advance checkpoints at a=1 for the oracle test.
    let r0 = settings.handoff_radius(1.0, &consts);
    let mut st = shooter::series_state(1.0, r0, 1.0, &consts);
    for target in [0.1, 1.0] {
        st = shooter::advance(st, target, 1.0, &consts, &settings).unwrap();
        println!("advance to {target}: f = {:.17e}, flux = {:.17e}", st.f, st.flux);
    }

    // Rescaled-profile extinction at a=1e-3.
    let resc = shooter::rescaled_profile(1e-3, &consts, &settings).unwrap();
    println!("rescaled extinction: {:.10}", resc.r_extinction.unwrap());

    // Sweep counts on the acceptance grid.
    let grid = classifier::log_grid(1e-2, 1e2, 61);
    println!("grid: len {} first {:.6e} last {:.6e}", grid.len(), grid[0], grid[60]);
}
