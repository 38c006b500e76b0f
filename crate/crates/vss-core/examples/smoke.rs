//! Scratch driver: times each verification check and prints its line.

use std::time::Instant;
use vss_core::verify;

fn main() {
    let checks: Vec<(&str, fn() -> verify::CheckResult)> = vec![
        ("identities", verify::check_exponent_identities),
        ("shape", verify::check_profile_shape_bounds),
        ("expansion", verify::check_expansion_order),
        ("rk4", verify::check_adaptive_vs_fixed_step),
        ("dichotomy", verify::check_sweep_dichotomy),
        ("bracket", verify::check_bracket_plateau),
        ("slow-tail", verify::check_slow_orbit_tail),
        ("variational", verify::check_variational_suite),
        ("small-a", verify::check_small_a_limit),
        ("robustness", verify::check_robustness),
    ];
    let mut args = std::env::args().skip(1);
    let only: Option<String> = args.next();
    for (tag, check) in checks {
        if let Some(ref o) = only {
            if !tag.contains(o.as_str()) {
                continue;
            }
        }
        let t0 = Instant::now();
        let result = check();
        println!("[{:>10} {:8.2?}] {}", tag, t0.elapsed(), result.line());
    }
}
