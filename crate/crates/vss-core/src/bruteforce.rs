//! Fixed-step classical Runge–Kutta reference integrator.
//!
//! Deliberately simple: constant step size, no error control, no dense
//! output, no events. It shares only the right-hand side with the adaptive
//! integrator, so agreement between the two validates the adaptive step
//! control, interpolation, and event machinery against an independent
//! discretization.

use crate::error::Error;
use crate::params::DerivedConstants;
use crate::scalar::{lit, Real};
use crate::shooter::{rhs_unchecked, State};

/// Integrates from `state` with fixed step `h`, landing exactly on each
/// checkpoint (steps are clamped at checkpoints, never interpolated), and
/// returns the state at every checkpoint in order.
///
/// Checkpoints must be strictly increasing and all beyond `state.r`.
pub fn rk4_checkpoints<T: Real>(
    state: State<T>,
    lambda: T,
    consts: &DerivedConstants<T>,
    h: T,
    checkpoints: &[T],
) -> Result<Vec<State<T>>, Error<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidSetting {
            name: "h",
            detail: format!("fixed step must be positive, got {h}"),
        });
    }
    let mut prev = state.r;
    for &c in checkpoints {
        if !(c > prev) {
            return Err(Error::InvalidSetting {
                name: "checkpoints",
                detail: format!("must be strictly increasing past {}, got {c}", state.r),
            });
        }
        prev = c;
    }

    let half: T = lit(0.5);
    let sixth: T = T::one() / lit(6.0);
    let two: T = lit(2.0);
    let mut r = state.r;
    let mut y = [state.f, state.flux];
    let mut results = Vec::with_capacity(checkpoints.len());

    for &target in checkpoints {
        while r < target {
            let step = h.min(target - r);
            let k1 = rhs_unchecked(r, &y, lambda, consts);
            let y2 = [y[0] + half * step * k1[0], y[1] + half * step * k1[1]];
            let k2 = rhs_unchecked(r + half * step, &y2, lambda, consts);
            let y3 = [y[0] + half * step * k2[0], y[1] + half * step * k2[1]];
            let k3 = rhs_unchecked(r + half * step, &y3, lambda, consts);
            let y4 = [y[0] + step * k3[0], y[1] + step * k3[1]];
            let k4 = rhs_unchecked(r + step, &y4, lambda, consts);
            for i in 0..2 {
                y[i] = y[i] + step * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
            }
            r = r + step;
            if !y[0].is_finite() || !y[1].is_finite() {
                return Err(Error::NonFiniteState { r });
            }
        }
        results.push(State {
            r,
            f: y[0],
            flux: y[1],
        });
    }
    Ok(results)
}
