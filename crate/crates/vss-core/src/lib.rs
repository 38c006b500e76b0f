//! Radially symmetric self-similar profiles for fast diffusion with
//! gradient absorption.
//!
//! The library computes the profile `f(r)` solving
//!
//! ```text
//! (|f'|^(p-2) f')' + (N-1)/r (|f'|^(p-2) f') + a*f + b*r*f' - |f'|^q = 0,
//! f(0) = a > 0,   f'(0) = 0,
//! ```
//!
//! with similarity exponents `a = alpha = (p-q)/(2q-p)` and
//! `b = beta = (q-p+1)/(2q-p)`, in the supercritical fast-diffusion window
//! `2N/(N+1) < p < 2`, `p/2 < q < p - N/(N+1)`. Profiles are integrated as a
//! first-order system in `(f, F)` where `F = |f'|^(p-2) f' * (-1)` is the
//! (sign-flipped) radial flux; this regularizes the degenerate second-order
//! form at the origin and at critical points of `f`.
//!
//! Functionality is organized by task:
//!
//! * [`params`] — exponent configuration, admissibility window, derived
//!   constants, origin-expansion coefficients.
//! * [`dopri`] — embedded Dormand–Prince 5(4) integrator with dense output
//!   and event localization, generic over the scalar type.
//! * [`shooter`] — series start-up near the origin, profile integration with
//!   termination events, the zero-absorption limit profile, and the
//!   small-`a` rescaled profile.
//! * [`classifier`] — orbit classification (extinction vs. plateau
//!   crossing), geometric seed bracketing, and bisection for the critical
//!   shooting value.
//! * [`asymptotics`] — power-law tail fits, slow-orbit limit constants,
//!   logarithmic-slope diagnostics and plateau/critical-slope measurements.
//! * [`variational`] — the derivative of the profile with respect to the
//!   shooting value, monotonicity gap checks, and residuals of the
//!   linearized operator.
//! * [`bruteforce`] — a fixed-step classical Runge–Kutta reference
//!   integrator used to cross-check the adaptive machinery.
//! * [`verify`] — the end-to-end verification pipeline driving every check
//!   exposed by the `vss verify` command.
//!
//! Everything numerical is generic over a scalar implementing
//! [`scalar::Real`]; `f64` is the working type and [`dd::Dd`] provides an
//! extended-precision (double-double, ~31 significant digits) drop-in for
//! measurements that sit below the `f64` noise floor.

pub mod asymptotics;
pub mod bruteforce;
pub mod classifier;
pub mod dd;
pub mod dopri;
pub mod error;
pub mod params;
pub mod scalar;
pub mod shooter;
pub mod variational;
pub mod verify;

/// Exponent configuration over `f64`.
pub type ExponentConfig = params::ExponentConfig<f64>;
/// Derived similarity constants over `f64`.
pub type DerivedConstants = params::DerivedConstants<f64>;
/// Integrator settings over `f64`.
pub type IntegratorSettings = shooter::IntegratorSettings<f64>;
/// Sampled profile over `f64`.
pub type Profile = shooter::Profile<f64>;
/// Orbit class label over `f64`.
pub type ClassLabel = classifier::ClassLabel<f64>;
/// Bisection bracket over `f64`.
pub type Bracket = classifier::Bracket<f64>;
