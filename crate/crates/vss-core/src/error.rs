//! Error types shared by all modules.

use crate::scalar::Real;

/// A single violated admissibility bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundViolation<T> {
    /// Which quantity is out of range (`"p"`, `"q"`, `"N"`).
    pub name: &'static str,
    /// The offending value.
    pub value: T,
    /// Human-readable constraint including the numeric bound.
    pub constraint: String,
}

fn format_violations<T: Real>(violations: &[BoundViolation<T>]) -> String {
    violations
        .iter()
        .map(|v| format!("{} = {} {}", v.name, v.value, v.constraint))
        .collect::<Vec<_>>()
        .join("; ")
}

/// Everything that can go wrong while building configurations, integrating
/// profiles, classifying orbits, or measuring asymptotics.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error<T: Real> {
    /// The exponent pair leaves the admissible window. Every violated bound
    /// is listed, not just the first.
    #[error("exponent configuration rejected: {}", format_violations(violations))]
    WindowViolation { violations: Vec<BoundViolation<T>> },

    /// Shooting values must be positive and finite.
    #[error("shooting value must be positive and finite, got {value}")]
    InvalidShootingValue { value: T },

    /// An integrator setting fails its sanity bound.
    #[error("invalid integrator setting {name}: {detail}")]
    InvalidSetting { name: &'static str, detail: String },

    /// The state vector left the floating-point range.
    #[error("state became non-finite at r = {r}")]
    NonFiniteState { r: T },

    /// Step-size control collapsed below the resolution of the radius.
    #[error("step size underflowed at r = {r}")]
    StepSizeUnderflow { r: T },

    /// The step budget ran out before any termination event fired.
    #[error("step budget exhausted at r = {r}")]
    StepBudgetExhausted { r: T },

    /// The zero-absorption limit profile must reach zero before the
    /// horizon; it did not.
    #[error("limit profile did not reach zero before r = {r_max}")]
    HorizonReached { r_max: T },

    /// Geometric seeding ran past its closed-form cap without finding both
    /// bracket endpoints.
    #[error("seed sweep exhausted at a = {last_value} (cap {cap})")]
    SweepExhausted { last_value: T, cap: T },

    /// Bisection endpoints must classify as extinction (low) and plateau
    /// crossing (high).
    #[error("invalid bracket [{a_lo}, {a_hi}]: {reason}")]
    InvalidBracket { a_lo: T, a_hi: T, reason: String },

    /// The requested bracket width is below what the scalar type can
    /// resolve (32 machine epsilons relative).
    #[error("bracket [{a_lo}, {a_hi}] hit the resolution floor of the scalar type")]
    ResolutionFloor { a_lo: T, a_hi: T },

    /// A fit window must span at least a decade and contain enough samples.
    #[error("fit window spans {decades} decades with {samples} samples; need >= 1 decade and >= {min_samples} samples")]
    WindowTooNarrow {
        decades: T,
        samples: usize,
        min_samples: usize,
    },

    /// Logarithmic-slope diagnostics need several decades of tail.
    #[error("tail spans only {decades} decades beyond r = 1; need >= {min_decades}")]
    InsufficientTail { decades: T, min_decades: T },

    /// The slow-orbit limit constant has not settled to the requested
    /// oscillation level.
    #[error("limit constant not converged: last-decade oscillation {oscillation} >= {threshold}")]
    NotConverged { oscillation: T, threshold: T },

    /// No plateau window was found on the profile.
    #[error("no plateau: minimum relative deviation from the plateau constant is {min_deviation}")]
    NoPlateau { min_deviation: T },
}
