//! Scalar abstraction for all numerical routines.
//!
//! Everything in this crate is generic over [`Real`], a light composite of
//! the `num-traits` float traits plus the marker bounds needed to move
//! values across threads and format diagnostics. `f32` and `f64` implement
//! it out of the box; [`crate::dd::Dd`] supplies ~31 significant digits for
//! measurements below the `f64` noise floor.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar usable by the integrators and diagnostics.
pub trait Real:
    Float + FromPrimitive + core::fmt::Debug + core::fmt::Display + Send + Sync + 'static
{
    /// Lossy conversion to `f64` (rounds extended precision).
    fn to_f64_lossy(self) -> f64;
}

impl Real for f32 {
    fn to_f64_lossy(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn to_f64_lossy(self) -> f64 {
        self
    }
}

/// Converts an `f64` literal into `T`.
///
/// For `f64` this is the identity; for wider types the conversion is exact
/// (an `f64` is representable in any wider binary format), so exact inputs
/// like `1.5` stay exact.
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal must convert into the scalar type")
}

/// Converts a small integer into `T` exactly.
pub fn int<T: Real>(n: i64) -> T {
    T::from_i64(n).expect("small integer must convert into the scalar type")
}

/// Ratio of two small integers, evaluated in `T` arithmetic.
///
/// Used for integrator tableau coefficients: evaluating the quotient in `T`
/// keeps the coefficients accurate to `T`'s own epsilon, which matters for
/// extended-precision runs (an `f64`-rounded tableau would cap accuracy at
/// ~1e-16 regardless of the working precision).
pub fn ratio<T: Real>(num: i64, den: i64) -> T {
    int::<T>(num) / int::<T>(den)
}
