//! Double-double arithmetic: an unevaluated sum of two `f64` giving ~31
//! significant decimal digits.
//!
//! [`Dd`] implements `num_traits::Float`, so every routine in this crate can
//! run on it unchanged. It exists for measurements that sit below the `f64`
//! noise floor — e.g. checking that a series remainder of order `r^6.6`
//! stays under `1e-20` — where plain doubles produce pure rounding noise.
//!
//! Algorithms are the classical error-free transformations (Dekker/Knuth
//! two-sum, FMA-based two-product) with one-step renormalization, plus
//! argument-reduced Taylor evaluation for `exp` and Newton's method on
//! `exp` for `ln`. Accuracy of `+ - * / sqrt` is a few units in the last
//! (104-bit) place; `exp`/`ln`/`powf` deliver a relative error around
//! `1e-30`, which is the figure that matters downstream.
//!
//! Circular trigonometry (`sin`, `cos`, `atan2`, ...) is provided only at
//! `f64` precision to satisfy the `Float` contract; nothing in this crate
//! calls it. Hyperbolics and `exp_m1`/`ln_1p` are full precision.

use crate::scalar::Real;
use num_traits::{Float, FromPrimitive, Num, NumCast, One, ToPrimitive, Zero};

/// Double-double scalar: `value = hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Default)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

/// Machine epsilon of the format: 2^-104.
const DD_EPSILON: f64 = 4.930380657631324e-32;
/// `ln 2` to double-double precision.
const LN2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};
/// `ln 10` to double-double precision.
const LN10: Dd = Dd {
    hi: 2.302585092994046,
    lo: -2.1707562233822494e-16,
};
/// `pi` to double-double precision.
const PI: Dd = Dd {
    hi: 3.141592653589793,
    lo: 1.2246467991473532e-16,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

/// Requires `|a| >= |b|` or `a == 0`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    if !s.is_finite() {
        return (s, 0.0);
    }
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    if !p.is_finite() {
        return (p, 0.0);
    }
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    /// Exact widening from `f64`.
    #[inline]
    pub fn from_f64(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    /// Builds from an unnormalized pair (renormalizes).
    #[inline]
    pub fn from_parts(hi: f64, lo: f64) -> Dd {
        let (s, e) = two_sum(hi, lo);
        Dd { hi: s, lo: e }
    }

    /// Leading component.
    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    /// Trailing component.
    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    /// Nearest `f64`.
    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact scaling by 2^k.
    #[inline]
    fn ldexp(self, k: i32) -> Dd {
        let s = (2.0f64).powi(k);
        Dd {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    fn exp_impl(self) -> Dd {
        if self.hi > 709.782712893384 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -709.0 {
            return Dd::ZERO;
        }
        // exp(x) = 2^k * exp(m), m = x - k ln2, |m| <= ln2/2; then
        // exp(m) = exp(m/64)^64 with a 14-term Taylor sum for exp(m/64).
        let k = (self.hi / LN2.hi).round();
        let m = self - LN2 * Dd::from_f64(k);
        let s = m.ldexp(-6);
        let mut term = s;
        let mut sum = Dd::ONE + s;
        for i in 2..=14i64 {
            term = term * s / Dd::from_f64(i as f64);
            sum = sum + term;
        }
        let mut e = sum;
        for _ in 0..6 {
            e = e * e;
        }
        e.ldexp(k as i32)
    }

    fn ln_impl(self) -> Dd {
        if self.hi < 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        if self.hi == 0.0 {
            return Dd::from_f64(f64::NEG_INFINITY);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // Newton's method on exp(y) = x from the f64 seed; each iteration
        // doubles the correct digits, two reach full precision.
        let mut y = Dd::from_f64(self.hi.ln());
        for _ in 0..2 {
            y = y + self * (-y).exp_impl() - Dd::ONE;
        }
        y
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::from_f64(x)
    }
}

impl PartialEq for Dd {
    fn eq(&self, other: &Dd) -> bool {
        self.hi == other.hi && self.lo == other.lo
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Dd) -> Option<core::cmp::Ordering> {
        // Normalized components make lexicographic order the value order.
        match self.hi.partial_cmp(&other.hi) {
            Some(core::cmp::Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl core::ops::Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl core::ops::Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, rhs: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Dd { hi, lo }
    }
}

impl core::ops::Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, rhs: Dd) -> Dd {
        self + (-rhs)
    }
}

impl core::ops::Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, rhs: Dd) -> Dd {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + self.hi * rhs.lo + self.lo * rhs.hi;
        let (hi, lo) = quick_two_sum(p1, p2);
        Dd { hi, lo }
    }
}

impl core::ops::Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, rhs: Dd) -> Dd {
        let q1 = self.hi / rhs.hi;
        if !q1.is_finite() {
            return Dd { hi: q1, lo: 0.0 };
        }
        let r = self - rhs * Dd::from_f64(q1);
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * Dd::from_f64(q2);
        let q3 = r.hi / rhs.hi;
        let (s, e) = quick_two_sum(q1, q2);
        Dd { hi: s, lo: e } + Dd::from_f64(q3)
    }
}

impl core::ops::Rem for Dd {
    type Output = Dd;
    fn rem(self, rhs: Dd) -> Dd {
        self - rhs * (self / rhs).trunc()
    }
}

impl core::fmt::Display for Dd {
    /// Rounds to the nearest `f64` for display; diagnostics only.
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        core::fmt::Display::fmt(&Dd::to_f64(*self), f)
    }
}

impl core::fmt::Debug for Dd {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "Dd({:e} + {:e})", self.hi, self.lo)
    }
}

impl Zero for Dd {
    fn zero() -> Dd {
        Dd::ZERO
    }
    fn is_zero(&self) -> bool {
        self.hi == 0.0
    }
}

impl One for Dd {
    fn one() -> Dd {
        Dd::ONE
    }
}

impl Num for Dd {
    type FromStrRadixErr = num_traits::ParseFloatError;
    /// Parses at `f64` precision and widens exactly. The crate never parses
    /// extended-precision literals from text; exact decimal inputs such as
    /// configuration exponents survive the round trip unchanged.
    fn from_str_radix(s: &str, radix: u32) -> Result<Dd, Self::FromStrRadixErr> {
        f64::from_str_radix(s, radix).map(Dd::from_f64)
    }
}

impl ToPrimitive for Dd {
    fn to_i64(&self) -> Option<i64> {
        Dd::to_f64(*self).to_i64()
    }
    fn to_u64(&self) -> Option<u64> {
        Dd::to_f64(*self).to_u64()
    }
    fn to_f64(&self) -> Option<f64> {
        Some(Dd::to_f64(*self))
    }
}

impl FromPrimitive for Dd {
    fn from_i64(n: i64) -> Option<Dd> {
        let hi = n as f64;
        let lo = (n - hi as i64) as f64;
        Some(Dd::from_parts(hi, lo))
    }
    fn from_u64(n: u64) -> Option<Dd> {
        let hi = n as f64;
        let lo = if hi as u64 >= n {
            -((hi as u64 - n) as f64)
        } else {
            (n - hi as u64) as f64
        };
        Some(Dd::from_parts(hi, lo))
    }
    fn from_f64(x: f64) -> Option<Dd> {
        Some(Dd::from_f64(x))
    }
}

impl NumCast for Dd {
    fn from<T: ToPrimitive>(n: T) -> Option<Dd> {
        n.to_f64().map(Dd::from_f64)
    }
}

impl Float for Dd {
    fn nan() -> Dd {
        Dd::from_f64(f64::NAN)
    }
    fn infinity() -> Dd {
        Dd::from_f64(f64::INFINITY)
    }
    fn neg_infinity() -> Dd {
        Dd::from_f64(f64::NEG_INFINITY)
    }
    fn neg_zero() -> Dd {
        Dd::from_f64(-0.0)
    }
    fn min_value() -> Dd {
        Dd::from_f64(f64::MIN)
    }
    fn min_positive_value() -> Dd {
        Dd::from_f64(f64::MIN_POSITIVE)
    }
    fn max_value() -> Dd {
        Dd::from_f64(f64::MAX)
    }
    fn epsilon() -> Dd {
        Dd::from_f64(DD_EPSILON)
    }

    fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }
    fn is_infinite(self) -> bool {
        self.hi.is_infinite()
    }
    fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }
    fn is_normal(self) -> bool {
        self.hi.is_normal()
    }
    fn classify(self) -> core::num::FpCategory {
        self.hi.classify()
    }

    fn floor(self) -> Dd {
        let fh = self.hi.floor();
        if fh == self.hi {
            Dd::from_parts(fh, self.lo.floor())
        } else {
            Dd { hi: fh, lo: 0.0 }
        }
    }
    fn ceil(self) -> Dd {
        let ch = self.hi.ceil();
        if ch == self.hi {
            Dd::from_parts(ch, self.lo.ceil())
        } else {
            Dd { hi: ch, lo: 0.0 }
        }
    }
    fn round(self) -> Dd {
        let half = Dd::from_f64(0.5);
        if self.hi >= 0.0 {
            (self + half).floor()
        } else {
            (self - half).ceil()
        }
    }
    fn trunc(self) -> Dd {
        if self.hi >= 0.0 {
            self.floor()
        } else {
            self.ceil()
        }
    }
    fn fract(self) -> Dd {
        self - self.trunc()
    }

    fn abs(self) -> Dd {
        if self.hi < 0.0 || (self.hi == 0.0 && self.hi.is_sign_negative()) {
            -self
        } else {
            self
        }
    }
    fn signum(self) -> Dd {
        Dd::from_f64(self.hi.signum())
    }
    fn is_sign_positive(self) -> bool {
        self.hi.is_sign_positive()
    }
    fn is_sign_negative(self) -> bool {
        self.hi.is_sign_negative()
    }

    fn mul_add(self, a: Dd, b: Dd) -> Dd {
        self * a + b
    }
    fn recip(self) -> Dd {
        Dd::ONE / self
    }

    fn powi(self, n: i32) -> Dd {
        if n == 0 {
            return Dd::ONE;
        }
        let mut base = self;
        let mut e = n.unsigned_abs();
        let mut acc = Dd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    fn powf(self, y: Dd) -> Dd {
        if y.is_zero() {
            return Dd::ONE;
        }
        if self.is_zero() {
            return if y.hi > 0.0 {
                Dd::ZERO
            } else {
                Dd::from_f64(f64::INFINITY)
            };
        }
        if self.hi < 0.0 {
            // Negative base: defined only for integral exponents.
            if y.fract().is_zero() {
                let mag = (-self).powf(y);
                let odd = (y / Dd::from_f64(2.0)).fract().is_zero();
                return if odd { mag } else { -mag };
            }
            return Dd::nan();
        }
        (y * self.ln_impl()).exp_impl()
    }

    fn sqrt(self) -> Dd {
        if self.is_zero() {
            return self;
        }
        if self.hi < 0.0 {
            return Dd::nan();
        }
        if self.hi.is_infinite() {
            return self;
        }
        // One Newton correction from the f64 seed reaches full precision.
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let axd = Dd::from_f64(ax);
        let err = (self - axd * axd).hi;
        Dd::from_parts(ax, err * (x * 0.5))
    }

    fn exp(self) -> Dd {
        self.exp_impl()
    }
    fn exp2(self) -> Dd {
        (self * LN2).exp_impl()
    }
    fn ln(self) -> Dd {
        self.ln_impl()
    }
    fn log(self, base: Dd) -> Dd {
        self.ln_impl() / base.ln_impl()
    }
    fn log2(self) -> Dd {
        self.ln_impl() / LN2
    }
    fn log10(self) -> Dd {
        self.ln_impl() / LN10
    }

    fn max(self, other: Dd) -> Dd {
        if self.is_nan() {
            other
        } else if other.is_nan() || self >= other {
            self
        } else {
            other
        }
    }
    fn min(self, other: Dd) -> Dd {
        if self.is_nan() {
            other
        } else if other.is_nan() || self <= other {
            self
        } else {
            other
        }
    }
    fn abs_sub(self, other: Dd) -> Dd {
        if self > other {
            self - other
        } else {
            Dd::ZERO
        }
    }

    fn cbrt(self) -> Dd {
        if self.is_zero() {
            return self;
        }
        let third = Dd::ONE / Dd::from_f64(3.0);
        if self.hi < 0.0 {
            -((-self).ln_impl() * third).exp_impl()
        } else {
            (self.ln_impl() * third).exp_impl()
        }
    }
    fn hypot(self, other: Dd) -> Dd {
        (self * self + other * other).sqrt()
    }

    // Circular trigonometry at f64 precision only (documented; unused by
    // the numerics in this crate).
    fn sin(self) -> Dd {
        Dd::from_f64(self.to_f64().sin())
    }
    fn cos(self) -> Dd {
        Dd::from_f64(self.to_f64().cos())
    }
    fn tan(self) -> Dd {
        Dd::from_f64(self.to_f64().tan())
    }
    fn asin(self) -> Dd {
        Dd::from_f64(self.to_f64().asin())
    }
    fn acos(self) -> Dd {
        Dd::from_f64(self.to_f64().acos())
    }
    fn atan(self) -> Dd {
        Dd::from_f64(self.to_f64().atan())
    }
    fn atan2(self, other: Dd) -> Dd {
        Dd::from_f64(self.to_f64().atan2(other.to_f64()))
    }
    fn sin_cos(self) -> (Dd, Dd) {
        (self.sin(), self.cos())
    }

    fn exp_m1(self) -> Dd {
        if self.abs() < Dd::from_f64(0.1) {
            // Direct Taylor sum avoids the cancellation in exp(x) - 1.
            let mut term = self;
            let mut sum = self;
            for i in 2..=30i64 {
                term = term * self / Dd::from_f64(i as f64);
                sum = sum + term;
                if term.abs().hi < DD_EPSILON * sum.abs().hi {
                    break;
                }
            }
            sum
        } else {
            self.exp_impl() - Dd::ONE
        }
    }
    fn ln_1p(self) -> Dd {
        (Dd::ONE + self).ln_impl()
    }

    fn sinh(self) -> Dd {
        if self.abs() < Dd::from_f64(0.5) {
            let x2 = self * self;
            let mut term = self;
            let mut sum = self;
            for i in 1..=15i64 {
                let d = Dd::from_f64((2 * i) as f64) * Dd::from_f64((2 * i + 1) as f64);
                term = term * x2 / d;
                sum = sum + term;
            }
            sum
        } else {
            let e = self.exp_impl();
            (e - e.recip()).ldexp(-1)
        }
    }
    fn cosh(self) -> Dd {
        let e = self.exp_impl();
        (e + e.recip()).ldexp(-1)
    }
    fn tanh(self) -> Dd {
        if self.hi > 20.0 {
            return Dd::ONE;
        }
        if self.hi < -20.0 {
            return -Dd::ONE;
        }
        let e2 = (self + self).exp_impl();
        (e2 - Dd::ONE) / (e2 + Dd::ONE)
    }
    fn asinh(self) -> Dd {
        if self.hi < 0.0 {
            return -(-self).asinh();
        }
        (self + (self * self + Dd::ONE).sqrt()).ln_impl()
    }
    fn acosh(self) -> Dd {
        (self + (self * self - Dd::ONE).sqrt()).ln_impl()
    }
    fn atanh(self) -> Dd {
        ((Dd::ONE + self) / (Dd::ONE - self)).ln_impl().ldexp(-1)
    }

    fn integer_decode(self) -> (u64, i16, i8) {
        self.hi.integer_decode()
    }

    fn to_degrees(self) -> Dd {
        self * (Dd::from_f64(180.0) / PI)
    }
    fn to_radians(self) -> Dd {
        self * (PI / Dd::from_f64(180.0))
    }
}

impl Real for Dd {
    fn to_f64_lossy(self) -> f64 {
        self.to_f64()
    }
}
