//! Exponent configuration, admissibility window, and derived constants.
//!
//! The diffusion exponent `p` and absorption exponent `q` are admissible
//! when
//!
//! ```text
//! 2N/(N+1) < p < 2        (supercritical fast diffusion)
//! p/2 < q < p - N/(N+1)   (absorption strong enough, below the cutoff)
//! ```
//!
//! Inside that window the similarity exponents `alpha = (p-q)/(2q-p)` and
//! `beta = (q-p+1)/(2q-p)` are positive and every derived constant below is
//! well defined.

use crate::error::{BoundViolation, Error};
use crate::scalar::{int, lit, ratio, Real};

/// Dimension and exponent pair defining one problem instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentConfig<T> {
    /// Spatial dimension `N >= 1`.
    pub n: u32,
    /// Diffusion exponent `p`.
    pub p: T,
    /// Gradient-absorption exponent `q`.
    pub q: T,
}

impl<T: Real> ExponentConfig<T> {
    pub fn new(n: u32, p: T, q: T) -> Self {
        ExponentConfig { n, p, q }
    }

    /// Dimension as a scalar.
    pub fn n_t(&self) -> T {
        int(self.n as i64)
    }
}

/// Constants derived from an admissible [`ExponentConfig`].
///
/// Constructed only through [`validate`], so every instance satisfies the
/// window bounds and all fields are finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants<T> {
    /// The validated configuration.
    pub config: ExponentConfig<T>,
    /// Self-similar amplitude exponent `alpha = (p-q)/(2q-p) > 0`.
    pub alpha: T,
    /// Self-similar spatial exponent `beta = (q-p+1)/(2q-p) > 0`.
    pub beta: T,
    /// Fast-tail exponent `mu = p/(2-p) > N`.
    pub mu: T,
    /// Absorption weight exponent `eta = -(2q-p)/(2-p) < 0` appearing in
    /// the equation for `w = r^mu f`.
    pub eta: T,
    /// Plateau constant `w* = (mu^(p-1) (mu-N) / (mu beta - alpha))^(1/(2-p))`.
    pub w_star: T,
    /// Lower end of the admissible `p` window, `2N/(N+1)`.
    pub p_critical: T,
    /// Upper end of the admissible `q` window, `p - N/(N+1)`.
    pub q_critical: T,
    /// Decay exponent of slow orbits, `alpha/beta = (p-q)/(q-p+1)`.
    pub slow_exponent: T,
    /// Decay exponent of the fast (critical) orbit, equal to `mu`.
    pub fast_exponent: T,
    /// `p(N+1) - 2N > 0`; appears in the critical slope law and makes the
    /// plateau constant satisfy `mu w* = (w* / (p(N+1)-2N))^(1/(p-1))`.
    pub uniqueness_denominator: T,
    /// Leading origin-expansion coefficient `C1 = (p-1)/p`.
    pub c1: T,
    /// Absorption origin-expansion coefficient
    /// `C2 = (p-1) / ((p+q)(q + N(p-1)))`.
    pub c2: T,
    /// Quadratic-flux origin-expansion coefficient
    /// `C3 = (p-1) q / (2 p^2 (p + N(p-1)) (2q-p))`.
    pub c3: T,
}

/// Checks the admissibility window and computes every derived constant.
///
/// On rejection the error lists *all* violated bounds with their numeric
/// values, not just the first one encountered.
pub fn validate<T: Real>(config: ExponentConfig<T>) -> Result<DerivedConstants<T>, Error<T>> {
    let one: T = T::one();
    let two: T = lit(2.0);
    let n = config.n_t();
    let p = config.p;
    let q = config.q;

    let mut violations: Vec<BoundViolation<T>> = Vec::new();
    if config.n < 1 {
        violations.push(BoundViolation {
            name: "N",
            value: n,
            constraint: "must be at least 1".to_string(),
        });
    }
    if !p.is_finite() || !q.is_finite() {
        violations.push(BoundViolation {
            name: if p.is_finite() { "q" } else { "p" },
            value: if p.is_finite() { q } else { p },
            constraint: "must be finite".to_string(),
        });
        return Err(Error::WindowViolation { violations });
    }
    let p_critical = two * n / (n + one);
    let q_critical = p - n / (n + one);
    if !(p > p_critical) {
        violations.push(BoundViolation {
            name: "p",
            value: p,
            constraint: format!("must exceed 2N/(N+1) = {p_critical}"),
        });
    }
    if !(p < two) {
        violations.push(BoundViolation {
            name: "p",
            value: p,
            constraint: "must be below 2".to_string(),
        });
    }
    if !(q > p / two) {
        violations.push(BoundViolation {
            name: "q",
            value: q,
            constraint: format!("must exceed p/2 = {}", p / two),
        });
    }
    if !(q < q_critical) {
        violations.push(BoundViolation {
            name: "q",
            value: q,
            constraint: format!("must be below p - N/(N+1) = {q_critical}"),
        });
    }
    if !violations.is_empty() {
        return Err(Error::WindowViolation { violations });
    }

    let sim = two * q - p; // > 0
    let gap = two - p; // > 0
    let mut alpha = (p - q) / sim;
    let mut beta = (q - p + one) / sim;
    let mut mu = p / gap;
    let mut eta = -sim / gap;
    let mut uniqueness_denominator = p * (n + one) - two * n;
    let mut slow_exponent = alpha / beta;
    let mut c1 = (p - one) / p;
    let mut c2 = (p - one) / ((p + q) * (q + n * (p - one)));
    let mut c3 = (p - one) * q / (two * p * p * (p + n * (p - one)) * sim);
    let (mut p_critical, mut q_critical) = (p_critical, q_critical);

    // Exponents are almost always short decimal literals, and the half-ulp
    // binary quantization of each gets amplified by the small denominators
    // 2q - p and 2 - p into a few ulps of error on every ratio above (for
    // p = 1.5, q = 0.9 the direct quotient gives alpha = 2 - 2 ulp instead
    // of 2). When both exponents are exactly the rounded value of a
    // small-denominator rational, the rational constants are recomputed in
    // exact integer arithmetic and rounded once; other inputs keep the
    // directly evaluated values.
    if let Some(exact) = RationalConstants::derive(config.n, p, q) {
        alpha = exact.alpha;
        beta = exact.beta;
        mu = exact.mu;
        eta = exact.eta;
        uniqueness_denominator = exact.uniqueness_denominator;
        slow_exponent = exact.slow_exponent;
        c1 = exact.c1;
        c2 = exact.c2;
        c3 = exact.c3;
        p_critical = exact.p_critical;
        q_critical = exact.q_critical;
    }

    let w_star = (mu.powf(p - one) * (mu - n) / (mu * beta - alpha)).powf(one / gap);

    // Strictly inside the window every constant is finite in exact
    // arithmetic, but several diverge at the boundary — the similarity
    // pair as 2q -> p and the plateau constant as p -> 2 — so interior
    // exponents close enough to an edge can still overflow the scalar
    // type. Every downstream formula assumes finite constants, so such
    // configurations are rejected here.
    if !alpha.is_finite() || !beta.is_finite() || !eta.is_finite() {
        violations.push(BoundViolation {
            name: "q",
            value: q,
            constraint: "puts 2q - p below what the scalar type resolves".to_string(),
        });
    }
    if !w_star.is_finite() || !(w_star > T::zero()) || !(mu * w_star).is_finite() {
        violations.push(BoundViolation {
            name: "p",
            value: p,
            constraint: "makes the plateau constant overflow the scalar type".to_string(),
        });
    }
    if !violations.is_empty() {
        return Err(Error::WindowViolation { violations });
    }

    Ok(DerivedConstants {
        config,
        alpha,
        beta,
        mu,
        eta,
        w_star,
        p_critical,
        q_critical,
        slow_exponent,
        fast_exponent: mu,
        uniqueness_denominator,
        c1,
        c2,
        c3,
    })
}

/// Origin-expansion coefficients `(C1, C2, C3)` of an admissible
/// configuration; see [`crate::shooter::series_eval`] for the expansion
/// they feed.
pub fn expansion_coefficients<T: Real>(
    config: ExponentConfig<T>,
) -> Result<(T, T, T), Error<T>> {
    let d = validate(config)?;
    Ok((d.c1, d.c2, d.c3))
}

impl<T: Real> DerivedConstants<T> {
    /// Shorthand for the validated dimension as a scalar.
    pub fn n_t(&self) -> T {
        self.config.n_t()
    }

    /// Closed-form cap on the upward seed sweep: any `a` at or above this
    /// value pushes `w` past `2 w*` at a computable radius, so the sweep
    /// never needs to look further. Derived from the lower bound
    /// `w(r_a) >= alpha^(-p/(q(2-p))) 2^(-2/(2-p)) a^((2q-p)/(q(2-p)))`
    /// at `r_a = alpha^(-1/q) a^((q-1)/q) / 2`.
    pub fn seed_cap(&self) -> T {
        let two: T = lit(2.0);
        let p = self.config.p;
        let q = self.config.q;
        let gap = two - p;
        let base = two * self.w_star
            * self.alpha.powf(p / (q * gap))
            * two.powf(two / gap);
        base.powf(q * gap / (two * q - p))
    }

    /// Exponent of the absorption weight in the small-`a` rescaled
    /// problem: the rescaled profile solves the same system with the
    /// absorption term multiplied by `a^((2q-p)/p)`.
    pub fn rescale_exponent(&self) -> T {
        (lit::<T>(2.0) * self.config.q - self.config.p) / self.config.p
    }

    /// Amplitude of the critical slope law: on plateau stretches,
    /// `f'(r) ~ -(w*/(p(N+1)-2N))^(1/(p-1)) r^(-2/(2-p))`, and the
    /// prefactor equals `mu w*`.
    pub fn critical_slope_amplitude(&self) -> T {
        let one: T = T::one();
        (self.w_star / self.uniqueness_denominator).powf(one / (self.config.p - one))
    }
}

/// The rational members of [`DerivedConstants`], recomputed in exact integer
/// arithmetic from small-denominator rational interpretations of the
/// exponents and rounded once into the scalar type.
struct RationalConstants<T> {
    alpha: T,
    beta: T,
    mu: T,
    eta: T,
    p_critical: T,
    q_critical: T,
    slow_exponent: T,
    uniqueness_denominator: T,
    c1: T,
    c2: T,
    c3: T,
}

impl<T: Real> RationalConstants<T> {
    /// Returns `None` when either exponent carries no small-denominator
    /// rational interpretation, a constant cannot be formed without integer
    /// overflow, or a sign disagrees with the already-validated window (a
    /// sub-ulp boundary case); the caller then keeps the directly evaluated
    /// values.
    fn derive(n: u32, p: T, q: T) -> Option<Self> {
        let p = Ratio::reconstruct(p)?;
        let q = Ratio::reconstruct(q)?;
        let n = Ratio::integer(i128::from(n));
        let one = Ratio::integer(1);
        let two = Ratio::integer(2);

        let sim = two.mul(q)?.sub(p)?; // 2q - p
        let gap = two.sub(p)?; // 2 - p
        let p_minus_one = p.sub(one)?;
        let alpha = p.sub(q)?.div(sim)?;
        let beta = q.sub(p)?.add(one)?.div(sim)?;
        let uniqueness_denominator = p.mul(n.add(one)?)?.sub(two.mul(n)?)?;
        if !(sim.is_positive()
            && gap.is_positive()
            && p_minus_one.is_positive()
            && alpha.is_positive()
            && beta.is_positive()
            && uniqueness_denominator.is_positive())
        {
            return None;
        }
        let mu = p.div(gap)?;
        let eta = sim.div(gap)?.neg();
        let p_critical = two.mul(n)?.div(n.add(one)?)?;
        let q_critical = p.sub(n.div(n.add(one)?)?)?;
        let slow_exponent = p.sub(q)?.div(q.sub(p)?.add(one)?)?;
        let c1 = p_minus_one.div(p)?;
        let c2 = p_minus_one.div(p.add(q)?.mul(q.add(n.mul(p_minus_one)?)?)?)?;
        let c3 = p_minus_one.mul(q)?.div(
            two.mul(p)?
                .mul(p)?
                .mul(p.add(n.mul(p_minus_one)?)?)?
                .mul(sim)?,
        )?;

        Some(RationalConstants {
            alpha: alpha.to_scalar()?,
            beta: beta.to_scalar()?,
            mu: mu.to_scalar()?,
            eta: eta.to_scalar()?,
            p_critical: p_critical.to_scalar()?,
            q_critical: q_critical.to_scalar()?,
            slow_exponent: slow_exponent.to_scalar()?,
            uniqueness_denominator: uniqueness_denominator.to_scalar()?,
            c1: c1.to_scalar()?,
            c2: c2.to_scalar()?,
            c3: c3.to_scalar()?,
        })
    }
}

/// Reduced fraction with positive denominator and checked arithmetic.
#[derive(Debug, Clone, Copy)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    /// Largest denominator accepted as a plausible decimal-literal
    /// interpretation of an exponent (covers four decimal places).
    const DEN_CAP: i128 = 10_000;

    fn integer(v: i128) -> Self {
        Ratio { num: v, den: 1 }
    }

    fn reduced(num: i128, den: i128) -> Option<Self> {
        if den == 0 {
            return None;
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = i128::try_from(gcd(num.unsigned_abs(), den.unsigned_abs())).ok()?;
        let g = g.max(1);
        Some(Ratio {
            num: num / g * sign,
            den: den / g * sign,
        })
    }

    /// Reconstructs the smallest-denominator fraction that rounds to
    /// `value`, walking the continued-fraction convergents of its `f64`
    /// projection; `None` when no denominator up to [`Self::DEN_CAP`] works
    /// or when `value` carries information beyond its `f64` projection.
    fn reconstruct<T: Real>(value: T) -> Option<Self> {
        let x = value.to_f64_lossy();
        if !x.is_finite() || value != lit::<T>(x) {
            return None;
        }
        // Convergent recurrence n_k = a_k n_(k-1) + n_(k-2), seeded so the
        // first step yields floor(x)/1.
        let (mut num_prev, mut num) = (0i128, 1i128);
        let (mut den_prev, mut den) = (1i128, 0i128);
        let mut t = x.abs();
        for _ in 0..64 {
            let whole = t.floor();
            if whole > 1e18 {
                return None;
            }
            let a = whole as i128;
            let num_next = a.checked_mul(num)?.checked_add(num_prev)?;
            let den_next = a.checked_mul(den)?.checked_add(den_prev)?;
            if den_next > Self::DEN_CAP || num_next > (1 << 53) {
                return None;
            }
            let candidate = Ratio {
                num: if x < 0.0 { -num_next } else { num_next },
                den: den_next,
            };
            if candidate.rounds_to(value) {
                return Some(candidate);
            }
            let frac = t - whole;
            if frac == 0.0 {
                return None;
            }
            (num_prev, num) = (num, num_next);
            (den_prev, den) = (den, den_next);
            t = frac.recip();
        }
        None
    }

    /// Whether `value` is exactly the rounding of this fraction, checked in
    /// `f64` and again in `T` so narrower scalar types also recognize their
    /// decimal literals.
    fn rounds_to<T: Real>(self, value: T) -> bool {
        self.num as f64 / self.den as f64 == value.to_f64_lossy()
            || ratio::<T>(self.num as i64, self.den as i64) == value
    }

    fn add(self, other: Self) -> Option<Self> {
        let cross_a = self.num.checked_mul(other.den)?;
        let cross_b = other.num.checked_mul(self.den)?;
        Self::reduced(
            cross_a.checked_add(cross_b)?,
            self.den.checked_mul(other.den)?,
        )
    }

    fn sub(self, other: Self) -> Option<Self> {
        self.add(other.neg())
    }

    fn neg(self) -> Self {
        Ratio {
            num: -self.num,
            den: self.den,
        }
    }

    fn mul(self, other: Self) -> Option<Self> {
        Self::reduced(
            self.num.checked_mul(other.num)?,
            self.den.checked_mul(other.den)?,
        )
    }

    fn div(self, other: Self) -> Option<Self> {
        Self::reduced(
            self.num.checked_mul(other.den)?,
            self.den.checked_mul(other.num)?,
        )
    }

    fn is_positive(self) -> bool {
        self.num > 0
    }

    /// Single rounding into the scalar type; `None` when a part exceeds the
    /// range that converts exactly.
    fn to_scalar<T: Real>(self) -> Option<T> {
        let limit = 1i128 << 53;
        if self.num.abs() > limit || self.den > limit {
            return None;
        }
        Some(ratio::<T>(self.num as i64, self.den as i64))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
