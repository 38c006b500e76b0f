//! Sensitivity of the profile to the shooting value, and the structural
//! checks built on it.
//!
//! Differentiating the regularized system with respect to `a` gives a
//! linear system for `(f_a, G) = (∂_a f, ∂_a F)` driven by the base
//! trajectory:
//!
//! ```text
//! f_a' = -1/(p-1) |F|^((2-p)/(p-1)) G
//! G'   = -(N-1)/r G + alpha f_a + beta r f_a'
//!        - q/(p-1) |F|^((q-p+1)/(p-1)) sign(F) G
//! ```
//!
//! Both systems integrate together as one four-dimensional state, so the
//! variational samples land exactly on the base profile's radius grid.
//!
//! Two checks use the result. The monotonicity gap
//! `mu a w_a - r w' = r^mu (mu a f_a - r f' - mu f)` must stay positive on
//! the initial interval where `w' > 0`; near the origin the two sides agree
//! through the orders `r^mu`, `r^(mu + p/(p-1))`, and `r^(mu + 2p/(p-1))`,
//! so direct subtraction underflows to rounding noise and the check
//! switches to the leading surviving term
//! `(2q-p)/(2-p) A2 r^(mu + (p+q)/(p-1))` below a cancellation radius. The
//! linearized operator `L_a` applied to `w_a` must vanish, and applied to
//! `r w'` must equal `eta r^eta |r w' - mu w|^(q-p+2) < 0`; both identities
//! are evaluated with derivatives reconstructed algebraically from the
//! system, with no numerical differentiation anywhere.

use crate::dopri::{self, Direction, Event, Options, Outcome};
use crate::error::Error;
use crate::params::DerivedConstants;
use crate::scalar::{lit, Real};
use crate::shooter::{
    self, fprime_from_flux, grid_points, make_sample, origin_sample, rhs_unchecked,
    IntegratorSettings, Profile, Sample, Termination, EV_EXTINCTION, EV_FLIP, EV_PLATEAU,
};

/// One sample of the shooting-value derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarSample<T> {
    pub r: T,
    /// `f_a = ∂_a f`.
    pub fa: T,
    /// `f_a' = ∂_a f'`.
    pub fa_prime: T,
    /// `w_a = ∂_a w = r^mu f_a`.
    pub wa: T,
}

/// Sampled shooting-value derivative, aligned with its base profile.
#[derive(Debug, Clone)]
pub struct VariationalProfile<T> {
    pub a: T,
    /// Samples on exactly the base profile's radius grid.
    pub samples: Vec<VarSample<T>>,
}

/// Monotonicity-gap measurements over the initial `w' > 0` interval.
#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport<T> {
    /// The maximal initial interval with `w' > 0` (sampled radii).
    pub valid_range: (T, T),
    /// Samples inspected inside the range.
    pub samples_checked: usize,
    /// Minimum of the gap `mu a w_a - r w'`.
    pub min_gap: T,
    /// Minimum of `w_a`.
    pub min_wa: T,
    /// Below this radius the gap is evaluated from its leading expansion
    /// term instead of by direct subtraction.
    pub series_radius: T,
    /// True when the gap and `w_a` stayed positive throughout.
    pub pass: bool,
}

/// Residuals of the linearized operator along a profile.
#[derive(Debug, Clone, Copy)]
pub struct LinearizedReport<T> {
    /// `max |L_a(w_a)| / max_term` — the identity `L_a(w_a) = 0` with the
    /// residual scaled by the largest contributing term.
    pub max_normalized_residual: T,
    /// Maximum relative deviation of `L_a(r w')` from its closed form
    /// `eta r^eta |W|^(q-p+2)`.
    pub max_closed_form_deviation: T,
    /// True when the operator evaluation of `L_a(r w')` was strictly
    /// negative at every checked sample.
    pub all_negative: bool,
    pub samples_checked: usize,
    /// Radius range actually checked.
    pub r_range: (T, T),
}

/// Default radius floor for operator-identity checks. The five operator
/// terms cancel down to the closed form `eta r^eta |W|^(q-p+2)`, which
/// shrinks like `r^(mu + p/(p-1) + eta - ...)` relative to the individual
/// terms as `r -> 0`, so the identity is only resolvable where that ratio
/// exceeds the working-precision noise on the terms. At this floor the
/// identity retains two orders of headroom under double-double tolerances;
/// plain `f64` runs need a floor nearer `0.5`.
pub const OPERATOR_CHECK_MIN_RADIUS: f64 = 1e-2;

/// Origin expansion of `(f_a, f_a')` with absorption weight `lambda`; the
/// derivative of the profile expansion term by term:
///
/// ```text
/// f_a(r) = 1 - A1/((p-1)a) r^(p/(p-1))
///            + lambda (2+q-p) A2/((p-1)a) r^((p+q)/(p-1)) + o(r^((p+q)/(p-1)))
/// ```
pub fn variational_series_weighted<T: Real>(
    a: T,
    r: T,
    lambda: T,
    consts: &DerivedConstants<T>,
) -> (T, T) {
    let one: T = T::one();
    let two: T = lit(2.0);
    let p = consts.config.p;
    let q = consts.config.q;
    let pm1 = p - one;
    let c = (a * consts.alpha / consts.n_t()).powf(one / pm1);
    let a1 = consts.c1 * c;
    let a2 = consts.c2 * c.powf(q - p + two);
    let s1 = p / pm1;
    let s2 = (p + q) / pm1;
    let b1 = a1 / (pm1 * a);
    let b2 = (two + q - p) * a2 / (pm1 * a);
    let fa = one - b1 * r.powf(s1) + lambda * b2 * r.powf(s2);
    let fa_prime = -b1 * s1 * r.powf(s1 - one) + lambda * b2 * s2 * r.powf(s2 - one);
    (fa, fa_prime)
}

/// Origin expansion of `(f_a, f_a')` for the main problem (`lambda = 1`).
pub fn variational_series<T: Real>(a: T, r: T, consts: &DerivedConstants<T>) -> (T, T) {
    variational_series_weighted(a, r, T::one(), consts)
}

fn variational_rhs<T: Real>(r: T, y: &[T; 4], consts: &DerivedConstants<T>) -> [T; 4] {
    let one: T = T::one();
    let p = consts.config.p;
    let q = consts.config.q;
    let pm1 = p - one;
    let m = (lit::<T>(2.0) - p) / pm1;
    let base = rhs_unchecked(r, &[y[0], y[1]], one, consts);
    let flux = y[1];
    let g = y[3];
    let fa_prime = -flux.abs().powf(m) * g / pm1;
    let absorption_lin = q / pm1 * flux.abs().powf((q - p + one) / pm1) * flux.signum() * g;
    let dg = -(consts.n_t() - one) / r * g + consts.alpha * y[2] + consts.beta * r * fa_prime
        - absorption_lin;
    [base[0], base[1], fa_prime, dg]
}

/// Integrates the base profile and its shooting-value derivative as one
/// coupled system (classification semantics for the base events). The
/// variational trajectory necessarily stops where the base profile stops.
pub fn integrate_variational<T: Real>(
    a: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<(Profile<T>, VariationalProfile<T>), Error<T>> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::InvalidShootingValue { value: a });
    }
    settings.validate()?;
    let one: T = T::one();
    let r_switch = settings.handoff_radius(a, consts);
    if !(r_switch < settings.r_max) {
        return Err(Error::InvalidSetting {
            name: "r_max",
            detail: format!(
                "horizon {} must exceed the handoff radius {r_switch}",
                settings.r_max
            ),
        });
    }
    let state = shooter::series_state(a, r_switch, one, consts);
    let (fa, fa_prime) = variational_series(a, r_switch, consts);
    // G = ∂_a F = -(p-1)|f'|^(p-2) ∂_a f'.
    let p = consts.config.p;
    let fprime = fprime_from_flux(state.flux, consts);
    let g0 = -(p - one) * fprime.abs().powf(p - lit(2.0)) * fa_prime;
    let y0 = [state.f, state.flux, fa, g0];

    let mu = consts.mu;
    let threshold = (one + settings.plateau_margin) * consts.w_star;
    let g_extinction = move |_r: T, y: &[T; 4]| y[0];
    let g_plateau = move |r: T, y: &[T; 4]| y[0] * r.powf(mu) - threshold;
    let consts_flip = *consts;
    let g_flip = move |r: T, y: &[T; 4]| mu * y[0] + r * fprime_from_flux(y[1], &consts_flip);
    let events = [
        Event {
            g: &g_extinction as &dyn Fn(T, &[T; 4]) -> T,
            direction: Direction::Down,
            terminal: true,
            fine: true,
        },
        Event {
            g: &g_plateau,
            direction: Direction::Up,
            terminal: true,
            fine: false,
        },
        Event {
            g: &g_flip,
            direction: Direction::Down,
            terminal: false,
            fine: false,
        },
    ];

    let opts = Options {
        rel_tol: settings.rel_tol,
        abs_tol: settings.abs_tol,
        max_steps: settings.max_steps,
        h0: None,
    };
    let out = dopri::integrate(
        |r, y| variational_rhs(r, y, consts),
        r_switch,
        settings.r_max,
        y0,
        &opts,
        &events,
    )?;

    let termination = match out.outcome {
        Outcome::TerminalEvent(EV_EXTINCTION) => Termination::FHitZero { r: out.end_r },
        Outcome::TerminalEvent(_) => Termination::WCrossedPlateau { r: out.end_r },
        Outcome::ReachedEnd => Termination::HorizonReached,
        Outcome::StepLimit => Termination::StepLimit { r: out.end_r },
    };
    let first_hit = |idx: usize| out.events.iter().find(|h| h.index == idx).map(|h| h.r);

    let pm1 = p - one;
    let m = (lit::<T>(2.0) - p) / pm1;
    let mut base_samples = vec![origin_sample(a, consts)];
    let mut var_samples = vec![VarSample {
        r: T::zero(),
        fa: one,
        fa_prime: T::zero(),
        wa: T::zero(),
    }];
    for (rk, y) in grid_points(&out, r_switch, settings.samples_per_decade) {
        base_samples.push(make_sample(rk, &[y[0], y[1]], consts));
        let fa_prime = -y[1].abs().powf(m) * y[3] / pm1;
        var_samples.push(VarSample {
            r: rk,
            fa: y[2],
            fa_prime,
            wa: rk.powf(mu) * y[2],
        });
    }

    let base = Profile {
        a,
        r_switch,
        samples: base_samples,
        termination,
        r_extinction: first_hit(EV_EXTINCTION),
        r_flip: first_hit(EV_FLIP),
        r_cross: first_hit(EV_PLATEAU),
        steps: out.steps,
    };
    let var = VariationalProfile {
        a,
        samples: var_samples,
    };
    Ok((base, var))
}

/// Leading coefficient of the monotonicity gap:
/// `mu a f_a - r f' - mu f = kappa2 r^((p+q)/(p-1)) (1 + o(1))` with
/// `kappa2 = (2q-p)/(2-p) A2`. The constant and `r^(p/(p-1))` orders cancel
/// exactly, and so does the `r^(2p/(p-1))` order.
pub fn gap_leading_coefficient<T: Real>(a: T, consts: &DerivedConstants<T>) -> T {
    let one: T = T::one();
    let two: T = lit(2.0);
    let p = consts.config.p;
    let q = consts.config.q;
    let c = (a * consts.alpha / consts.n_t()).powf(one / (p - one));
    let a2 = consts.c2 * c.powf(q - p + two);
    (two * q - p) / (two - p) * a2
}

/// Radius below which the directly-evaluated gap is dominated by rounding
/// noise of the cancelling terms (each of size `~ mu a r^mu`).
fn gap_series_radius<T: Real>(a: T, consts: &DerivedConstants<T>) -> T {
    let one: T = T::one();
    let p = consts.config.p;
    let q = consts.config.q;
    let s2 = (p + q) / (p - one);
    let kappa2 = gap_leading_coefficient(a, consts);
    let headroom: T = lit(100.0);
    (headroom * T::epsilon() * consts.mu * a / kappa2).powf(one / s2)
}

/// Checks `mu a w_a > r w'` and `w_a > 0` on the maximal initial interval
/// where `w' > 0`, switching to the leading expansion term of the gap
/// below the cancellation radius.
pub fn monotonicity_check<T: Real>(
    base: &Profile<T>,
    var: &VariationalProfile<T>,
    consts: &DerivedConstants<T>,
) -> MonotonicityReport<T> {
    let n = base.samples.len().min(var.samples.len());
    let a = base.a;
    let mu = consts.mu;
    let one: T = T::one();
    let p = consts.config.p;
    let q = consts.config.q;
    let s2 = (p + q) / (p - one);
    let r_series = gap_series_radius(a, consts);
    let kappa2 = gap_leading_coefficient(a, consts);

    let mut min_gap = T::infinity();
    let mut min_wa = T::infinity();
    let mut checked = 0usize;
    let mut r_first = T::zero();
    let mut r_last = T::zero();
    for i in 0..n {
        let s = &base.samples[i];
        let v = &var.samples[i];
        if !(s.r > T::zero()) {
            continue;
        }
        if !(s.wprime > T::zero()) {
            break;
        }
        let gap = if s.r < r_series {
            kappa2 * s.r.powf(mu + s2)
        } else {
            mu * a * v.wa - s.r * s.wprime
        };
        min_gap = min_gap.min(gap);
        min_wa = min_wa.min(v.wa);
        if checked == 0 {
            r_first = s.r;
        }
        r_last = s.r;
        checked += 1;
    }
    if checked == 0 {
        // Keep the extrema finite so reports serialize cleanly.
        min_gap = T::zero();
        min_wa = T::zero();
    }
    let pass = checked > 0 && min_gap > T::zero() && min_wa > T::zero();
    MonotonicityReport {
        valid_range: (r_first, r_last),
        samples_checked: checked,
        min_gap,
        min_wa,
        series_radius: r_series,
        pass,
    }
}

struct DerivChain<T> {
    fpp: T,
    fppp: T,
    fapp: T,
}

/// Reconstructs second and third radial derivatives algebraically from the
/// sampled `(f, f', f_a, f_a')` by differentiating the governing system —
/// never by finite differences.
fn chain_at<T: Real>(
    s: &Sample<T>,
    v: &VarSample<T>,
    consts: &DerivedConstants<T>,
) -> Option<DerivChain<T>> {
    let one: T = T::one();
    let two: T = lit(2.0);
    let p = consts.config.p;
    let q = consts.config.q;
    let pm1 = p - one;
    let m = (two - p) / pm1;
    let nm1 = consts.n_t() - one;
    let r = s.r;
    if s.fprime == T::zero() {
        return None;
    }
    // Flux and its derivative from the system.
    let flux = s.fprime.abs().powf(pm1) * -s.fprime.signum();
    let g = -pm1 * s.fprime.abs().powf(p - two) * v.fa_prime;
    let base = rhs_unchecked(r, &[s.f, flux], one, consts);
    let dflux = base[1];
    let fam = flux.abs().powf(m);
    let fam1 = flux.abs().powf(m - one) * flux.signum();
    let fpp = -fam * dflux / pm1;
    // G' from the variational system.
    let qexp = (q - p + one) / pm1;
    let dg = -nm1 / r * g + consts.alpha * v.fa + consts.beta * r * v.fa_prime
        - q / pm1 * flux.abs().powf(qexp) * flux.signum() * g;
    let fapp = -(m * fam1 * dflux * g + fam * dg) / pm1;
    // F'' by differentiating F' = -(N-1)/r F + alpha f + beta r f' - |F|^(q/(p-1)).
    let qf = q / pm1;
    let ddflux = nm1 / (r * r) * flux - nm1 / r * dflux
        + (consts.alpha + consts.beta) * s.fprime
        + consts.beta * r * fpp
        - qf * flux.abs().powf(qf - one) * flux.signum() * dflux;
    let fppp = -(m * fam1 * dflux * dflux + fam * ddflux) / pm1;
    Some(DerivChain { fpp, fppp, fapp })
}

struct OperatorValue<T> {
    value: T,
    scale: T,
}

/// Evaluates `L_a(phi)` for `phi = r^mu g`, given `g` and its first two
/// derivatives, and also the magnitude of the largest contributing term.
///
/// Working through `g` keeps every building block cancellation-free:
/// `W = r w' - mu w` reduces to `r^(mu+1) f'`, `r phi' - mu phi` to
/// `r^(mu+1) g'`, and `(alpha - beta mu) phi + beta r phi'` to
/// `r^mu (alpha g + beta r g')`, so no difference of nearly equal products
/// enters before the inherent cancellation of the five-term sum itself.
fn operator_at<T: Real>(
    r: T,
    f: T,
    fp: T,
    g: T,
    gp: T,
    gpp: T,
    consts: &DerivedConstants<T>,
) -> OperatorValue<T> {
    let one: T = T::one();
    let two: T = lit(2.0);
    let p = consts.config.p;
    let q = consts.config.q;
    let mu = consts.mu;
    let n = consts.n_t();
    let alpha = consts.alpha;
    let beta = consts.beta;
    let eta = consts.eta;

    let rmu = r.powf(mu);
    let big_w = rmu * r * fp;
    let abs_w = big_w.abs();
    let sgn_w = big_w.signum();
    let drift = rmu * (alpha * f + beta * r * fp) - r.powf(eta) * abs_w.powf(q);

    let phi = rmu * g;
    let rphip = rmu * (mu * g + r * gp);
    let r2phipp = rmu * (mu * (mu - one) * g + two * mu * r * gp + r * r * gpp);
    let dir = rmu * r * gp;

    let t1 = (p - one) * r2phipp;
    let t2 = (n - one - two * mu * (p - one)) * rphip;
    let t3 = mu * (mu - n) * phi;
    let t4 = (two - p) * abs_w.powf(one - p) * sgn_w * dir * drift;
    let t5 = abs_w.powf(two - p)
        * (rmu * (alpha * g + beta * r * gp) - q * r.powf(eta) * abs_w.powf(q - one) * sgn_w * dir);
    let value = t1 + t2 + t3 + t4 + t5;
    let scale = t1
        .abs()
        .max(t2.abs())
        .max(t3.abs())
        .max(t4.abs())
        .max(t5.abs());
    OperatorValue { value, scale }
}

/// One row of the tabulated sensitivity diagnostics, aligned with the
/// profile's radius grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticSample<T> {
    pub r: T,
    /// Monotonicity gap `mu a w_a - r w'`, evaluated from its leading
    /// expansion term below the cancellation radius and by direct
    /// subtraction above it.
    pub mono_gap: T,
    /// `L_a(w_a)` (zero up to roundoff), where the derivative chain is
    /// defined and `r >= operator_r_min`.
    pub la_wa: Option<T>,
    /// `L_a(r w')` (strictly negative), same availability.
    pub la_rwprime: Option<T>,
}

/// Evaluates the per-sample diagnostics along an aligned base/sensitivity
/// pair: the monotonicity gap everywhere, and the raw (unnormalized)
/// operator values wherever `r >= operator_r_min`, `f > 0`, and `f' != 0`.
/// [`OPERATOR_CHECK_MIN_RADIUS`] is the recommended operator floor.
pub fn diagnostic_samples<T: Real>(
    base: &Profile<T>,
    var: &VariationalProfile<T>,
    consts: &DerivedConstants<T>,
    operator_r_min: T,
) -> Vec<DiagnosticSample<T>> {
    let n = base.samples.len().min(var.samples.len());
    let one: T = T::one();
    let two: T = lit(2.0);
    let a = base.a;
    let mu = consts.mu;
    let p = consts.config.p;
    let q = consts.config.q;
    let s2 = (p + q) / (p - one);
    let r_series = gap_series_radius(a, consts);
    let kappa2 = gap_leading_coefficient(a, consts);

    (0..n)
        .map(|i| {
            let s = &base.samples[i];
            let v = &var.samples[i];
            let mono_gap = if s.r < r_series {
                kappa2 * s.r.powf(mu + s2)
            } else {
                mu * a * v.wa - s.r * s.wprime
            };
            let mut la_wa = None;
            let mut la_rwprime = None;
            if s.r >= operator_r_min && s.f > T::zero() {
                if let Some(ch) = chain_at(s, v, consts) {
                    let r = s.r;
                    la_wa = Some(
                        operator_at(r, s.f, s.fprime, v.fa, v.fa_prime, ch.fapp, consts).value,
                    );
                    let g = mu * s.f + r * s.fprime;
                    let gp = (mu + one) * s.fprime + r * ch.fpp;
                    let gpp = (mu + two) * ch.fpp + r * ch.fppp;
                    la_rwprime = Some(operator_at(r, s.f, s.fprime, g, gp, gpp, consts).value);
                }
            }
            DiagnosticSample {
                r: s.r,
                mono_gap,
                la_wa,
                la_rwprime,
            }
        })
        .collect()
}

/// Verifies the two operator identities along a profile:
/// `L_a(w_a) = 0` (normalized by the largest contributing term) and
/// `L_a(r w') = eta r^eta |W|^(q-p+2) < 0` (operator evaluation against the
/// closed form). Checked at samples with `r >= r_min`;
/// [`OPERATOR_CHECK_MIN_RADIUS`] is the recommended floor for
/// extended-precision runs.
pub fn linearized_residual<T: Real>(
    base: &Profile<T>,
    var: &VariationalProfile<T>,
    consts: &DerivedConstants<T>,
    r_min: T,
) -> LinearizedReport<T> {
    let n = base.samples.len().min(var.samples.len());
    let one: T = T::one();
    let two: T = lit(2.0);
    let q = consts.config.q;
    let p = consts.config.p;
    let mu = consts.mu;
    let eta = consts.eta;

    let mut max_resid = T::zero();
    let mut max_dev = T::zero();
    let mut all_negative = true;
    let mut checked = 0usize;
    let mut r_first = T::zero();
    let mut r_last = T::zero();
    for i in 0..n {
        let s = &base.samples[i];
        let v = &var.samples[i];
        if !(s.r >= r_min) || !(s.f > T::zero()) {
            continue;
        }
        let Some(ch) = chain_at(s, v, consts) else {
            continue;
        };
        let r = s.r;

        // Identity 1: L_a(w_a) = 0, with w_a = r^mu f_a.
        let ov = operator_at(r, s.f, s.fprime, v.fa, v.fa_prime, ch.fapp, consts);
        if ov.scale > T::zero() {
            max_resid = max_resid.max(ov.value.abs() / ov.scale);
        }

        // Identity 2: L_a(r w') equals its closed form and is negative;
        // r w' = r^mu (mu f + r f').
        let g = mu * s.f + r * s.fprime;
        let gp = (mu + one) * s.fprime + r * ch.fpp;
        let gpp = (mu + two) * ch.fpp + r * ch.fppp;
        let op = operator_at(r, s.f, s.fprime, g, gp, gpp, consts);
        let abs_w = (r.powf(mu + one) * s.fprime).abs();
        let closed = eta * r.powf(eta) * abs_w.powf(q - p + two);
        let dev = ((op.value - closed) / closed).abs();
        max_dev = max_dev.max(dev);
        if !(op.value < T::zero()) {
            all_negative = false;
        }

        if checked == 0 {
            r_first = r;
        }
        r_last = r;
        checked += 1;
    }
    LinearizedReport {
        max_normalized_residual: max_resid,
        max_closed_form_deviation: max_dev,
        all_negative: all_negative && checked > 0,
        samples_checked: checked,
        r_range: (r_first, r_last),
    }
}
