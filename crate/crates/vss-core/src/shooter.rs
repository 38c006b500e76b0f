//! Profile integration by shooting from the origin.
//!
//! The second-order profile equation degenerates at `r = 0` and wherever
//! `f' = 0`, so integration works on the regularized first-order system in
//! `(f, F)`, where `F = -|f'|^(p-2) f'` is the sign-flipped radial flux
//! (`F >= 0` along profiles with `f' <= 0`):
//!
//! ```text
//! f' = -|F|^((2-p)/(p-1)) F
//! F' = -(N-1)/r F + alpha f + beta r f' - lambda |F|^(q/(p-1))
//! ```
//!
//! The absorption weight `lambda` is 1 for the main problem, 0 for the
//! zero-absorption limit profile, and `a^((2q-p)/p)` for the small-`a`
//! rescaled profile; all three share this module.
//!
//! Integration starts at a small handoff radius `r_switch` from a four-term
//! origin expansion (see [`series_eval`]) and runs with three events armed:
//! extinction (`f = 0`, terminal), plateau crossing
//! (`w = r^mu f` passing `(1 + margin) w*`, terminal or recording), and the
//! first sign change of `w'` (recording). The returned [`Profile`] carries
//! samples on a logarithmic grid plus termination metadata.

use crate::dopri::{self, Direction, Event, Options, Outcome};
use crate::error::Error;
use crate::params::DerivedConstants;
use crate::scalar::{int, lit, Real};

/// Point state of the regularized system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State<T> {
    pub r: T,
    /// Profile value `f(r)`.
    pub f: T,
    /// Sign-flipped flux `F(r) = -|f'|^(p-2) f'`.
    pub flux: T,
}

/// One profile sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<T> {
    pub r: T,
    pub f: T,
    pub fprime: T,
    /// `w = r^mu f`.
    pub w: T,
    /// `w' = r^(mu-1) (r f' + mu f)`.
    pub wprime: T,
    /// Energy `E = (p-1)/p |f'|^p + alpha/2 f^2`; strictly decreasing in `r`.
    pub energy: T,
}

/// Why integration stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination<T> {
    /// `f` reached zero at the given radius (extinction).
    FHitZero { r: T },
    /// `w` crossed `(1 + plateau_margin) w*` at the given radius.
    WCrossedPlateau { r: T },
    /// Neither event fired before `r_max`.
    HorizonReached,
    /// The step budget ran out at the given radius.
    StepLimit { r: T },
}

/// Sampled trajectory with termination metadata.
#[derive(Debug, Clone)]
pub struct Profile<T> {
    /// Shooting value `f(0)`.
    pub a: T,
    /// Handoff radius actually used.
    pub r_switch: T,
    /// Samples: exact origin row, then a logarithmic grid from `r_switch`,
    /// then the exact termination point.
    pub samples: Vec<Sample<T>>,
    pub termination: Termination<T>,
    /// First zero of `f`, when reached.
    pub r_extinction: Option<T>,
    /// First sign change of `w'`, when one occurred.
    pub r_flip: Option<T>,
    /// First crossing of `(1 + plateau_margin) w*`, when one occurred.
    pub r_cross: Option<T>,
    /// Accepted plus rejected integrator steps.
    pub steps: u64,
}

impl<T: Real> Profile<T> {
    /// Final sampled state.
    pub fn last(&self) -> &Sample<T> {
        self.samples.last().expect("profiles always carry samples")
    }
}

/// Whether a plateau crossing stops integration or is only recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateauCrossing {
    /// Stop at the crossing (classification semantics).
    Stop,
    /// Record the crossing and continue to the horizon (tail diagnostics).
    Record,
}

/// Tolerances, horizon, and sampling density for profile integration.
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSettings<T> {
    /// Relative tolerance of the step error control.
    pub rel_tol: T,
    /// Absolute tolerance. Must stay far below the smallest `f` of
    /// interest: profiles decay like `r^-mu`, so values reach `~1e-22`
    /// at wide horizons and an absolute floor as large as `1e-12` visibly
    /// corrupts tails and bisection limits.
    pub abs_tol: T,
    /// Integration horizon.
    pub r_max: T,
    /// Budget of accepted plus rejected steps.
    pub max_steps: u64,
    /// Log-grid sampling density of the returned profile.
    pub samples_per_decade: u32,
    /// Relative margin over `w*` that counts as a plateau crossing.
    pub plateau_margin: T,
    /// Series handoff radius; `None` picks
    /// `min(1e-2, abs_tol^((p-1)/(2p)) (a alpha / N)^(-1/(2p)))`, which
    /// balances the series remainder against `abs_tol`.
    pub r_switch: Option<T>,
}

impl<T: Real> IntegratorSettings<T> {
    pub fn defaults() -> Self {
        IntegratorSettings {
            rel_tol: lit(1e-10),
            abs_tol: lit(1e-30),
            r_max: lit(1e4),
            max_steps: 10_000_000,
            samples_per_decade: 64,
            plateau_margin: lit(1e-3),
            r_switch: None,
        }
    }

    /// Sanity-checks every field.
    pub fn validate(&self) -> Result<(), Error<T>> {
        if !(self.rel_tol > T::zero()) || !self.rel_tol.is_finite() {
            return Err(Error::InvalidSetting {
                name: "rel_tol",
                detail: format!("must be positive and finite, got {}", self.rel_tol),
            });
        }
        if !(self.abs_tol > T::zero()) || !self.abs_tol.is_finite() {
            return Err(Error::InvalidSetting {
                name: "abs_tol",
                detail: format!("must be positive and finite, got {}", self.abs_tol),
            });
        }
        if !(self.r_max > T::zero()) || !self.r_max.is_finite() {
            return Err(Error::InvalidSetting {
                name: "r_max",
                detail: format!("must be positive and finite, got {}", self.r_max),
            });
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidSetting {
                name: "max_steps",
                detail: "must be positive".to_string(),
            });
        }
        if self.samples_per_decade == 0 {
            return Err(Error::InvalidSetting {
                name: "samples_per_decade",
                detail: "must be positive".to_string(),
            });
        }
        if !(self.plateau_margin > T::zero()) || !self.plateau_margin.is_finite() {
            return Err(Error::InvalidSetting {
                name: "plateau_margin",
                detail: format!("must be positive and finite, got {}", self.plateau_margin),
            });
        }
        if let Some(rs) = self.r_switch {
            if !(rs > T::zero()) || !(rs < self.r_max) {
                return Err(Error::InvalidSetting {
                    name: "r_switch",
                    detail: format!("must lie in (0, r_max), got {rs}"),
                });
            }
        }
        Ok(())
    }

    /// Handoff radius for shooting value `a`, honoring an explicit
    /// override.
    pub fn handoff_radius(&self, a: T, consts: &DerivedConstants<T>) -> T {
        if let Some(rs) = self.r_switch {
            return rs;
        }
        let one: T = T::one();
        let two: T = lit(2.0);
        let p = consts.config.p;
        let c_base = a * consts.alpha / consts.n_t();
        let formula = self.abs_tol.powf((p - one) / (two * p)) * c_base.powf(-one / (two * p));
        formula.min(lit(1e-2)).min(self.r_max * lit(0.5))
    }
}

impl<T: Real> Default for IntegratorSettings<T> {
    fn default() -> Self {
        Self::defaults()
    }
}

/// `f'` recovered from the sign-flipped flux: `f' = -|F|^((2-p)/(p-1)) F`.
pub fn fprime_from_flux<T: Real>(flux: T, consts: &DerivedConstants<T>) -> T {
    let one: T = T::one();
    let p = consts.config.p;
    let em = (lit::<T>(2.0) - p) / (p - one);
    -flux.abs().powf(em) * flux
}

/// Right-hand side of the regularized system with absorption weight
/// `lambda`; `(f, F) -> (f', F')`.
///
/// Errors with [`Error::NonFiniteState`] if `r <= 0` (the `(N-1)/r` drift
/// is undefined at the origin; start from [`series_eval`] instead).
pub fn rhs<T: Real>(
    r: T,
    f: T,
    flux: T,
    lambda: T,
    consts: &DerivedConstants<T>,
) -> Result<(T, T), Error<T>> {
    if !(r > T::zero()) {
        return Err(Error::NonFiniteState { r });
    }
    let [df, dflux] = rhs_unchecked(r, &[f, flux], lambda, consts);
    Ok((df, dflux))
}

#[inline]
pub(crate) fn rhs_unchecked<T: Real>(
    r: T,
    y: &[T; 2],
    lambda: T,
    consts: &DerivedConstants<T>,
) -> [T; 2] {
    let one: T = T::one();
    let p = consts.config.p;
    let q = consts.config.q;
    let fprime = fprime_from_flux(y[1], consts);
    let absorption = y[1].abs().powf(q / (p - one));
    let dflux = -(consts.n_t() - one) / r * y[1] + consts.alpha * y[0] + consts.beta * r * fprime
        - lambda * absorption;
    [fprime, dflux]
}

/// Origin expansion of the profile with absorption weight `lambda`,
/// returning `(f, f')` at radius `r`:
///
/// ```text
/// f(r) = a - A1 r^(p/(p-1)) + lambda A2 r^((p+q)/(p-1)) + A3 r^(2p/(p-1))
///        + O(r^((p+2q)/(p-1)))
/// A1 = C1 c,  A2 = C2 c^(q-p+2),  A3 = C3 c^(3-p),  c = (a alpha / N)^(1/(p-1))
/// ```
///
/// The quadratic-flux coefficient `A3` does not depend on `lambda`.
pub fn series_eval_weighted<T: Real>(
    a: T,
    r: T,
    lambda: T,
    consts: &DerivedConstants<T>,
) -> (T, T) {
    let one: T = T::one();
    let two: T = lit(2.0);
    let three: T = lit(3.0);
    let p = consts.config.p;
    let q = consts.config.q;
    let pm1 = p - one;
    let c = (a * consts.alpha / consts.n_t()).powf(one / pm1);
    let a1 = consts.c1 * c;
    let a2 = consts.c2 * c.powf(q - p + two);
    let a3 = consts.c3 * c.powf(three - p);
    let s1 = p / pm1;
    let s2 = (p + q) / pm1;
    let s3 = two * p / pm1;
    let f = a - a1 * r.powf(s1) + lambda * a2 * r.powf(s2) + a3 * r.powf(s3);
    let fprime = -a1 * s1 * r.powf(s1 - one)
        + lambda * a2 * s2 * r.powf(s2 - one)
        + a3 * s3 * r.powf(s3 - one);
    (f, fprime)
}

/// Origin expansion of the main problem (`lambda = 1`); see
/// [`series_eval_weighted`].
pub fn series_eval<T: Real>(a: T, r: T, consts: &DerivedConstants<T>) -> (T, T) {
    series_eval_weighted(a, r, T::one(), consts)
}

/// System state at the handoff radius, built from the origin expansion.
pub fn series_state<T: Real>(a: T, r: T, lambda: T, consts: &DerivedConstants<T>) -> State<T> {
    let (f, fprime) = series_eval_weighted(a, r, lambda, consts);
    // F = -|f'|^(p-2) f' = |f'|^(p-1) for f' < 0.
    let flux = fprime.abs().powf(consts.config.p - T::one()) * -fprime.signum();
    State { r, f, flux }
}

fn check_shooting_value<T: Real>(a: T) -> Result<(), Error<T>> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::InvalidShootingValue { value: a });
    }
    Ok(())
}

pub(crate) fn make_sample<T: Real>(r: T, y: &[T; 2], consts: &DerivedConstants<T>) -> Sample<T> {
    let one: T = T::one();
    let two: T = lit(2.0);
    let p = consts.config.p;
    let f = y[0];
    let fprime = fprime_from_flux(y[1], consts);
    let rmu1 = r.powf(consts.mu - one);
    let w = rmu1 * r * f;
    let wprime = rmu1 * (r * fprime + consts.mu * f);
    let energy = (p - one) / p * fprime.abs().powf(p) + consts.alpha / two * f * f;
    Sample {
        r,
        f,
        fprime,
        w,
        wprime,
        energy,
    }
}

pub(crate) fn origin_sample<T: Real>(a: T, consts: &DerivedConstants<T>) -> Sample<T> {
    Sample {
        r: T::zero(),
        f: a,
        fprime: T::zero(),
        w: T::zero(),
        wprime: T::zero(),
        energy: consts.alpha / lit(2.0) * a * a,
    }
}

struct RawRun<T> {
    output: dopri::IntegrationOutput<T, 2>,
    r_switch: T,
}

/// Indices of the armed events.
pub(crate) const EV_EXTINCTION: usize = 0;
pub(crate) const EV_PLATEAU: usize = 1;
pub(crate) const EV_FLIP: usize = 2;

fn run_events<T: Real>(
    a: T,
    lambda: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
    crossing: Option<PlateauCrossing>,
) -> Result<RawRun<T>, Error<T>> {
    check_shooting_value(a)?;
    settings.validate()?;
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
    let state = series_state(a, r_switch, lambda, consts);
    let y0 = [state.f, state.flux];

    let one: T = T::one();
    let mu = consts.mu;
    let threshold = (one + settings.plateau_margin) * consts.w_star;
    let g_extinction = move |_r: T, y: &[T; 2]| y[0];
    let g_plateau = move |r: T, y: &[T; 2]| y[0] * r.powf(mu) - threshold;
    let consts_flip = *consts;
    let g_flip = move |r: T, y: &[T; 2]| mu * y[0] + r * fprime_from_flux(y[1], &consts_flip);

    let mut events: Vec<Event<'_, T, 2>> = vec![Event {
        g: &g_extinction,
        direction: Direction::Down,
        terminal: true,
        fine: true,
    }];
    if let Some(policy) = crossing {
        events.push(Event {
            g: &g_plateau,
            direction: Direction::Up,
            terminal: policy == PlateauCrossing::Stop,
            fine: false,
        });
        events.push(Event {
            g: &g_flip,
            direction: Direction::Down,
            terminal: false,
            fine: false,
        });
    }

    let opts = Options {
        rel_tol: settings.rel_tol,
        abs_tol: settings.abs_tol,
        max_steps: settings.max_steps,
        h0: None,
    };
    let output = dopri::integrate(
        |r, y| rhs_unchecked(r, y, lambda, consts),
        r_switch,
        settings.r_max,
        y0,
        &opts,
        &events,
    )?;
    Ok(RawRun { output, r_switch })
}

fn build_profile<T: Real>(
    a: T,
    run: RawRun<T>,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Profile<T> {
    let out = run.output;
    let termination = match out.outcome {
        Outcome::TerminalEvent(EV_EXTINCTION) => Termination::FHitZero { r: out.end_r },
        Outcome::TerminalEvent(_) => Termination::WCrossedPlateau { r: out.end_r },
        Outcome::ReachedEnd => Termination::HorizonReached,
        Outcome::StepLimit => Termination::StepLimit { r: out.end_r },
    };
    let first_hit = |idx: usize| {
        out.events
            .iter()
            .find(|h| h.index == idx)
            .map(|h| h.r)
    };
    let r_extinction = first_hit(EV_EXTINCTION);
    let r_cross = first_hit(EV_PLATEAU);
    let r_flip = first_hit(EV_FLIP);

    let mut samples = Vec::new();
    samples.push(origin_sample(a, consts));
    for (rk, y) in grid_points(&out, run.r_switch, settings.samples_per_decade) {
        samples.push(make_sample(rk, &y, consts));
    }

    Profile {
        a,
        r_switch: run.r_switch,
        samples,
        termination,
        r_extinction,
        r_flip,
        r_cross,
        steps: out.steps,
    }
}

/// Sample radii of a finished run: a logarithmic grid from the handoff
/// radius, then the exact end point. Grid points are evaluated on the
/// stored dense-output segments.
pub(crate) fn grid_points<T: Real, const D: usize>(
    out: &dopri::IntegrationOutput<T, D>,
    r_switch: T,
    samples_per_decade: u32,
) -> Vec<(T, [T; D])> {
    let ten: T = lit(10.0);
    let spd = int::<T>(samples_per_decade as i64);
    let dedup = T::one() - lit::<T>(64.0) * T::epsilon();
    let mut points = Vec::new();
    let mut seg_idx = 0usize;
    let mut k: i64 = 0;
    while seg_idx < out.segments.len() {
        let rk = r_switch * ten.powf(int::<T>(k) / spd);
        if rk >= out.end_r * dedup {
            break;
        }
        while seg_idx < out.segments.len() && out.segments[seg_idx].r1 < rk {
            seg_idx += 1;
        }
        if seg_idx >= out.segments.len() {
            break;
        }
        points.push((rk, out.segments[seg_idx].eval(rk)));
        k += 1;
    }
    points.push((out.end_r, out.end_y));
    points
}

/// Integrates the main problem from the origin with classification
/// semantics: stops at extinction, at the plateau crossing, at the horizon,
/// or when the step budget runs out — whichever comes first.
pub fn integrate<T: Real>(
    a: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<Profile<T>, Error<T>> {
    integrate_with(a, consts, settings, PlateauCrossing::Stop)
}

/// Integrates the main problem with an explicit plateau-crossing policy.
/// With [`PlateauCrossing::Record`] the crossing radius is stored in
/// [`Profile::r_cross`] and integration continues to the horizon, which is
/// what tail diagnostics need.
pub fn integrate_with<T: Real>(
    a: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
    crossing: PlateauCrossing,
) -> Result<Profile<T>, Error<T>> {
    let run = run_events(a, T::one(), consts, settings, Some(crossing))?;
    Ok(build_profile(a, run, consts, settings))
}

/// Integrates the zero-absorption limit profile (`lambda = 0`, `f(0) = 1`).
/// It must reach zero before the horizon; errors with
/// [`Error::HorizonReached`] otherwise. Its extinction radius and final
/// slope are the reference data for small-`a` comparisons.
pub fn limit_profile<T: Real>(
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<Profile<T>, Error<T>> {
    let run = run_events(T::one(), T::zero(), consts, settings, None)?;
    let profile = build_profile(T::one(), run, consts, settings);
    match profile.termination {
        Termination::FHitZero { .. } => Ok(profile),
        _ => Err(Error::HorizonReached {
            r_max: settings.r_max,
        }),
    }
}

/// Integrates the small-`a` rescaled profile: shooting value 1 with the
/// absorption weighted by `a^((2q-p)/p)`. As `a -> 0` it converges
/// uniformly to the zero-absorption limit profile. Must reach zero before
/// the horizon; errors with [`Error::HorizonReached`] otherwise.
pub fn rescaled_profile<T: Real>(
    a: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<Profile<T>, Error<T>> {
    check_shooting_value(a)?;
    let lambda = a.powf(consts.rescale_exponent());
    let run = run_events(T::one(), lambda, consts, settings, None)?;
    let profile = build_profile(T::one(), run, consts, settings);
    match profile.termination {
        Termination::FHitZero { .. } => Ok(profile),
        _ => Err(Error::HorizonReached {
            r_max: settings.r_max,
        }),
    }
}

/// Advances a state to an exact radius with no events armed, returning the
/// accepted-step solution at `r_target` (no interpolation error). Used for
/// pointwise comparisons against reference integrators and between
/// problems.
pub fn advance<T: Real>(
    state: State<T>,
    r_target: T,
    lambda: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<State<T>, Error<T>> {
    settings.validate()?;
    if !(r_target > state.r) {
        return Err(Error::InvalidSetting {
            name: "r_target",
            detail: format!("target {r_target} must exceed the current radius {}", state.r),
        });
    }
    let opts = Options {
        rel_tol: settings.rel_tol,
        abs_tol: settings.abs_tol,
        max_steps: settings.max_steps,
        h0: None,
    };
    let out = dopri::integrate(
        |r, y| rhs_unchecked(r, y, lambda, consts),
        state.r,
        r_target,
        [state.f, state.flux],
        &opts,
        &[],
    )?;
    match out.outcome {
        Outcome::ReachedEnd => Ok(State {
            r: out.end_r,
            f: out.end_y[0],
            flux: out.end_y[1],
        }),
        Outcome::StepLimit => Err(Error::StepBudgetExhausted { r: out.end_r }),
        Outcome::TerminalEvent(_) => unreachable!("no events armed"),
    }
}
