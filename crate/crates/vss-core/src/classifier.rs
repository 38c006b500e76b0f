//! Orbit classification and the shooting bisection.
//!
//! Profiles fall into two open classes separated by the critical shooting
//! value `a*`:
//!
//! * type A — `f` reaches zero at a finite radius (extinction); on the way
//!   `w = r^mu f` rises, turns exactly once, and stays below `w*`;
//! * type C — `w` crosses `(1 + margin) w*` and keeps growing.
//!
//! Orbits that show neither event before the horizon are reported as
//! undetermined together with `(w, w')` at the horizon, which tells which
//! side of the plateau they sit on. Classification over a grid, geometric
//! seeding of an A/C bracket, and bisection down to a requested relative
//! width are built from that primitive.

use crate::error::Error;
use crate::params::DerivedConstants;
use crate::scalar::{int, lit, Real};
use crate::shooter::{self, IntegratorSettings, Profile, Termination};

/// Orbit class of one shooting value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClassLabel<T> {
    /// Extinction at `r_extinction`, with the single sign change of `w'`
    /// at `r_flip < r_extinction`.
    A { r_extinction: T, r_flip: T },
    /// `w` crossed `(1 + margin) w*` at `r_cross`.
    C { r_cross: T },
    /// Neither event before the horizon.
    Undetermined { w_at_horizon: T, wprime_at_horizon: T },
}

impl<T> ClassLabel<T> {
    pub fn is_a(&self) -> bool {
        matches!(self, ClassLabel::A { .. })
    }
    pub fn is_c(&self) -> bool {
        matches!(self, ClassLabel::C { .. })
    }
    pub fn is_undetermined(&self) -> bool {
        matches!(self, ClassLabel::Undetermined { .. })
    }
}

/// Result of bisecting the critical shooting value.
#[derive(Debug, Clone)]
pub struct Bracket<T> {
    /// Largest value known to be type A.
    pub a_lo: T,
    /// Smallest value known to be type C.
    pub a_hi: T,
    /// Number of midpoint classifications performed.
    pub iterations: u32,
    /// Profile integrated at the final midpoint `(a_lo + a_hi) / 2`.
    pub midpoint_profile: Profile<T>,
}

fn label_of<T: Real>(profile: &Profile<T>) -> Result<ClassLabel<T>, Error<T>> {
    match profile.termination {
        Termination::FHitZero { r } => {
            let r_flip = profile
                .r_flip
                .expect("extinction profiles record the slope flip before reaching zero");
            Ok(ClassLabel::A {
                r_extinction: r,
                r_flip,
            })
        }
        Termination::WCrossedPlateau { r } => Ok(ClassLabel::C { r_cross: r }),
        Termination::HorizonReached => {
            let last = profile.last();
            Ok(ClassLabel::Undetermined {
                w_at_horizon: last.w,
                wprime_at_horizon: last.wprime,
            })
        }
        Termination::StepLimit { r } => Err(Error::StepBudgetExhausted { r }),
    }
}

/// Classifies one shooting value by integrating with classification
/// semantics.
pub fn classify<T: Real>(
    a: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<ClassLabel<T>, Error<T>> {
    let profile = shooter::integrate(a, consts, settings)?;
    label_of(&profile)
}

/// Finds a geometric starting bracket: sweeps `a = 2^k` upward until the
/// first type-C value and `a = 2^-k` downward until the first type-A value.
///
/// The upward sweep is capped by [`DerivedConstants::seed_cap`], above
/// which every value provably crosses the plateau; running past the cap
/// (or running the downward sweep into the subnormal range) errors with
/// [`Error::SweepExhausted`].
pub fn seed_bracket<T: Real>(
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<(T, T), Error<T>> {
    let two: T = lit(2.0);
    let cap = consts.seed_cap();
    let at_one = classify(T::one(), consts, settings)?;

    let mut a = T::one();
    let mut label = at_one;
    let a_hi = loop {
        if label.is_c() {
            break a;
        }
        if a > cap * two {
            return Err(Error::SweepExhausted {
                last_value: a,
                cap,
            });
        }
        a = a * two;
        label = classify(a, consts, settings)?;
    };

    let floor = T::min_positive_value() * lit(1e4);
    let mut a = T::one();
    let mut label = at_one;
    let a_lo = loop {
        if label.is_a() {
            break a;
        }
        if a < floor {
            return Err(Error::SweepExhausted {
                last_value: a,
                cap: floor,
            });
        }
        a = a / two;
        label = classify(a, consts, settings)?;
    };
    Ok((a_lo, a_hi))
}

/// Resolution floor of the bisection: the bracket cannot shrink below this
/// many machine epsilons relative to its endpoints.
pub const RESOLUTION_FLOOR_EPS: f64 = 32.0;

/// Bisects `[a_lo, a_hi]` (which must classify A and C respectively) until
/// `(a_hi - a_lo) / a_lo <= target_width`.
///
/// Midpoints that classify as undetermined are retried once with the
/// horizon widened fourfold; if still undetermined, the side is decided by
/// comparing `w` at the horizon against `w*` (below means the A side: the
/// orbit still sits under the plateau).
pub fn bisect<T: Real>(
    a_lo: T,
    a_hi: T,
    target_width: T,
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
) -> Result<Bracket<T>, Error<T>> {
    if !(a_lo > T::zero()) || !(a_hi > a_lo) {
        return Err(Error::InvalidBracket {
            a_lo,
            a_hi,
            reason: "need 0 < a_lo < a_hi".to_string(),
        });
    }
    if !(target_width > T::zero()) {
        return Err(Error::InvalidSetting {
            name: "target_width",
            detail: format!("must be positive, got {target_width}"),
        });
    }
    if !classify(a_lo, consts, settings)?.is_a() {
        return Err(Error::InvalidBracket {
            a_lo,
            a_hi,
            reason: "lower endpoint does not classify as type A".to_string(),
        });
    }
    if !classify(a_hi, consts, settings)?.is_c() {
        return Err(Error::InvalidBracket {
            a_lo,
            a_hi,
            reason: "upper endpoint does not classify as type C".to_string(),
        });
    }

    let half: T = lit(0.5);
    let floor = lit::<T>(RESOLUTION_FLOOR_EPS) * T::epsilon();
    let mut lo = a_lo;
    let mut hi = a_hi;
    let mut iterations: u32 = 0;
    while (hi - lo) / lo > target_width {
        if hi - lo <= floor * hi {
            return Err(Error::ResolutionFloor { a_lo: lo, a_hi: hi });
        }
        let mid = (lo + hi) * half;
        let mut label = classify(mid, consts, settings)?;
        iterations += 1;
        if label.is_undetermined() {
            let mut wide = *settings;
            wide.r_max = settings.r_max * lit(4.0);
            label = classify(mid, consts, &wide)?;
        }
        match label {
            ClassLabel::A { .. } => lo = mid,
            ClassLabel::C { .. } => hi = mid,
            ClassLabel::Undetermined { w_at_horizon, .. } => {
                if w_at_horizon < consts.w_star {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
    }
    let midpoint_profile = shooter::integrate((lo + hi) * half, consts, settings)?;
    Ok(Bracket {
        a_lo: lo,
        a_hi: hi,
        iterations,
        midpoint_profile,
    })
}

/// Classifies every value of an ordered grid, preserving input order and
/// capturing per-item errors instead of aborting the sweep.
///
/// `jobs > 1` distributes items over that many threads; results are
/// bit-identical to the serial sweep because each item's computation is
/// independent of scheduling.
pub fn sweep<T: Real>(
    a_values: &[T],
    consts: &DerivedConstants<T>,
    settings: &IntegratorSettings<T>,
    jobs: usize,
) -> Vec<(T, Result<ClassLabel<T>, Error<T>>)> {
    let jobs = jobs.max(1).min(a_values.len().max(1));
    if jobs <= 1 {
        return a_values
            .iter()
            .map(|&a| (a, classify(a, consts, settings)))
            .collect();
    }

    let next = core::sync::atomic::AtomicUsize::new(0);
    let results: Vec<std::sync::Mutex<Option<(T, Result<ClassLabel<T>, Error<T>>)>>> =
        a_values.iter().map(|_| std::sync::Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, core::sync::atomic::Ordering::Relaxed);
                if i >= a_values.len() {
                    break;
                }
                let a = a_values[i];
                let out = (a, classify(a, consts, settings));
                *results[i].lock().expect("sweep result slot poisoned") = Some(out);
            });
        }
    });
    results
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("sweep result slot poisoned")
                .expect("every sweep slot is filled before join")
        })
        .collect()
}

/// Builds a logarithmic grid of `count` shooting values spanning
/// `[lo, hi]`, endpoints included.
pub fn log_grid<T: Real>(lo: T, hi: T, count: usize) -> Vec<T> {
    assert!(count >= 2, "grids need at least two points");
    let l0 = lo.ln();
    let l1 = hi.ln();
    let n1 = int::<T>((count - 1) as i64);
    (0..count)
        .map(|i| (l0 + (l1 - l0) * int::<T>(i as i64) / n1).exp())
        .collect()
}
