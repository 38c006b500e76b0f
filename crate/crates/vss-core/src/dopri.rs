//! Embedded Dormand–Prince 5(4) integrator with dense output and event
//! localization, generic over the scalar type and the state dimension.
//!
//! The tableau is evaluated in the working scalar type (ratios of small
//! integers), so extended-precision runs are not capped by `f64`-rounded
//! coefficients. Error control is the usual mixed absolute/relative RMS
//! norm; accepted steps keep their endpoint derivatives so the trajectory
//! can be re-evaluated anywhere by cubic Hermite interpolation. Events are
//! scalar functions of `(r, y)` checked for sign changes across each
//! accepted step and localized by bisection on the interpolant down to a
//! radius resolution of `max(rel_tol * r, 4 eps r)`.

use crate::error::Error;
use crate::scalar::{lit, ratio, Real};

/// Which sign changes of an event function fire the event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Fire when the function crosses from positive to non-positive.
    Down,
    /// Fire when the function crosses from negative to non-negative.
    Up,
}

/// A scalar event function with its firing policy.
pub struct Event<'a, T, const D: usize> {
    /// Event function; the event fires on sign changes across a step.
    pub g: &'a dyn Fn(T, &[T; D]) -> T,
    /// Which crossings count.
    pub direction: Direction,
    /// Whether integration stops at the localized crossing.
    pub terminal: bool,
    /// Localize down to the radius resolution floor (4 eps r) instead of
    /// stopping at `rel_tol * r`; used for extinction radii.
    pub fine: bool,
}

/// One localized event occurrence.
#[derive(Debug, Clone, Copy)]
pub struct EventHit<T, const D: usize> {
    /// Index into the event slice passed to [`integrate`].
    pub index: usize,
    /// Localized radius of the crossing.
    pub r: T,
    /// Interpolated state at the crossing.
    pub y: [T; D],
}

/// An accepted step with endpoint derivatives, supporting cubic Hermite
/// evaluation anywhere inside it.
#[derive(Debug, Clone, Copy)]
pub struct Segment<T, const D: usize> {
    pub r0: T,
    pub r1: T,
    pub y0: [T; D],
    pub y1: [T; D],
    pub d0: [T; D],
    pub d1: [T; D],
}

impl<T: Real, const D: usize> Segment<T, D> {
    /// Cubic Hermite interpolation at `r` in `[r0, r1]`.
    pub fn eval(&self, r: T) -> [T; D] {
        let h = self.r1 - self.r0;
        let t = (r - self.r0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let one: T = T::one();
        let two: T = lit(2.0);
        let three: T = lit(3.0);
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let mut y = [T::zero(); D];
        for i in 0..D {
            y[i] = h00 * self.y0[i]
                + h10 * h * self.d0[i]
                + h01 * self.y1[i]
                + h11 * h * self.d1[i];
        }
        y
    }
}

/// How an integration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Reached `r_end`.
    ReachedEnd,
    /// A terminal event fired; its index into the event slice.
    TerminalEvent(usize),
    /// The step budget ran out first.
    StepLimit,
}

/// Tolerances and budget for one integration run.
#[derive(Debug, Clone, Copy)]
pub struct Options<T> {
    /// Relative tolerance of the local error control.
    pub rel_tol: T,
    /// Absolute tolerance; keep far below the smallest state magnitude of
    /// interest so control stays relative-dominated.
    pub abs_tol: T,
    /// Budget counting accepted plus rejected steps.
    pub max_steps: u64,
    /// Initial step; defaults to `r0 / 100`.
    pub h0: Option<T>,
}

/// Full record of one integration run.
#[derive(Debug, Clone)]
pub struct IntegrationOutput<T, const D: usize> {
    /// Accepted steps in order; contiguous from `r0` to `end_r` or beyond
    /// it when a terminal event truncated the final step.
    pub segments: Vec<Segment<T, D>>,
    /// Final radius (event radius if a terminal event fired).
    pub end_r: T,
    /// Final state.
    pub end_y: [T; D],
    /// Why integration stopped.
    pub outcome: Outcome,
    /// Every localized event occurrence, in radius order.
    pub events: Vec<EventHit<T, D>>,
    /// Accepted plus rejected step count.
    pub steps: u64,
}

struct Tableau<T> {
    a: [[T; 6]; 6],
    b5: [T; 7],
    b4: [T; 7],
    c: [T; 6],
}

fn tableau<T: Real>() -> Tableau<T> {
    let z = T::zero();
    let mut a = [[z; 6]; 6];
    a[0][0] = ratio(1, 5);
    a[1][0] = ratio(3, 40);
    a[1][1] = ratio(9, 40);
    a[2][0] = ratio(44, 45);
    a[2][1] = ratio(-56, 15);
    a[2][2] = ratio(32, 9);
    a[3][0] = ratio(19372, 6561);
    a[3][1] = ratio(-25360, 2187);
    a[3][2] = ratio(64448, 6561);
    a[3][3] = ratio(-212, 729);
    a[4][0] = ratio(9017, 3168);
    a[4][1] = ratio(-355, 33);
    a[4][2] = ratio(46732, 5247);
    a[4][3] = ratio(49, 176);
    a[4][4] = ratio(-5103, 18656);
    a[5][0] = ratio(35, 384);
    a[5][1] = z;
    a[5][2] = ratio(500, 1113);
    a[5][3] = ratio(125, 192);
    a[5][4] = ratio(-2187, 6784);
    a[5][5] = ratio(11, 84);
    let b5 = [
        ratio(35, 384),
        z,
        ratio(500, 1113),
        ratio(125, 192),
        ratio(-2187, 6784),
        ratio(11, 84),
        z,
    ];
    let b4 = [
        ratio(5179, 57600),
        z,
        ratio(7571, 16695),
        ratio(393, 640),
        ratio(-92097, 339200),
        ratio(187, 2100),
        ratio(1, 40),
    ];
    let c = [
        ratio(1, 5),
        ratio(3, 10),
        ratio(4, 5),
        ratio(8, 9),
        T::one(),
        T::one(),
    ];
    Tableau { a, b5, b4, c }
}

fn all_finite<T: Real, const D: usize>(y: &[T; D]) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `y' = rhs(r, y)` from `r0` to `r_end` (forward, `r_end > r0`).
///
/// Stops at `r_end`, at the first terminal event, or when the step budget
/// runs out — whichever comes first. Non-terminal events are recorded and
/// integration continues.
pub fn integrate<T: Real, const D: usize, F>(
    rhs: F,
    r0: T,
    r_end: T,
    y0: [T; D],
    opts: &Options<T>,
    events: &[Event<'_, T, D>],
) -> Result<IntegrationOutput<T, D>, Error<T>>
where
    F: Fn(T, &[T; D]) -> [T; D],
{
    if !(r_end > r0) || !r0.is_finite() || !r_end.is_finite() {
        return Err(Error::InvalidSetting {
            name: "r_end",
            detail: format!("integration range [{r0}, {r_end}] must be finite and increasing"),
        });
    }
    if !(opts.rel_tol > T::zero()) || !(opts.abs_tol >= T::zero()) {
        return Err(Error::InvalidSetting {
            name: "tolerances",
            detail: "rel_tol must be positive and abs_tol non-negative".to_string(),
        });
    }

    let tb = tableau::<T>();
    let one: T = T::one();
    let safety: T = lit(0.9);
    let min_scale: T = lit(0.2);
    let max_scale: T = lit(5.0);
    let fifth: T = lit(-0.2);
    let four_eps = lit::<T>(4.0) * T::epsilon();

    let mut r = r0;
    let mut y = y0;
    let mut dy = rhs(r, &y);
    if !all_finite(&dy) {
        return Err(Error::NonFiniteState { r });
    }
    let mut g_prev: Vec<T> = events.iter().map(|e| (e.g)(r, &y)).collect();

    let mut h = opts.h0.unwrap_or(r0 * lit(0.01));
    if !(h > T::zero()) {
        h = (r_end - r0) * lit(1e-6);
    }
    h = h.min(r_end - r0);

    let mut segments: Vec<Segment<T, D>> = Vec::new();
    let mut hits: Vec<EventHit<T, D>> = Vec::new();
    let mut steps: u64 = 0;

    loop {
        if r >= r_end {
            return Ok(IntegrationOutput {
                segments,
                end_r: r,
                end_y: y,
                outcome: Outcome::ReachedEnd,
                events: hits,
                steps,
            });
        }
        if steps >= opts.max_steps {
            return Ok(IntegrationOutput {
                segments,
                end_r: r,
                end_y: y,
                outcome: Outcome::StepLimit,
                events: hits,
                steps,
            });
        }
        if h < four_eps * r {
            return Err(Error::StepSizeUnderflow { r });
        }
        let mut last = false;
        if r + h >= r_end {
            h = r_end - r;
            last = true;
        }

        // Stage evaluations (k[0] is the FSAL derivative from last step).
        let mut k = [[T::zero(); D]; 7];
        k[0] = dy;
        for s in 1..7 {
            let mut ys = y;
            for i in 0..D {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc = acc + tb.a[s - 1][j] * kj[i];
                }
                ys[i] = ys[i] + h * acc;
            }
            let rs = r + tb.c[s - 1] * h;
            k[s] = rhs(rs, &ys);
            if !all_finite(&k[s]) {
                return Err(Error::NonFiniteState { r: rs });
            }
        }

        let mut y5 = y;
        let mut err_sq = T::zero();
        for i in 0..D {
            let mut acc5 = T::zero();
            let mut acc4 = T::zero();
            for s in 0..7 {
                acc5 = acc5 + tb.b5[s] * k[s][i];
                acc4 = acc4 + tb.b4[s] * k[s][i];
            }
            y5[i] = y[i] + h * acc5;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            let e = h * (acc5 - acc4) / scale;
            err_sq = err_sq + e * e;
        }
        let err = (err_sq / lit(D as f64)).sqrt();
        steps += 1;

        if !y5.iter().all(|v| v.is_finite()) || !err.is_finite() {
            return Err(Error::NonFiniteState { r });
        }

        if err > one {
            // Reject and shrink.
            let scale = (safety * err.powf(fifth)).max(min_scale);
            h = h * scale;
            continue;
        }

        // Accept. k[6] = rhs(r + h, y5) is the FSAL derivative.
        let r_new = r + h;
        let seg = Segment {
            r0: r,
            r1: r_new,
            y0: y,
            y1: y5,
            d0: k[0],
            d1: k[6],
        };

        // Event detection over the accepted step.
        let mut fired: Vec<EventHit<T, D>> = Vec::new();
        let mut terminal_hit: Option<EventHit<T, D>> = None;
        for (idx, ev) in events.iter().enumerate() {
            let g0 = g_prev[idx];
            let g1 = (ev.g)(r_new, &y5);
            let crossed = match ev.direction {
                Direction::Down => g0 > T::zero() && g1 <= T::zero(),
                Direction::Up => g0 < T::zero() && g1 >= T::zero(),
            };
            if !crossed {
                continue;
            }
            // Bisection on the interpolant to the radius resolution.
            let mut lo = r;
            let mut hi = r_new;
            let tol_r = if ev.fine {
                four_eps * hi.abs()
            } else {
                (opts.rel_tol * hi.abs()).max(four_eps * hi.abs())
            };
            while hi - lo > tol_r {
                let mid = (lo + hi) * lit(0.5);
                let gm = (ev.g)(mid, &seg.eval(mid));
                let before = match ev.direction {
                    Direction::Down => gm > T::zero(),
                    Direction::Up => gm < T::zero(),
                };
                if before {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let hit = EventHit {
                index: idx,
                r: hi,
                y: seg.eval(hi),
            };
            if ev.terminal {
                match &terminal_hit {
                    Some(t) if t.r <= hit.r => {}
                    _ => terminal_hit = Some(hit),
                }
            } else {
                fired.push(hit);
            }
        }

        segments.push(seg);

        if let Some(term) = terminal_hit {
            // Keep recording events that occurred before the stop; the
            // slack covers localization tolerance of near-coincident hits.
            let slack = term.r * (one + opts.rel_tol + four_eps);
            fired.retain(|f| f.r <= slack);
            fired.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap_or(core::cmp::Ordering::Equal));
            hits.extend(fired);
            hits.push(term);
            return Ok(IntegrationOutput {
                segments,
                end_r: term.r,
                end_y: term.y,
                outcome: Outcome::TerminalEvent(term.index),
                events: hits,
                steps,
            });
        }
        fired.sort_by(|a, b| a.r.partial_cmp(&b.r).unwrap_or(core::cmp::Ordering::Equal));
        hits.extend(fired);

        // Advance with FSAL reuse.
        r = r_new;
        y = y5;
        dy = k[6];
        for (idx, ev) in events.iter().enumerate() {
            g_prev[idx] = (ev.g)(r, &y);
        }

        if last && r >= r_end {
            return Ok(IntegrationOutput {
                segments,
                end_r: r,
                end_y: y,
                outcome: Outcome::ReachedEnd,
                events: hits,
                steps,
            });
        }

        let scale = if err == T::zero() {
            max_scale
        } else {
            (safety * err.powf(fifth)).min(max_scale).max(min_scale)
        };
        h = h * scale;
    }
}
