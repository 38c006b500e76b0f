//! Tail measurements: decay-law fits, slow-orbit limit constants,
//! logarithmic-slope diagnostics, and plateau/critical-slope reports.
//!
//! Admissible tails decay like a power of `r` with one of exactly two
//! exponents: the slow rate `alpha/beta = (p-q)/(q-p+1)` (generic orbits)
//! or the fast rate `mu = p/(2-p)` (the critical orbit). All routines here
//! consume sampled profiles — they work equally on freshly integrated
//! [`crate::shooter::Profile`]s and on samples re-read from disk.

use crate::error::Error;
use crate::params::DerivedConstants;
use crate::scalar::{lit, Real};
use crate::shooter::Sample;

/// Which admissible decay law a fitted exponent is closest to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailKind {
    /// Slow decay `r^(-alpha/beta)`.
    Slow,
    /// Fast decay `r^(-mu)`.
    Fast,
}

/// Least-squares power-law fit of a profile tail.
#[derive(Debug, Clone, Copy)]
pub struct TailFit<T> {
    /// Fitted decay exponent `e` in `f ~ A r^(-e)` (positive for decay).
    pub exponent: T,
    /// Fitted amplitude `A`.
    pub amplitude: T,
    /// Radius range actually used (first and last sample in the window).
    pub window: (T, T),
    /// Maximum relative deviation of the samples from the fitted law.
    pub residual: T,
    /// Nearest admissible decay law.
    pub kind: TailKind,
}

/// Cesàro-averaged slow-orbit limit constant `k = lim r^(alpha/beta) f`.
#[derive(Debug, Clone, Copy)]
pub struct SlowLimit<T> {
    /// Mean of `r^(alpha/beta) f` over the last sampled decade.
    pub k: T,
    /// Relative spread `(max - min) / mean` over that decade.
    pub oscillation: T,
    /// Radius range averaged over.
    pub window: (T, T),
}

/// Logarithmic-slope diagnostic `Lambda(tau) = -r f'(r) / f(r)` at
/// `r = e^tau`.
#[derive(Debug, Clone)]
pub struct LambdaDiagnostic<T> {
    /// `(tau, Lambda)` at every sample with `r >= 1` and `f > 0`.
    pub tau_samples: Vec<(T, T)>,
    /// Accelerated estimate of the limit slope.
    pub limit_estimate: T,
    /// Exponential approach rate `theta` in
    /// `|Lambda - limit| ~ e^(-theta tau)` (positive when converging).
    pub rate_estimate: T,
}

/// Plateau and critical-slope measurements of a near-critical profile.
#[derive(Debug, Clone, Copy)]
pub struct CriticalReport<T> {
    /// Longest logarithmic window where `|w - w*| / w* < 0.05`.
    pub plateau: (T, T),
    /// Its width in decades.
    pub plateau_decades: T,
    /// `max |r w'| / (mu w*)` over the plateau; quasi-static motion keeps
    /// this small.
    pub max_rwprime: T,
    /// Range of `f' / (-(w*/(p(N+1)-2N))^(1/(p-1)) r^(-2/(2-p)))` over the
    /// plateau; near 1 when the critical slope law holds.
    pub slope_ratio: (T, T),
    /// `max |w - w*| / w*` over the plateau.
    pub max_w_deviation: T,
}

/// Minimum number of samples for any fit window.
pub const MIN_FIT_SAMPLES: usize = 16;
/// Minimum fit-window width in decades (with a small slack for grid snap).
const MIN_FIT_DECADES: f64 = 0.99;
/// Relative band around `w*` that counts as plateau.
const PLATEAU_BAND: f64 = 0.05;
/// Minimum tail span in decades beyond `r = 1` for slope diagnostics.
const MIN_TAIL_DECADES: f64 = 3.0;
/// Oscillation threshold for a converged slow-orbit limit constant.
const CONVERGENCE_OSCILLATION: f64 = 0.01;

fn lsq_slope<T: Real>(points: &[(T, T)]) -> (T, T) {
    // Returns (slope, intercept) of the least-squares line.
    let n = lit::<T>(points.len() as f64);
    let mut sx = T::zero();
    let mut sy = T::zero();
    for &(x, y) in points {
        sx = sx + x;
        sy = sy + y;
    }
    let mx = sx / n;
    let my = sy / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for &(x, y) in points {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `f ~ A r^(-e)` over the samples inside `window` by least squares
/// in log-log coordinates and classifies the exponent against the two
/// admissible decay laws.
pub fn fit_tail<T: Real>(
    samples: &[Sample<T>],
    window: (T, T),
    consts: &DerivedConstants<T>,
) -> Result<TailFit<T>, Error<T>> {
    let pts: Vec<&Sample<T>> = samples
        .iter()
        .filter(|s| s.r >= window.0 && s.r <= window.1 && s.r > T::zero() && s.f > T::zero())
        .collect();
    let decades = if pts.len() >= 2 {
        (pts[pts.len() - 1].r / pts[0].r).log10()
    } else {
        T::zero()
    };
    if pts.len() < MIN_FIT_SAMPLES || decades < lit(MIN_FIT_DECADES) {
        return Err(Error::WindowTooNarrow {
            decades,
            samples: pts.len(),
            min_samples: MIN_FIT_SAMPLES,
        });
    }
    let logs: Vec<(T, T)> = pts.iter().map(|s| (s.r.ln(), s.f.ln())).collect();
    let (slope, intercept) = lsq_slope(&logs);
    let exponent = -slope;
    let amplitude = intercept.exp();
    let mut residual = T::zero();
    for s in &pts {
        let model = amplitude * s.r.powf(-exponent);
        let dev = ((s.f - model) / model).abs();
        residual = residual.max(dev);
    }
    let kind = if (exponent - consts.slow_exponent).abs() <= (exponent - consts.fast_exponent).abs()
    {
        TailKind::Slow
    } else {
        TailKind::Fast
    };
    Ok(TailFit {
        exponent,
        amplitude,
        window: (pts[0].r, pts[pts.len() - 1].r),
        residual,
        kind,
    })
}

/// Estimates the slow-orbit limit constant by averaging
/// `r^(alpha/beta) f` over the last sampled decade. Errors with
/// [`Error::NotConverged`] when the spread over that decade is 1% or more.
pub fn slow_limit_k<T: Real>(
    samples: &[Sample<T>],
    consts: &DerivedConstants<T>,
) -> Result<SlowLimit<T>, Error<T>> {
    let r_end = samples
        .iter()
        .rev()
        .find(|s| s.r > T::zero() && s.f > T::zero())
        .map(|s| s.r)
        .unwrap_or_else(T::zero);
    let r_start = r_end / lit(10.0);
    let pts: Vec<&Sample<T>> = samples
        .iter()
        .filter(|s| s.r >= r_start && s.r <= r_end && s.f > T::zero())
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::WindowTooNarrow {
            decades: if pts.len() >= 2 {
                (pts[pts.len() - 1].r / pts[0].r).log10()
            } else {
                T::zero()
            },
            samples: pts.len(),
            min_samples: MIN_FIT_SAMPLES,
        });
    }
    let e = consts.slow_exponent;
    let mut sum = T::zero();
    let mut kmin = T::infinity();
    let mut kmax = T::neg_infinity();
    for s in &pts {
        let k = s.f * s.r.powf(e);
        sum = sum + k;
        kmin = kmin.min(k);
        kmax = kmax.max(k);
    }
    let mean = sum / lit(pts.len() as f64);
    let oscillation = (kmax - kmin) / mean;
    let threshold: T = lit(CONVERGENCE_OSCILLATION);
    if !(oscillation < threshold) {
        return Err(Error::NotConverged {
            oscillation,
            threshold,
        });
    }
    Ok(SlowLimit {
        k: mean,
        oscillation,
        window: (pts[0].r, pts[pts.len() - 1].r),
    })
}

/// Computes the logarithmic-slope diagnostic from stored samples: the
/// `(tau, Lambda)` trace for `r >= 1`, an Aitken-accelerated limit from
/// decade-spaced values, and the exponential approach rate from a
/// least-squares fit of `ln |Lambda - limit|` against `tau` over the last
/// three decades.
pub fn lambda_diagnostic<T: Real>(samples: &[Sample<T>]) -> Result<LambdaDiagnostic<T>, Error<T>> {
    let one: T = T::one();
    let ln10: T = lit::<T>(10.0).ln();
    let tau_samples: Vec<(T, T)> = samples
        .iter()
        .filter(|s| s.r >= one && s.f > T::zero())
        .map(|s| (s.r.ln(), -s.r * s.fprime / s.f))
        .collect();
    let min_decades: T = lit(MIN_TAIL_DECADES);
    let decades = match (tau_samples.first(), tau_samples.last()) {
        (Some(&(t0, _)), Some(&(t1, _))) => (t1 - t0) / ln10,
        _ => T::zero(),
    };
    if decades < min_decades || tau_samples.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientTail {
            decades,
            min_decades,
        });
    }

    let tau_end = tau_samples.last().expect("nonempty by the guard above").0;
    // Lambda at the nearest sample to each of the last three decade marks.
    let at_mark = |tau: T| -> T {
        let mut best = tau_samples[0];
        let mut best_d = (best.0 - tau).abs();
        for &(t, l) in &tau_samples {
            let d = (t - tau).abs();
            if d < best_d {
                best_d = d;
                best = (t, l);
            }
        }
        best.1
    };
    let x0 = at_mark(tau_end - ln10 - ln10);
    let x1 = at_mark(tau_end - ln10);
    let x2 = at_mark(tau_end);
    let d21 = x2 - x1;
    let d10 = x1 - x0;
    let denom = d21 - d10;
    let limit_estimate = if denom.abs() > T::epsilon() * (x2.abs() + one) {
        x2 - d21 * d21 / denom
    } else {
        x2
    };

    // Approach rate over the last three decades, skipping samples already
    // at the noise floor of the limit estimate.
    let noise = lit::<T>(1e3) * T::epsilon() * (limit_estimate.abs() + one);
    let fit_pts: Vec<(T, T)> = tau_samples
        .iter()
        .filter(|&&(t, l)| {
            t >= tau_end - lit::<T>(3.0) * ln10 && (l - limit_estimate).abs() > noise
        })
        .map(|&(t, l)| (t, (l - limit_estimate).abs().ln()))
        .collect();
    let rate_estimate = if fit_pts.len() >= MIN_FIT_SAMPLES {
        -lsq_slope(&fit_pts).0
    } else {
        T::zero()
    };

    Ok(LambdaDiagnostic {
        tau_samples,
        limit_estimate,
        rate_estimate,
    })
}

/// Longest logarithmic window where `|w - w*| / w* < 0.05`, or `None`.
pub fn plateau_window<T: Real>(
    samples: &[Sample<T>],
    consts: &DerivedConstants<T>,
) -> Option<(T, T)> {
    let band: T = lit(PLATEAU_BAND);
    let mut best: Option<(T, T)> = None;
    let mut run_start: Option<T> = None;
    let mut run_end = T::zero();
    let close = |start: &mut Option<T>, end: T, best: &mut Option<(T, T)>| {
        if let Some(s) = start.take() {
            let width = end / s;
            let best_width = best.map(|(a, b)| b / a).unwrap_or_else(T::one);
            if best.is_none() || width > best_width {
                *best = Some((s, end));
            }
        }
    };
    for s in samples.iter().filter(|s| s.r > T::zero()) {
        let dev = ((s.w - consts.w_star) / consts.w_star).abs();
        if dev < band {
            if run_start.is_none() {
                run_start = Some(s.r);
            }
            run_end = s.r;
        } else {
            close(&mut run_start, run_end, &mut best);
        }
    }
    close(&mut run_start, run_end, &mut best);
    best.filter(|(a, b)| b > a)
}

/// Measures plateau quality and the critical slope law on a near-critical
/// profile. Errors with [`Error::NoPlateau`] when no sample comes within
/// 5% of `w*`.
pub fn critical_asymptotics<T: Real>(
    samples: &[Sample<T>],
    consts: &DerivedConstants<T>,
) -> Result<CriticalReport<T>, Error<T>> {
    let Some(plateau) = plateau_window(samples, consts) else {
        let mut min_dev = T::infinity();
        for s in samples.iter().filter(|s| s.r > T::zero()) {
            min_dev = min_dev.min(((s.w - consts.w_star) / consts.w_star).abs());
        }
        return Err(Error::NoPlateau { min_deviation: min_dev });
    };
    let one: T = T::one();
    let mu = consts.mu;
    let slope_amp = consts.critical_slope_amplitude();
    let mut max_rwprime = T::zero();
    let mut ratio_lo = T::infinity();
    let mut ratio_hi = T::neg_infinity();
    let mut max_dev = T::zero();
    for s in samples
        .iter()
        .filter(|s| s.r >= plateau.0 && s.r <= plateau.1)
    {
        max_rwprime = max_rwprime.max((s.r * s.wprime).abs() / (mu * consts.w_star));
        let model = -slope_amp * s.r.powf(-(mu + one));
        let ratio = s.fprime / model;
        ratio_lo = ratio_lo.min(ratio);
        ratio_hi = ratio_hi.max(ratio);
        max_dev = max_dev.max(((s.w - consts.w_star) / consts.w_star).abs());
    }
    Ok(CriticalReport {
        plateau,
        plateau_decades: (plateau.1 / plateau.0).log10(),
        max_rwprime,
        slope_ratio: (ratio_lo, ratio_hi),
        max_w_deviation: max_dev,
    })
}
