//! Sub-sample delay emulation and time alignment.
//!
//! Delays use a 64-tap windowed-sinc interpolator with a 4-term
//! Blackman-Harris window. Signals are expected to be oversampled at least
//! 4x relative to their occupied bandwidth; the first and last
//! [`EDGE_GUARD`] samples carry interpolation transients.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::signal::{check_same_rate, ControlSignal, IqSignal};

pub const FRACTIONAL_DELAY_TAPS: usize = 64;

/// Samples at either end excluded from downstream metrics after a delay.
pub const EDGE_GUARD: usize = 64;

/// Normalized correlation below which no alignment is reported.
pub const MIN_CORRELATION: f64 = 0.5;

const BH: [f64; 4] = [0.35875, 0.48829, 0.14128, 0.01168];

fn blackman_harris(t: f64, span: f64) -> f64 {
    if t.abs() >= span / 2.0 {
        return 0.0;
    }
    let x = 2.0 * PI * t / span;
    BH[0] + BH[1] * x.cos() + BH[2] * (2.0 * x).cos() + BH[3] * (3.0 * x).cos()
}

fn sinc(t: f64) -> f64 {
    if t == 0.0 {
        1.0
    } else {
        (PI * t).sin() / (PI * t)
    }
}

/// Taps `h[k]` for output `y[n] = Σ h[k]·s[n - first - k]`.
fn kernel(delay: f64) -> (i64, Vec<f64>) {
    let half = (FRACTIONAL_DELAY_TAPS / 2) as i64;
    let base = delay.floor() as i64;
    let first = base - half + 1;
    let span = FRACTIONAL_DELAY_TAPS as f64;
    let taps = (0..FRACTIONAL_DELAY_TAPS as i64)
        .map(|k| {
            let t = (first + k) as f64 - delay;
            sinc(t) * blackman_harris(t, span)
        })
        .collect();
    (first, taps)
}

fn check_delay(delay: f64, len: usize) -> Result<()> {
    let limit = len as f64 / 4.0;
    if !delay.is_finite() || delay.abs() >= limit {
        return Err(Error::DelayOutOfRange { delay, limit });
    }
    Ok(())
}

fn delay_samples<T>(samples: &[T], delay: f64) -> Vec<T>
where
    T: Copy + Add<Output = T> + Mul<f64, Output = T>,
{
    if delay == 0.0 {
        return samples.to_vec();
    }
    let (first, taps) = kernel(delay);
    let last = samples.len() as i64 - 1;
    (0..samples.len() as i64)
        .map(|n| {
            let mut acc = samples[0] * 0.0;
            for (k, &h) in taps.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                // edge samples are held
                let idx = (n - first - k as i64).clamp(0, last) as usize;
                acc = acc + samples[idx] * h;
            }
            acc
        })
        .collect()
}

/// Delays `sig` by `delay` samples (positive = later) using band-limited
/// interpolation. Integer delays reduce to exact shifts.
pub fn apply_fractional_delay(sig: &IqSignal, delay: f64) -> Result<IqSignal> {
    if sig.is_empty() {
        return Err(Error::EmptySignal);
    }
    check_delay(delay, sig.len())?;
    Ok(sig.with_samples(delay_samples(&sig.samples, delay)))
}

/// Real-valued counterpart of [`apply_fractional_delay`] for control voltages.
/// The result is clamped back into the signal's voltage bounds.
pub fn delay_control(sig: &ControlSignal, delay: f64) -> Result<ControlSignal> {
    if sig.is_empty() {
        return Err(Error::EmptySignal);
    }
    check_delay(delay, sig.len())?;
    ControlSignal::new(
        delay_samples(&sig.samples, delay),
        sig.sample_rate,
        sig.v_min,
        sig.v_max,
    )
}

/// Estimates how many samples `measured` lags `reference`.
///
/// Cross-correlates the mean-removed magnitude envelopes over lags up to a
/// quarter of the record and refines the peak with a 3-point parabola.
/// Envelope correlation is insensitive to constant phase offsets.
pub fn estimate_delay(reference: &IqSignal, measured: &IqSignal) -> Result<f64> {
    if reference.is_empty() || measured.is_empty() {
        return Err(Error::EmptySignal);
    }
    check_same_rate(reference.sample_rate, measured.sample_rate)?;
    let n = reference.len().max(measured.len());
    let r = centered_envelope(reference);
    let m = centered_envelope(measured);

    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut rf = padded(&r, size);
    let mut mf = padded(&m, size);
    fwd.process(&mut rf);
    fwd.process(&mut mf);
    let mut cross: Vec<Complex64> = mf.iter().zip(&rf).map(|(a, b)| a * b.conj()).collect();
    inv.process(&mut cross);

    let norm = (r.iter().map(|v| v * v).sum::<f64>() * m.iter().map(|v| v * v).sum::<f64>()).sqrt()
        * size as f64;
    if norm <= 0.0 {
        return Err(Error::NoAlignment { peak: 0.0 });
    }
    let max_lag = (n / 4) as i64;
    let corr = |lag: i64| -> f64 {
        let idx = lag.rem_euclid(size as i64) as usize;
        cross[idx].re / norm
    };
    let (best, peak) = (-max_lag..=max_lag)
        .map(|lag| (lag, corr(lag)))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if peak < MIN_CORRELATION {
        return Err(Error::NoAlignment { peak });
    }
    let (c_m, c_0, c_p) = (corr(best - 1), peak, corr(best + 1));
    let denom = c_m - 2.0 * c_0 + c_p;
    let frac = if denom < 0.0 {
        (0.5 * (c_m - c_p) / denom).clamp(-0.5, 0.5)
    } else {
        0.0
    };
    Ok(best as f64 + frac)
}

fn centered_envelope(sig: &IqSignal) -> Vec<f64> {
    let env = sig.magnitudes();
    let mean = env.iter().sum::<f64>() / env.len() as f64;
    env.into_iter().map(|v| v - mean).collect()
}

fn padded(v: &[f64], size: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); size];
    for (o, &x) in out.iter_mut().zip(v) {
        o.re = x;
    }
    out
}
