//! Measurement-chain emulation: additive capture noise and coherent averaging.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::signal::{average_power, IqSignal};

/// Sample-wise mean of equally sized captures.
pub fn coherent_average(captures: &[IqSignal]) -> Result<IqSignal> {
    let first = captures
        .first()
        .ok_or_else(|| Error::InvalidArgument("no captures to average".into()))?;
    if first.is_empty() {
        return Err(Error::EmptySignal);
    }
    for c in &captures[1..] {
        first.check_compatible(c)?;
    }
    let scale = 1.0 / captures.len() as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); first.len()];
    for c in captures {
        for (a, s) in acc.iter_mut().zip(&c.samples) {
            *a += s;
        }
    }
    for a in &mut acc {
        *a *= scale;
    }
    Ok(first.with_samples(acc))
}

/// Circular complex white Gaussian noise of the given total power.
pub fn white_noise<R: Rng + ?Sized>(len: usize, power: f64, rng: &mut R) -> Vec<Complex64> {
    let sigma = (power / 2.0).sqrt();
    (0..len)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

/// Total noise power for a white floor `floor_dbc` below the average
/// in-channel power spectral density of `sig`, whose power occupies
/// `channel_bw` Hz.
pub fn floor_noise_power(sig: &IqSignal, floor_dbc: f64, channel_bw: f64) -> Result<f64> {
    if !(channel_bw > 0.0 && channel_bw <= sig.sample_rate) {
        return Err(Error::InvalidArgument(format!(
            "channel bandwidth {channel_bw} Hz outside (0, {}] Hz",
            sig.sample_rate
        )));
    }
    let p = average_power(sig)?;
    Ok(p * (sig.sample_rate / channel_bw) * 10f64.powf(floor_dbc / 10.0))
}

/// Adds one capture's worth of white noise at `floor_dbc` (see
/// [`floor_noise_power`]).
pub fn add_noise_floor<R: Rng + ?Sized>(
    sig: &IqSignal,
    floor_dbc: f64,
    channel_bw: f64,
    rng: &mut R,
) -> Result<IqSignal> {
    let power = floor_noise_power(sig, floor_dbc, channel_bw)?;
    let noise = white_noise(sig.len(), power, rng);
    Ok(sig.with_samples(sig.samples.iter().zip(noise).map(|(s, n)| s + n).collect()))
}

/// Emulates `n_averages` noisy captures of `sig` followed by coherent
/// averaging, as done on the oscilloscope to extend its dynamic range.
pub fn averaged_capture<R: Rng + ?Sized>(
    sig: &IqSignal,
    floor_dbc: f64,
    channel_bw: f64,
    n_averages: usize,
    rng: &mut R,
) -> Result<IqSignal> {
    if n_averages == 0 {
        return Err(Error::InvalidArgument("n_averages must be at least 1".into()));
    }
    let captures = (0..n_averages)
        .map(|_| add_noise_floor(sig, floor_dbc, channel_bw, rng))
        .collect::<Result<Vec<_>>>()?;
    coherent_average(&captures)
}
