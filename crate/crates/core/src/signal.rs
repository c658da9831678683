//! Uniformly sampled baseband waveforms.
//!
//! [`IqSignal`] carries complex envelopes (the RF drive `x`, the desired
//! output `u`, the produced output `y` and their captured copies).
//! [`ControlSignal`] carries the real varactor control voltage.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower varactor control voltage bound in volts.
pub const DEFAULT_V_MIN: f64 = 6.0;
/// Upper varactor control voltage bound in volts.
pub const DEFAULT_V_MAX: f64 = 27.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IqSignal {
    pub samples: Vec<Complex64>,
    pub sample_rate: f64,
    pub label: String,
}

impl IqSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, label: impl Into<String>) -> Result<Self> {
        check_rate(sample_rate)?;
        Ok(Self {
            samples,
            sample_rate,
            label: label.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Same sample rate and label, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Self {
        Self {
            samples,
            sample_rate: self.sample_rate,
            label: self.label.clone(),
        }
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm()).collect()
    }

    pub(crate) fn check_compatible(&self, other: &IqSignal) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        check_same_rate(self.sample_rate, other.sample_rate)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSignal {
    pub samples: Vec<f64>,
    pub sample_rate: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl ControlSignal {
    /// Builds a control signal, clamping every sample into `[v_min, v_max]`.
    pub fn new(samples: Vec<f64>, sample_rate: f64, v_min: f64, v_max: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if !(v_min.is_finite() && v_max.is_finite() && v_min <= v_max) {
            return Err(Error::InvalidArgument(format!(
                "control bounds [{v_min}, {v_max}] V are not an interval"
            )));
        }
        let samples = samples.into_iter().map(|v| v.clamp(v_min, v_max)).collect();
        Ok(Self {
            samples,
            sample_rate,
            v_min,
            v_max,
        })
    }

    pub fn with_default_bounds(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        Self::new(samples, sample_rate, DEFAULT_V_MIN, DEFAULT_V_MAX)
    }

    /// Constant control voltage of `len` samples.
    pub fn constant(value: f64, len: usize, sample_rate: f64) -> Result<Self> {
        Self::with_default_bounds(vec![value; len], sample_rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Zero-Q complex embedding, used for spectral measurements.
    pub fn to_iq(&self, label: &str) -> IqSignal {
        IqSignal {
            samples: self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate: self.sample_rate,
            label: label.to_string(),
        }
    }
}

fn check_rate(sample_rate: f64) -> Result<()> {
    if sample_rate.is_finite() && sample_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "sample rate must be positive, got {sample_rate}"
        )))
    }
}

pub(crate) fn check_same_rate(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() <= 1e-9 * a.abs().max(b.abs()) {
        Ok(())
    } else {
        Err(Error::SampleRateMismatch { left: a, right: b })
    }
}

/// Mean of `|s|²` over the signal.
pub fn average_power(sig: &IqSignal) -> Result<f64> {
    if sig.is_empty() {
        return Err(Error::EmptySignal);
    }
    Ok(sig.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / sig.len() as f64)
}

/// Peak-to-average power ratio in dB.
pub fn peak_to_average_ratio(sig: &IqSignal) -> Result<f64> {
    let avg = average_power(sig)?;
    if avg <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let peak = sig.samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max);
    Ok(10.0 * (peak / avg).log10())
}

/// Rescales the signal so its average power equals `target`.
pub fn scale_to_average_power(sig: &IqSignal, target: f64) -> Result<IqSignal> {
    if !(target.is_finite() && target > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "target power must be positive, got {target}"
        )));
    }
    let avg = average_power(sig)?;
    if avg <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let gain = (target / avg).sqrt();
    Ok(sig.with_samples(sig.samples.iter().map(|s| s * gain).collect()))
}

/// Power in watts of a voltage envelope of magnitude `v` across `z_ref` ohms.
pub fn envelope_power(v: f64, z_ref: f64) -> f64 {
    v * v / (2.0 * z_ref)
}
