//! Efficiency, linearity and spectral metrics.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{envelope_power, ControlSignal, IqSignal};

/// Lowest NMSE reported, in dB.
pub const NMSE_FLOOR_DB: f64 = -150.0;

pub fn pae(p_out: f64, p_in: f64, p_dc: f64) -> Result<f64> {
    check_dc(p_dc)?;
    Ok((p_out - p_in) / p_dc)
}

pub fn drain_efficiency(p_out: f64, p_dc: f64) -> Result<f64> {
    check_dc(p_dc)?;
    Ok(p_out / p_dc)
}

fn check_dc(p_dc: f64) -> Result<()> {
    if p_dc > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("DC power must be positive, got {p_dc}")))
    }
}

/// Histogram of instantaneous output power. Each bin is represented by
/// the mean power of the samples that fall in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPdf {
    pub power: Vec<f64>,
    pub prob: Vec<f64>,
}

impl PowerPdf {
    pub fn new(power: Vec<f64>, prob: Vec<f64>) -> Result<Self> {
        if power.len() != prob.len() || power.is_empty() {
            return Err(Error::InvalidArgument("pdf needs matching, non-empty tables".into()));
        }
        if prob.iter().any(|&p| !(p >= 0.0)) {
            return Err(Error::InvalidArgument("pdf probabilities must be non-negative".into()));
        }
        let total: f64 = prob.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("pdf sums to {total}, not 1")));
        }
        Ok(Self { power, prob })
    }

    /// Single-power distribution.
    pub fn point_mass(power: f64) -> Self {
        Self {
            power: vec![power],
            prob: vec![1.0],
        }
    }

    /// Power histogram of envelope `sig` (volts) into `z_ref` over `n_bins`
    /// equal-width bins from zero to the peak.
    pub fn from_envelope(sig: &IqSignal, z_ref: f64, n_bins: usize) -> Result<Self> {
        if sig.is_empty() {
            return Err(Error::EmptySignal);
        }
        let n_bins = n_bins.max(1);
        let powers: Vec<f64> = sig.samples.iter().map(|s| envelope_power(s.norm(), z_ref)).collect();
        let peak = powers.iter().cloned().fold(0.0, f64::max);
        if peak <= 0.0 {
            return Ok(Self::point_mass(0.0));
        }
        let mut sum = vec![0.0; n_bins];
        let mut count = vec![0usize; n_bins];
        for &p in &powers {
            let b = ((p / peak) * n_bins as f64).floor() as usize;
            let b = b.min(n_bins - 1);
            sum[b] += p;
            count[b] += 1;
        }
        let n = powers.len() as f64;
        let (power, prob) = sum
            .iter()
            .zip(&count)
            .filter(|(_, &c)| c > 0)
            .map(|(&s, &c)| (s / c as f64, c as f64 / n))
            .unzip();
        Ok(Self { power, prob })
    }

    pub fn mean_power(&self) -> f64 {
        self.power.iter().zip(&self.prob).map(|(p, w)| p * w).sum()
    }
}

/// Energy-weighted average efficiency over a power distribution:
/// `Σ pdf(P)·P / Σ pdf(P)·P/η(P)`, with `η` interpolated linearly on
/// `(p_out, efficiency)` points sorted by power.
///
/// Zero-power mass contributes to neither sum. Pdf mass outside the curve is
/// an error; no extrapolation is done.
pub fn pdf_averaged_efficiency(curve: &[(f64, f64)], pdf: &PowerPdf) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::InsufficientPoints { needed: 1, have: 0 });
    }
    let xs: Vec<f64> = curve.iter().map(|c| c.0).collect();
    let eta: Vec<f64> = curve.iter().map(|c| c.1).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for (&p, &w) in pdf.power.iter().zip(&pdf.prob) {
        if w == 0.0 || p == 0.0 {
            continue;
        }
        let e = interp_checked(&xs, &eta, p)?;
        if e <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "efficiency curve is not positive at {p} W"
            )));
        }
        num += w * p;
        den += w * p / e;
    }
    if den == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(num / den)
}

/// Output, input and DC power of an operating trajectory, sorted by output power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    pub p_out: Vec<f64>,
    pub p_in: Vec<f64>,
    pub p_dc: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragedEfficiency {
    pub pae: f64,
    pub drain: f64,
    pub p_out_avg: f64,
    pub p_in_avg: f64,
    pub p_dc_avg: f64,
}

impl PowerCurve {
    pub fn new(p_out: Vec<f64>, p_in: Vec<f64>, p_dc: Vec<f64>) -> Result<Self> {
        if p_out.len() != p_in.len() || p_out.len() != p_dc.len() || p_out.len() < 2 {
            return Err(Error::InvalidArgument("power curve needs ≥ 2 matching points".into()));
        }
        if p_out.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("power curve must be sorted by output power".into()));
        }
        if p_dc.iter().any(|&p| p <= 0.0) {
            return Err(Error::InvalidArgument("power curve DC power must be positive".into()));
        }
        Ok(Self { p_out, p_in, p_dc })
    }

    pub fn max_output(&self) -> f64 {
        *self.p_out.last().unwrap()
    }

    pub fn pae_at(&self, p: f64) -> Result<f64> {
        let pin = interp_checked(&self.p_out, &self.p_in, p)?;
        let pdc = interp_checked(&self.p_out, &self.p_dc, p)?;
        pae(p, pin, pdc)
    }

    /// `(p_out, drain efficiency)` pairs for [`pdf_averaged_efficiency`].
    pub fn drain_curve(&self) -> Vec<(f64, f64)> {
        self.p_out
            .iter()
            .zip(&self.p_dc)
            .map(|(&p, &dc)| (p, p / dc))
            .collect()
    }

    /// Average PAE and drain efficiency as mean powers over mean DC power.
    pub fn average_over(&self, pdf: &PowerPdf) -> Result<AveragedEfficiency> {
        let (mut pout, mut pin, mut pdc) = (0.0, 0.0, 0.0);
        for (&p, &w) in pdf.power.iter().zip(&pdf.prob) {
            if w == 0.0 {
                continue;
            }
            pout += w * p;
            pin += w * interp_checked(&self.p_out, &self.p_in, p)?;
            pdc += w * interp_checked(&self.p_out, &self.p_dc, p)?;
        }
        Ok(AveragedEfficiency {
            pae: pae(pout, pin, pdc)?,
            drain: drain_efficiency(pout, pdc)?,
            p_out_avg: pout,
            p_in_avg: pin,
            p_dc_avg: pdc,
        })
    }
}

fn interp_checked(xs: &[f64], ys: &[f64], x: f64) -> Result<f64> {
    let (lo, hi) = (xs[0], xs[xs.len() - 1]);
    let tol = 1e-9 * hi.abs().max(1e-300);
    if x < lo - tol || x > hi + tol {
        return Err(Error::PdfOutsideCurve { power: x, lo, hi });
    }
    if xs.len() == 1 || x <= lo {
        return Ok(ys[0]);
    }
    if x >= hi {
        return Ok(ys[ys.len() - 1]);
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    Ok(ys[k - 1] + t * (ys[k] - ys[k - 1]))
}

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub nfft: usize,
    pub overlap: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            nfft: 2048,
            overlap: 1024,
        }
    }
}

/// Two-sided power spectral density, ascending frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub freq_hz: Vec<f64>,
    /// Power per hertz; `Σ psd·bin_width` equals the average power.
    pub psd: Vec<f64>,
    pub bin_width: f64,
}

impl Spectrum {
    pub fn total_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() * self.bin_width
    }

    /// Power of bins whose centre lies in `[lo, hi)`.
    pub fn band_power(&self, lo: f64, hi: f64) -> f64 {
        self.freq_hz
            .iter()
            .zip(&self.psd)
            .filter(|(&f, _)| f >= lo && f < hi)
            .map(|(_, &p)| p)
            .sum::<f64>()
            * self.bin_width
    }

    /// PSD in dB relative to the strongest bin.
    pub fn psd_db_relative(&self) -> Vec<f64> {
        let peak = self.psd.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
        self.psd
            .iter()
            .map(|&p| 10.0 * (p.max(peak * 1e-30) / peak).log10())
            .collect()
    }
}

/// Welch-averaged periodogram with a periodic Hann window.
pub fn power_spectrum(sig: &IqSignal, cfg: SpectrumConfig) -> Result<Spectrum> {
    let nfft = cfg.nfft;
    if nfft < 8 || cfg.overlap >= nfft {
        return Err(Error::InvalidArgument(format!(
            "invalid spectrum settings nfft={nfft}, overlap={}",
            cfg.overlap
        )));
    }
    if sig.len() < 2 * nfft {
        return Err(Error::TooShort {
            len: sig.len(),
            needed: 2 * nfft,
        });
    }
    let window: Vec<f64> = (0..nfft)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / nfft as f64).cos())
        .collect();
    let win_energy: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(nfft);
    let step = nfft - cfg.overlap;
    let mut acc = vec![0.0; nfft];
    let mut segments = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let mut start = 0;
    while start + nfft <= sig.len() {
        for ((b, s), w) in buf.iter_mut().zip(&sig.samples[start..start + nfft]).zip(&window) {
            *b = s * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let fs = sig.sample_rate;
    let scale = 1.0 / (segments as f64 * win_energy * fs);
    let bin_width = fs / nfft as f64;
    let half = nfft / 2;
    let (freq_hz, psd) = (0..nfft)
        .map(|k| {
            let idx = (k + half) % nfft;
            let f = (k as f64 - half as f64) * bin_width;
            (f, acc[idx] * scale)
        })
        .unzip();
    Ok(Spectrum {
        freq_hz,
        psd,
        bin_width,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Acpr {
    pub lower_db: f64,
    pub upper_db: f64,
}

impl Acpr {
    /// The figure reported for a measurement: the worse adjacent channel.
    pub fn worst(&self) -> f64 {
        self.lower_db.min(self.upper_db)
    }
}

/// Main-channel power over each adjacent channel's power, in dB.
pub fn acpr(sig: &IqSignal, channel_bw: f64, offset: f64, cfg: SpectrumConfig) -> Result<Acpr> {
    if !(channel_bw > 0.0 && offset > 0.0) {
        return Err(Error::InvalidArgument("channel bandwidth and offset must be positive".into()));
    }
    let nyquist = sig.sample_rate / 2.0;
    let edge = offset + channel_bw;
    if edge > nyquist {
        return Err(Error::BeyondNyquist { edge, nyquist });
    }
    let spec = power_spectrum(sig, cfg)?;
    acpr_from_spectrum(&spec, channel_bw, offset)
}

pub fn acpr_from_spectrum(spec: &Spectrum, channel_bw: f64, offset: f64) -> Result<Acpr> {
    let h = channel_bw / 2.0;
    let main = spec.band_power(-h, h);
    let lower = spec.band_power(-offset - h, -offset + h);
    let upper = spec.band_power(offset - h, offset + h);
    if main <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let db = |adj: f64| 10.0 * (main / adj.max(main * 1e-30)).log10();
    Ok(Acpr {
        lower_db: db(lower),
        upper_db: db(upper),
    })
}

/// Normalized mean-square error of `measured` against `reference` after the
/// complex scalar that minimizes `Σ|y − α·u|² / Σ|α·u|²`.
pub fn nmse(reference: &IqSignal, measured: &IqSignal) -> Result<f64> {
    reference.check_compatible(measured)?;
    let (mut uu, mut yy) = (0.0, 0.0);
    let mut uy = Complex64::new(0.0, 0.0);
    for (u, y) in reference.samples.iter().zip(&measured.samples) {
        uu += u.norm_sqr();
        yy += y.norm_sqr();
        uy += u.conj() * y;
    }
    if uu == 0.0 {
        return Err(Error::ZeroPower);
    }
    if yy == 0.0 {
        return Ok(0.0);
    }
    // the minimizing scalar has the phase of <u, y> and magnitude |y|²/|<u, y>|
    let ratio = (1.0 - uy.norm_sqr() / (uu * yy)).max(0.0);
    Ok((10.0 * ratio.log10()).max(NMSE_FLOOR_DB))
}

/// Width of the smallest band, symmetric about the spectral centroid, that
/// holds `fraction` of the power.
pub fn occupied_bandwidth(sig: &IqSignal, fraction: f64, cfg: SpectrumConfig) -> Result<f64> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("power fraction {fraction} not in (0, 1]")));
    }
    let spec = power_spectrum(sig, cfg)?;
    let total: f64 = spec.psd.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let centroid = spec.freq_hz.iter().zip(&spec.psd).map(|(f, p)| f * p).sum::<f64>() / total;
    let mut order: Vec<usize> = (0..spec.psd.len()).collect();
    order.sort_by(|&a, &b| {
        (spec.freq_hz[a] - centroid)
            .abs()
            .total_cmp(&(spec.freq_hz[b] - centroid).abs())
    });
    let mut acc = 0.0;
    let mut reach = 0.0;
    for k in order {
        acc += spec.psd[k];
        reach = (spec.freq_hz[k] - centroid).abs();
        if acc >= fraction * total * (1.0 - 1e-12) {
            break;
        }
    }
    Ok(2.0 * reach + spec.bin_width)
}

/// Occupied bandwidth of a control voltage, with the static bias removed.
pub fn control_occupied_bandwidth(vc: &ControlSignal, fraction: f64, cfg: SpectrumConfig) -> Result<f64> {
    if vc.is_empty() {
        return Err(Error::EmptySignal);
    }
    let mean = vc.samples.iter().sum::<f64>() / vc.len() as f64;
    let ac = IqSignal::new(
        vc.samples.iter().map(|&v| Complex64::new(v - mean, 0.0)).collect(),
        vc.sample_rate,
        "vc-ac",
    )?;
    occupied_bandwidth(&ac, fraction, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainBin {
    pub u_mag: f64,
    pub gain_norm: f64,
    pub spread: f64,
    pub count: usize,
}

/// `|y|/|u|` binned on `|u|`, normalized to the highest occupied bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainCurve {
    pub bins: Vec<GainBin>,
}

impl GainCurve {
    /// Largest `|g − 1|` over the most populated bins that together hold at
    /// least 99% of the samples.
    pub fn flatness(&self) -> f64 {
        let total: usize = self.bins.iter().map(|b| b.count).sum();
        let mut order: Vec<&GainBin> = self.bins.iter().collect();
        order.sort_by(|a, b| b.count.cmp(&a.count));
        let mut covered = 0usize;
        let mut worst: f64 = 0.0;
        for b in order {
            if covered as f64 >= 0.99 * total as f64 {
                break;
            }
            covered += b.count;
            worst = worst.max((b.gain_norm - 1.0).abs());
        }
        worst
    }
}

pub fn normalized_gain_curve(u: &IqSignal, y: &IqSignal, n_bins: usize) -> Result<GainCurve> {
    u.check_compatible(y)?;
    if u.is_empty() {
        return Err(Error::EmptySignal);
    }
    let n_bins = n_bins.max(1);
    let peak = u.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroPower);
    }
    let mut sum_u = vec![0.0; n_bins];
    let mut sum_g = vec![0.0; n_bins];
    let mut sum_g2 = vec![0.0; n_bins];
    let mut count = vec![0usize; n_bins];
    for (a, b) in u.samples.iter().zip(&y.samples) {
        let m = a.norm();
        if m == 0.0 {
            continue;
        }
        let k = ((m / peak * n_bins as f64) as usize).min(n_bins - 1);
        let g = b.norm() / m;
        sum_u[k] += m;
        sum_g[k] += g;
        sum_g2[k] += g * g;
        count[k] += 1;
    }
    let raw: Vec<GainBin> = (0..n_bins)
        .filter(|&k| count[k] > 0)
        .map(|k| {
            let c = count[k] as f64;
            let mean = sum_g[k] / c;
            GainBin {
                u_mag: sum_u[k] / c,
                gain_norm: mean,
                spread: (sum_g2[k] / c - mean * mean).max(0.0).sqrt(),
                count: count[k],
            }
        })
        .collect();
    let top = raw.last().map(|b| b.gain_norm).unwrap_or(1.0);
    if top == 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(GainCurve {
        bins: raw
            .into_iter()
            .map(|b| GainBin {
                gain_norm: b.gain_norm / top,
                spread: b.spread / top,
                ..b
            })
            .collect(),
    })
}

/// Measured floor in dBc: mean PSD well outside the channel (from three
/// channel widths out to 90% of Nyquist) relative to the mean in-channel PSD.
pub fn measure_noise_floor(sig: &IqSignal, channel_bw: f64, cfg: SpectrumConfig) -> Result<f64> {
    let spec = power_spectrum(sig, cfg)?;
    let nyq = sig.sample_rate / 2.0;
    let lo = 3.0 * channel_bw;
    let hi = 0.9 * nyq;
    if lo >= hi {
        return Err(Error::BeyondNyquist { edge: lo, nyquist: nyq });
    }
    let mean_where = |pred: &dyn Fn(f64) -> bool| {
        let (s, n) = spec
            .freq_hz
            .iter()
            .zip(&spec.psd)
            .filter(|(&f, _)| pred(f))
            .fold((0.0, 0usize), |(s, n), (_, &p)| (s + p, n + 1));
        s / n.max(1) as f64
    };
    let inband = mean_where(&|f| f.abs() < channel_bw / 2.0);
    let outband = mean_where(&|f| f.abs() >= lo && f.abs() <= hi);
    if inband <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (outband.max(inband * 1e-30) / inband).log10())
}

/// Per-architecture summary of a modulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub pae_avg: f64,
    pub drain_eff_avg: f64,
    pub p_out_avg: f64,
    pub p_in_avg: f64,
    pub p_dc_avg: f64,
    pub acpr_low_db: f64,
    pub acpr_high_db: f64,
    pub nmse_db: f64,
    pub saturation_fraction: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(samples: Vec<Complex64>, fs: f64) -> IqSignal {
        IqSignal::new(samples, fs, "t").unwrap()
    }

    #[test]
    fn efficiency_arithmetic() {
        assert_eq!(pae(1.0, 1.0, 3.0).unwrap(), 0.0);
        assert!((pae(6.0, 0.1, 10.0).unwrap() - 0.59).abs() < 1e-15);
        assert!(pae(1.0, 2.0, 4.0).unwrap() < 0.0);
        assert_eq!(drain_efficiency(0.0, 10.0).unwrap(), 0.0);
        assert!((drain_efficiency(3.1, 10.0).unwrap() - 0.31).abs() < 1e-15);
        assert!(pae(1.0, 0.0, 0.0).is_err());
        assert!(drain_efficiency(1.0, -1.0).is_err());
    }

    #[test]
    fn pdf_average_simple_cases() {
        let flat = [(0.0, 0.35), (10.0, 0.35)];
        let pdf = PowerPdf::new(vec![1.0, 4.0, 9.0], vec![0.2, 0.5, 0.3]).unwrap();
        assert!((pdf_averaged_efficiency(&flat, &pdf).unwrap() - 0.35).abs() < 1e-15);
        let two = PowerPdf::new(vec![2.0, 2.0], vec![0.5, 0.5]).unwrap();
        assert!((pdf_averaged_efficiency(&[(0.0, 0.2), (5.0, 0.2)], &two).unwrap() - 0.2).abs() < 1e-15);
        let outside = PowerPdf::point_mass(11.0);
        assert!(matches!(
            pdf_averaged_efficiency(&flat, &outside),
            Err(Error::PdfOutsideCurve { .. })
        ));
        assert!(PowerPdf::new(vec![1.0], vec![0.9]).is_err());
    }

    #[test]
    fn tone_spectrum_peaks_at_its_frequency() {
        let fs = 1000.0;
        let f0 = 125.0;
        let s = sig(
            (0..8192).map(|n| Complex64::from_polar(1.0, 2.0 * PI * f0 * n as f64 / fs)).collect(),
            fs,
        );
        let spec = power_spectrum(&s, SpectrumConfig { nfft: 256, overlap: 128 }).unwrap();
        let k = spec
            .psd
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert!((spec.freq_hz[k] - f0).abs() < 1e-9);
        assert!((spec.total_power() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn spectrum_too_short() {
        let s = sig(vec![Complex64::new(1.0, 0.0); 100], 1.0);
        assert!(matches!(
            power_spectrum(&s, SpectrumConfig { nfft: 64, overlap: 32 }),
            Err(Error::TooShort { .. })
        ));
    }

    #[test]
    fn acpr_checks_nyquist() {
        let s = sig(vec![Complex64::new(1.0, 0.0); 8192], 16.0);
        assert!(matches!(
            acpr(&s, 3.0, 5.5, SpectrumConfig::default()),
            Err(Error::BeyondNyquist { .. })
        ));
    }

    #[test]
    fn nmse_scalar_invariance() {
        let u = sig((0..64).map(|n| Complex64::new((n as f64).sin(), (0.3 * n as f64).cos())).collect(), 1.0);
        assert!(nmse(&u, &u).unwrap() <= -120.0);
        let rotated = u.with_samples(u.samples.iter().map(|s| s * Complex64::new(0.0, 2.0)).collect());
        assert!(nmse(&u, &rotated).unwrap() <= -120.0);
        let zero = u.with_samples(vec![Complex64::new(0.0, 0.0); 64]);
        assert!(matches!(nmse(&zero, &u), Err(Error::ZeroPower)));
    }

    #[test]
    fn gain_curve_of_scaled_copy_is_flat() {
        let u = sig((1..=500).map(|n| Complex64::from_polar(n as f64 / 500.0, n as f64)).collect(), 1.0);
        let y = u.with_samples(u.samples.iter().map(|s| s * 3.0).collect());
        let g = normalized_gain_curve(&u, &y, 10).unwrap();
        assert_eq!(g.bins.len(), 10);
        assert!(g.bins.iter().all(|b| (b.gain_norm - 1.0).abs() < 1e-12));
        assert!(g.flatness() < 1e-12);
    }

    #[test]
    fn occupied_bandwidth_of_a_sinusoid() {
        let fs = 1024.0;
        let f0 = 100.0;
        let vc = ControlSignal::new(
            (0..16384).map(|n| 10.0 + 2.0 * (2.0 * PI * f0 * n as f64 / fs).sin()).collect(),
            fs,
            0.0,
            30.0,
        )
        .unwrap();
        let cfg = SpectrumConfig { nfft: 1024, overlap: 512 };
        let bw = control_occupied_bandwidth(&vc, 0.95, cfg).unwrap();
        // Hann main lobe spreads each line over one neighbouring bin per side
        let bin = fs / 1024.0;
        assert!((bw - 2.0 * f0).abs() <= 4.0 * bin, "{bw}");
    }
}
