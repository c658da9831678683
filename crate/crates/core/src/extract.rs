//! Efficiency-optimal control-law extraction.
//!
//! 1. Tabulate PAE over the characterized `(|x|, V_c)` grid.
//! 2. Split the output-power range into logarithmic bins and keep the
//!    highest-PAE cell of each bin (the ridge).
//! 3. Fit polynomial laws mapping the desired output magnitude `|u|` to the
//!    drive magnitude, the control voltage and the insertion phase.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{fit_polynomial, Polynomial};
use crate::signal::{IqSignal, DEFAULT_V_MAX, DEFAULT_V_MIN};
use crate::surface::QuasiStaticSurface;

/// Headroom granted above the strongest ridge point, in dB.
pub const LAW_HEADROOM_DB: f64 = 0.5;

/// Number of monotonicity retries (each drops the amplitude order by 2).
const MONOTONE_RETRIES: usize = 2;

/// Largest amplitude-law residual tolerated, relative to the largest drive.
const MAX_AMP_RESIDUAL: f64 = 0.05;

/// Samples below this fraction of the peak `|u|` are ignored when fitting
/// a phase predistorter; their phase is dominated by noise.
const PHASE_FIT_MIN_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaeGrid {
    pub x_grid: Vec<f64>,
    pub vc_grid: Vec<f64>,
    pub pae: Vec<Vec<f64>>,
    pub p_out: Vec<Vec<f64>>,
    pub p_in: Vec<Vec<f64>>,
    pub p_dc: Vec<Vec<f64>>,
}

impl PaeGrid {
    pub fn max_pae(&self) -> f64 {
        self.pae.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of 1 dB drive steps spanned by the non-zero part of the grid.
    pub fn default_bins(&self) -> usize {
        let lo = self.x_grid.iter().cloned().find(|&x| x > 0.0);
        match lo {
            Some(lo) => {
                let hi = *self.x_grid.last().unwrap();
                (20.0 * (hi / lo).log10()).round().max(4.0) as usize
            }
            None => 4,
        }
    }
}

pub fn compute_pae_grid(surface: &QuasiStaticSurface) -> Result<PaeGrid> {
    let nx = surface.x_grid.len();
    let nv = surface.vc_grid.len();
    let mut pae = vec![vec![0.0; nv]; nx];
    let mut p_out = vec![vec![0.0; nv]; nx];
    for i in 0..nx {
        for j in 0..nv {
            let dc = surface.p_dc[i][j];
            if !(dc > 0.0) {
                return Err(Error::InvalidSurface(format!(
                    "DC power {dc} W at x={} V, vc={} V",
                    surface.x_grid[i], surface.vc_grid[j]
                )));
            }
            let po = surface.output_power(surface.y_mag[i][j]);
            let pi = surface.p_in[i][j];
            p_out[i][j] = po;
            pae[i][j] = if po == 0.0 && pi == 0.0 { 0.0 } else { (po - pi) / dc };
            if pae[i][j] >= 1.0 {
                return Err(Error::InvalidSurface(format!(
                    "PAE {} ≥ 1 at x={} V, vc={} V",
                    pae[i][j], surface.x_grid[i], surface.vc_grid[j]
                )));
            }
        }
    }
    Ok(PaeGrid {
        x_grid: surface.x_grid.clone(),
        vc_grid: surface.vc_grid.clone(),
        pae,
        p_out,
        p_in: surface.p_in.clone(),
        p_dc: surface.p_dc.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub p_out: f64,
    pub x_mag: f64,
    pub vc: f64,
    pub pae: f64,
    /// Grid cell the point was taken from.
    pub cell: (usize, usize),
}

/// Maximum-PAE operating points, ordered by strictly increasing output power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ridge {
    pub points: Vec<RidgePoint>,
}

/// Logarithmic output-power bin edges spanning the non-zero outputs; the
/// last edge is nudged up so the strongest cell is included.
pub fn ridge_bin_edges(grid: &PaeGrid, n_bins: usize) -> Option<Vec<f64>> {
    let positive = grid.p_out.iter().flatten().cloned().filter(|&p| p > 0.0);
    let (lo, hi) = positive.fold((f64::INFINITY, 0.0f64), |(lo, hi), p| (lo.min(p), hi.max(p)));
    if !(hi > 0.0) {
        return None;
    }
    let (llo, lhi) = (lo.log10(), hi.log10());
    let mut edges: Vec<f64> = (0..=n_bins)
        .map(|k| 10f64.powf(llo + (lhi - llo) * k as f64 / n_bins as f64))
        .collect();
    edges[0] = lo;
    edges[n_bins] = hi * (1.0 + 1e-12);
    Some(edges)
}

/// Per-bin grid search. Within a bin the highest PAE wins; ties go to the
/// lower control voltage, then the lower drive.
pub fn extract_max_pae_ridge(grid: &PaeGrid, n_bins: usize) -> Result<Ridge> {
    if n_bins < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 ridge bins, got {n_bins}")));
    }
    let edges = ridge_bin_edges(grid, n_bins).ok_or(Error::ZeroPower)?;
    let mut best: Vec<Option<(usize, usize)>> = vec![None; n_bins];
    for (i, row) in grid.p_out.iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            if !(p > 0.0) {
                continue;
            }
            let b = edges.partition_point(|&e| e <= p).saturating_sub(1).min(n_bins - 1);
            let better = match best[b] {
                None => true,
                Some((bi, bj)) => {
                    let (cur, new) = (grid.pae[bi][bj], grid.pae[i][j]);
                    new > cur || (new == cur && (j < bj || (j == bj && i < bi)))
                }
            };
            if better {
                best[b] = Some((i, j));
            }
        }
    }
    let empty = best.iter().filter(|b| b.is_none()).count();
    if empty > 0 {
        warn!("{empty} of {n_bins} ridge bins hold no grid cell and were skipped");
    }
    let points: Vec<RidgePoint> = best
        .into_iter()
        .flatten()
        .map(|(i, j)| RidgePoint {
            p_out: grid.p_out[i][j],
            x_mag: grid.x_grid[i],
            vc: grid.vc_grid[j],
            pae: grid.pae[i][j],
            cell: (i, j),
        })
        .collect();
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            have: points.len(),
        });
    }
    Ok(Ridge { points })
}

impl Ridge {
    /// Output magnitude (volts) of each point into `z_ref`.
    pub fn u_mag(&self, z_ref: f64) -> Vec<f64> {
        self.points.iter().map(|p| (2.0 * z_ref * p.p_out).sqrt()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LawOrders {
    pub amp: usize,
    pub vc: usize,
    pub phase: usize,
}

impl Default for LawOrders {
    fn default() -> Self {
        Self { amp: 7, vc: 5, phase: 7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum PhaseSource {
    /// Insertion phase read from the characterization surface.
    #[default]
    Static,
    /// Phase fitted from a first modulated run of the transmitter.
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawMeta {
    /// Orders actually used (the amplitude order may have been reduced).
    pub orders: LawOrders,
    /// Output magnitude of the strongest ridge point; the law is
    /// extrapolated linearly from here up to `u_max`.
    pub u_ridge_max: f64,
    pub ridge_points: usize,
    pub phase_source: PhaseSource,
    #[serde(default)]
    pub surface: String,
}

/// Polynomial inverse laws `|u| ↦ (|x|, V_c, φ_pd)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlLaw {
    pub amp: Polynomial,
    pub vc: Polynomial,
    pub phase: Polynomial,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub meta: LawMeta,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawPoint {
    pub x_mag: f64,
    pub vc: f64,
    pub phase: f64,
    /// `|u|` exceeded `u_max` and was clamped.
    pub saturated: bool,
}

impl ControlLaw {
    /// Evaluates a polynomial with linear continuation past the last ridge point.
    fn eval_extended(&self, p: &Polynomial, u: f64) -> f64 {
        let knee = self.meta.u_ridge_max;
        if u <= knee {
            p.eval(u)
        } else {
            p.eval(knee) + p.derivative(knee) * (u - knee)
        }
    }

    pub fn evaluate(&self, u_mag: f64) -> LawPoint {
        let saturated = u_mag > self.u_max;
        let u = u_mag.clamp(0.0, self.u_max);
        LawPoint {
            x_mag: self.eval_extended(&self.amp, u).max(0.0),
            vc: self.eval_extended(&self.vc, u).clamp(self.v_min, self.v_max),
            phase: self.eval_extended(&self.phase, u),
            saturated,
        }
    }

    /// Same law with a different phase predistorter.
    pub fn with_phase(&self, phase: Polynomial, source: PhaseSource) -> Self {
        let mut law = self.clone();
        law.meta.orders.phase = phase.degree();
        law.phase = phase;
        law.meta.phase_source = source;
        law
    }

    /// First `|u|` on a dense grid over `[0, u_max]` where the amplitude law decreases.
    pub fn first_amp_decrease(&self) -> Option<f64> {
        first_decrease(|u| self.eval_extended(&self.amp, u), self.u_max)
    }
}

pub fn evaluate_control_law(law: &ControlLaw, u_mag: f64) -> LawPoint {
    law.evaluate(u_mag)
}

const DENSE_POINTS: usize = 512;

fn first_decrease(f: impl Fn(f64) -> f64, u_max: f64) -> Option<f64> {
    let mut prev = f(0.0);
    for k in 1..=DENSE_POINTS {
        let u = u_max * k as f64 / DENSE_POINTS as f64;
        let v = f(u);
        if v < prev - 1e-12 * prev.abs().max(1.0) {
            return Some(u);
        }
        prev = v;
    }
    None
}

/// Fits the control laws along `ridge`.
///
/// The control-voltage law is fitted to the ridge directly. The amplitude
/// law is then fitted to the drive that reproduces each `|u|` at the
/// *fitted* control voltage (the surface is inverted along that path), so
/// the laws stay mutually consistent where the ridge zig-zags between grid
/// columns. The static phase law is the surface insertion phase along the
/// same path.
pub fn fit_control_law(ridge: &Ridge, surface: &QuasiStaticSurface, orders: LawOrders) -> Result<ControlLaw> {
    let needed = orders.amp.max(orders.vc).max(orders.phase) + 2;
    if ridge.points.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            have: ridge.points.len(),
        });
    }
    let (g_lo, g_hi) = surface.vc_range();
    let v_min = DEFAULT_V_MIN.max(g_lo);
    let v_max = DEFAULT_V_MAX.min(g_hi);
    let u_ridge = ridge.u_mag(surface.z_ref);
    let vc_ridge: Vec<f64> = ridge.points.iter().map(|p| p.vc).collect();
    let vc_law = fit_polynomial(&u_ridge, &vc_ridge, orders.vc, false)?;
    let u_top = *u_ridge.last().unwrap();

    // Path through the surface followed by the law.
    let n_path = (4 * ridge.points.len()).max(64);
    let mut u_path = Vec::with_capacity(n_path + 1);
    let mut x_path = Vec::with_capacity(n_path + 1);
    let mut phase_path = Vec::with_capacity(n_path + 1);
    for k in 0..=n_path {
        let u = u_top * k as f64 / n_path as f64;
        let vc = vc_law.eval(u).clamp(v_min, v_max);
        let x = surface.drive_for_output(vc, u).ok_or_else(|| {
            Error::Fit(format!("output {u:.4} V unreachable at the fitted control voltage {vc:.2} V"))
        })?;
        u_path.push(u);
        x_path.push(x);
        phase_path.push(surface.evaluate(x, vc)?.phase);
    }

    let phase_law = fit_polynomial(&u_path, &phase_path, orders.phase, false)?;
    let mut amp_order = orders.amp;
    let mut retries = 0;
    loop {
        // Fitting the gain x/|u| weights every level by its relative error,
        // which is what the output NMSE sees at deep back-off.
        let gain: Vec<f64> = u_path[1..].iter().zip(&x_path[1..]).map(|(u, x)| x / u).collect();
        let g = fit_polynomial(&u_path[1..], &gain, amp_order - 1, false)?;
        let amp = Polynomial::new(std::iter::once(0.0).chain(g.coeffs).collect());
        let x_top = x_path.iter().cloned().fold(0.0, f64::max);
        let worst = u_path
            .iter()
            .zip(&x_path)
            .map(|(&u, &x)| (amp.eval(u) - x).abs())
            .fold(0.0, f64::max);
        if worst > MAX_AMP_RESIDUAL * x_top {
            return Err(Error::Fit(format!(
                "amplitude law residual {worst:.4e} V exceeds {:.1}% of the peak drive {x_top:.4} V",
                100.0 * MAX_AMP_RESIDUAL
            )));
        }
        let law = ControlLaw {
            amp,
            vc: vc_law.clone(),
            phase: phase_law.clone(),
            u_max: u_top * 10f64.powf(LAW_HEADROOM_DB / 20.0),
            v_min,
            v_max,
            meta: LawMeta {
                orders: LawOrders {
                    amp: amp_order,
                    vc: orders.vc,
                    phase: orders.phase,
                },
                u_ridge_max: u_top,
                ridge_points: ridge.points.len(),
                phase_source: PhaseSource::Static,
                surface: surface.label.clone(),
            },
        };
        match law.first_amp_decrease() {
            None => return Ok(law),
            Some(u) if retries < MONOTONE_RETRIES && amp_order > 2 => {
                warn!("amplitude law of order {amp_order} decreases at |u| = {u:.4} V; refitting");
                amp_order -= 2;
                retries += 1;
            }
            Some(u) => {
                return Err(Error::Fit(format!(
                    "amplitude law still decreases at |u| = {u:.4} V after {retries} order reductions"
                )))
            }
        }
    }
}

/// Least-squares fit of the phase difference `∠y − ∠u` against `|u|`.
///
/// Differences are unwrapped about their circular mean. Samples weaker than
/// 5% of the peak `|u|` are ignored. A residual spread above π/2 means the
/// phase is not a function of `|u|` alone.
pub fn extract_phase_predistorter(u: &IqSignal, y_measured: &IqSignal, order: usize) -> Result<Polynomial> {
    u.check_compatible(y_measured)?;
    let peak = u.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroPower);
    }
    let level = PHASE_FIT_MIN_LEVEL * peak;
    let pairs: Vec<(f64, Complex64)> = u
        .samples
        .iter()
        .zip(&y_measured.samples)
        .filter(|(a, b)| a.norm() >= level && b.norm() > 0.0)
        .map(|(a, b)| (a.norm(), b * a.conj()))
        .collect();
    let centre = pairs.iter().map(|(_, z)| z / z.norm()).sum::<Complex64>().arg();
    let (mags, dphi): (Vec<f64>, Vec<f64>) = pairs
        .iter()
        .map(|(m, z)| (*m, centre + wrap(z.arg() - centre)))
        .unzip();
    let poly = fit_polynomial(&mags, &dphi, order, false)?;
    let (lo, hi) = mags
        .iter()
        .zip(&dphi)
        .map(|(&m, &d)| d - poly.eval(m))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r), hi.max(r)));
    let spread = hi - lo;
    if spread > std::f64::consts::FRAC_PI_2 {
        return Err(Error::NonQuasiStaticPhase { spread });
    }
    Ok(poly)
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let w = a - two_pi * (a / two_pi).round();
    if w <= -std::f64::consts::PI {
        w + two_pi
    } else {
        w
    }
}

/// Spread (max − min) of `∠y − ∠u` over samples above 5% of the peak `|u|`,
/// unwrapped about the circular mean.
pub fn phase_spread(u: &IqSignal, y: &IqSignal) -> Result<f64> {
    u.check_compatible(y)?;
    let peak = u.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return Err(Error::ZeroPower);
    }
    let level = PHASE_FIT_MIN_LEVEL * peak;
    let diffs: Vec<Complex64> = u
        .samples
        .iter()
        .zip(&y.samples)
        .filter(|(a, b)| a.norm() >= level && b.norm() > 0.0)
        .map(|(a, b)| b * a.conj())
        .collect();
    let centre = diffs.iter().map(|z| z / z.norm()).sum::<Complex64>().arg();
    let (lo, hi) = diffs
        .iter()
        .map(|z| wrap(z.arg() - centre))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), d| (lo.min(d), hi.max(d)));
    Ok(hi - lo)
}
