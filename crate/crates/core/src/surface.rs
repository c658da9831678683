//! Tabulated quasi-static dual-input model of a PA with a varactor matching
//! network: `(|x|, V_c) -> (|y|, insertion phase, P_dc, P_in)`.
//!
//! The output of the transmitter is `y = f_A(|x|, V_c)·exp(j(∠x − f_φ(|x|, V_c)))`,
//! applied sample by sample with no memory.

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{check_same_rate, envelope_power, ControlSignal, IqSignal};

/// Drive may exceed the characterized grid by this factor (linear extrapolation).
pub const DRIVE_EXTRAPOLATION: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiStaticSurface {
    pub x_grid: Vec<f64>,
    pub vc_grid: Vec<f64>,
    /// `y_mag[i][j]` at `(x_grid[i], vc_grid[j])`, volts.
    pub y_mag: Vec<Vec<f64>>,
    /// Insertion phase, radians.
    pub phase: Vec<Vec<f64>>,
    pub p_dc: Vec<Vec<f64>>,
    pub p_in: Vec<Vec<f64>>,
    pub z_ref: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub y_mag: f64,
    pub phase: f64,
    pub p_dc: f64,
    pub p_in: f64,
}

/// Averages accumulated while simulating a waveform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmitterPowers {
    pub p_dc_avg: f64,
    pub p_in_avg: f64,
    pub p_out_avg: f64,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub y: IqSignal,
    pub powers: TransmitterPowers,
}

impl QuasiStaticSurface {
    /// Validates and builds a surface. A missing zero-drive row is added
    /// with zero output and input power, holding phase and DC power of the
    /// lowest measured drive.
    pub fn new(
        x_grid: Vec<f64>,
        vc_grid: Vec<f64>,
        y_mag: Vec<Vec<f64>>,
        phase: Vec<Vec<f64>>,
        p_dc: Vec<Vec<f64>>,
        p_in: Vec<Vec<f64>>,
        z_ref: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut s = Self {
            x_grid,
            vc_grid,
            y_mag,
            phase,
            p_dc,
            p_in,
            z_ref,
            label: label.into(),
        };
        s.validate_shape()?;
        if s.x_grid[0] > 0.0 {
            s.x_grid.insert(0, 0.0);
            let nv = s.vc_grid.len();
            s.y_mag.insert(0, vec![0.0; nv]);
            s.p_in.insert(0, vec![0.0; nv]);
            let ph = s.phase[0].clone();
            s.phase.insert(0, ph);
            let dc = s.p_dc[0].clone();
            s.p_dc.insert(0, dc);
        }
        s.validate_values()?;
        if let Some((i, j)) = s.first_non_monotone() {
            warn!(
                "surface '{}': |y| decreases with drive at x={} V, vc={} V",
                s.label, s.x_grid[i], s.vc_grid[j]
            );
        }
        Ok(s)
    }

    fn validate_shape(&self) -> Result<()> {
        let (nx, nv) = (self.x_grid.len(), self.vc_grid.len());
        if nx < 2 || nv < 2 {
            return Err(Error::InvalidSurface(format!(
                "grid must be at least 2x2, got {nx}x{nv}"
            )));
        }
        for (name, g) in [("x_grid", &self.x_grid), ("vc_grid", &self.vc_grid)] {
            if g.iter().any(|v| !v.is_finite()) || g.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidSurface(format!("{name} must be strictly ascending")));
            }
        }
        if self.x_grid[0] < 0.0 {
            return Err(Error::InvalidSurface("drive grid must be non-negative".into()));
        }
        for (name, m) in self.matrices() {
            if m.len() != nx || m.iter().any(|r| r.len() != nv) {
                return Err(Error::InvalidSurface(format!("{name} must be {nx}x{nv}")));
            }
        }
        if !(self.z_ref.is_finite() && self.z_ref > 0.0) {
            return Err(Error::InvalidSurface("reference impedance must be positive".into()));
        }
        Ok(())
    }

    fn validate_values(&self) -> Result<()> {
        for (name, m) in self.matrices() {
            if m.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSurface(format!("{name} contains non-finite values")));
            }
        }
        if self.y_mag.iter().flatten().any(|&v| v < 0.0) {
            return Err(Error::InvalidSurface("negative output magnitude".into()));
        }
        if self.p_dc.iter().flatten().any(|&v| v <= 0.0) {
            return Err(Error::InvalidSurface("DC power must be positive everywhere".into()));
        }
        if self.p_in.iter().flatten().any(|&v| v < 0.0) {
            return Err(Error::InvalidSurface("negative input power".into()));
        }
        if self.x_grid[0] == 0.0 && self.y_mag[0].iter().any(|&v| v != 0.0) {
            return Err(Error::InvalidSurface("output must vanish at zero drive".into()));
        }
        Ok(())
    }

    fn matrices(&self) -> [(&'static str, &Vec<Vec<f64>>); 4] {
        [
            ("y_mag", &self.y_mag),
            ("phase", &self.phase),
            ("p_dc", &self.p_dc),
            ("p_in", &self.p_in),
        ]
    }

    /// First `(i, j)` where `|y|` drops when the drive steps up to `x_grid[i]`.
    pub fn first_non_monotone(&self) -> Option<(usize, usize)> {
        (1..self.x_grid.len()).find_map(|i| {
            (0..self.vc_grid.len())
                .find(|&j| self.y_mag[i][j] < self.y_mag[i - 1][j])
                .map(|j| (i, j))
        })
    }

    pub fn x_max(&self) -> f64 {
        *self.x_grid.last().unwrap()
    }

    pub fn vc_range(&self) -> (f64, f64) {
        (self.vc_grid[0], *self.vc_grid.last().unwrap())
    }

    pub fn output_power(&self, y_mag: f64) -> f64 {
        envelope_power(y_mag, self.z_ref)
    }

    /// Bilinear evaluation. `V_c` is clamped to the grid; drive may exceed
    /// the grid by 10% with linear extrapolation of the last cell.
    pub fn evaluate(&self, x_mag: f64, vc: f64) -> Result<SurfacePoint> {
        let limit = self.x_max() * DRIVE_EXTRAPOLATION;
        if !(x_mag >= 0.0 && x_mag <= limit) {
            return Err(Error::DriveOutOfRange { x_mag, limit });
        }
        let (i, a) = locate(&self.x_grid, x_mag, true);
        let (j, b) = locate(&self.vc_grid, vc, false);
        let interp = |m: &Vec<Vec<f64>>| {
            let lo = m[i][j] * (1.0 - b) + m[i][j + 1] * b;
            let hi = m[i + 1][j] * (1.0 - b) + m[i + 1][j + 1] * b;
            lo + a * (hi - lo)
        };
        Ok(SurfacePoint {
            y_mag: interp(&self.y_mag).max(0.0),
            phase: interp(&self.phase),
            p_dc: interp(&self.p_dc),
            p_in: interp(&self.p_in).max(0.0),
        })
    }

    /// AM/AM at fixed `vc` sampled on the drive grid (`vc` clamped).
    pub fn column(&self, vc: f64) -> Vec<f64> {
        let (j, b) = locate(&self.vc_grid, vc, false);
        self.y_mag
            .iter()
            .map(|r| r[j] * (1.0 - b) + r[j + 1] * b)
            .collect()
    }

    /// Largest output reachable at fixed `vc` within the characterized drive
    /// range, and the drive that reaches it (the compression point).
    pub fn compression_point(&self, vc: f64) -> (f64, f64) {
        let col = self.column(vc);
        let (k, &y) = col
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        (self.x_grid[k], y)
    }

    /// Smallest drive producing `y_target` at fixed `vc`, searching up to the
    /// compression point. `None` when the target exceeds it.
    pub fn drive_for_output(&self, vc: f64, y_target: f64) -> Option<f64> {
        let col = self.column(vc);
        let (x_cp, y_cp) = self.compression_point(vc);
        if y_target > y_cp {
            return None;
        }
        if y_target <= col[0] {
            return Some(self.x_grid[0]);
        }
        for k in 1..self.x_grid.len() {
            if self.x_grid[k - 1] >= x_cp {
                break;
            }
            let (y0, y1) = (col[k - 1], col[k]);
            if y1 >= y_target && y0 < y_target {
                let t = (y_target - y0) / (y1 - y0);
                return Some(self.x_grid[k - 1] + t * (self.x_grid[k] - self.x_grid[k - 1]));
            }
        }
        Some(x_cp)
    }

    /// Runs `x` and `vc` through the surface sample by sample.
    pub fn simulate_transmitter(&self, x: &IqSignal, vc: &ControlSignal) -> Result<Simulation> {
        if x.len() != vc.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: vc.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptySignal);
        }
        check_same_rate(x.sample_rate, vc.sample_rate)?;
        let mut samples = Vec::with_capacity(x.len());
        let (mut dc, mut pin, mut pout) = (0.0, 0.0, 0.0);
        for (s, &v) in x.samples.iter().zip(&vc.samples) {
            let pt = self.evaluate(s.norm(), v)?;
            let arg = if s.norm() > 0.0 { s.arg() } else { 0.0 };
            samples.push(Complex64::from_polar(pt.y_mag, arg - pt.phase));
            dc += pt.p_dc;
            pin += pt.p_in;
            pout += self.output_power(pt.y_mag);
        }
        let n = x.len() as f64;
        Ok(Simulation {
            y: IqSignal::new(samples, x.sample_rate, "y")?,
            powers: TransmitterPowers {
                p_dc_avg: dc / n,
                p_in_avg: pin / n,
                p_out_avg: pout / n,
            },
        })
    }
}

/// Cell index and fractional position. With `extrapolate` the last cell
/// extends past the grid; otherwise the value is clamped.
fn locate(grid: &[f64], v: f64, extrapolate: bool) -> (usize, f64) {
    let n = grid.len();
    let last = n - 2;
    if v <= grid[0] {
        return (0, 0.0);
    }
    if v >= grid[n - 1] {
        let frac = if extrapolate {
            (v - grid[last]) / (grid[n - 1] - grid[last])
        } else {
            1.0
        };
        return (last, frac);
    }
    let i = grid.partition_point(|&g| g <= v) - 1;
    let i = i.min(last);
    (i, (v - grid[i]) / (grid[i + 1] - grid[i]))
}
