//! Reflection-coefficient algebra for load trajectories on the Smith chart.
//!
//! A line of electrical length θ between the PA and the matching network
//! rotates the presented reflection coefficient by `e^{−2jθ}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    #[serde(rename = "pout_w")]
    pub p_out: f64,
    #[serde(rename = "gamma_re")]
    pub gamma_re: f64,
    #[serde(rename = "gamma_im")]
    pub gamma_im: f64,
}

impl TrajectoryPoint {
    pub fn new(p_out: f64, gamma: Complex64) -> Self {
        Self {
            p_out,
            gamma_re: gamma.re,
            gamma_im: gamma.im,
        }
    }

    pub fn gamma(&self) -> Complex64 {
        Complex64::new(self.gamma_re, self.gamma_im)
    }
}

/// Load reflection coefficient versus output power, ordered by power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadTrajectory {
    points: Vec<TrajectoryPoint>,
}

impl LoadTrajectory {
    pub fn new(points: Vec<TrajectoryPoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].p_out <= w[0].p_out) {
            return Err(Error::InvalidArgument(
                "trajectory output power must be strictly increasing".into(),
            ));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.gamma().norm() <= 1.0) || !p.p_out.is_finite())
        {
            return Err(Error::InvalidArgument(format!(
                "invalid trajectory point at {} W (|Γ| = {})",
                p.p_out,
                p.gamma().norm()
            )));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Γ interpolated linearly against log output power; `None` outside the
    /// trajectory's power span.
    pub fn gamma_at(&self, p_out: f64) -> Option<Complex64> {
        let pts = &self.points;
        let (first, last) = (pts.first()?, pts.last()?);
        if p_out < first.p_out || p_out > last.p_out {
            return None;
        }
        let k = pts.partition_point(|p| p.p_out < p_out);
        if k == 0 {
            return Some(first.gamma());
        }
        let (a, b) = (&pts[k - 1], &pts[k]);
        if b.p_out == p_out {
            return Some(b.gamma());
        }
        let t = (p_out.ln() - a.p_out.ln()) / (b.p_out.ln() - a.p_out.ln());
        Some(a.gamma() + (b.gamma() - a.gamma()) * t)
    }
}

/// Reflection coefficient presented to the PA at each control voltage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmnMap {
    pub vc_grid: Vec<f64>,
    pub gamma: Vec<Complex64>,
    /// Electrical length of the adaptor between PA and network, radians.
    pub electrical_rotation: f64,
}

impl VmnMap {
    pub fn new(vc_grid: Vec<f64>, gamma: Vec<Complex64>, electrical_rotation: f64) -> Result<Self> {
        if vc_grid.len() != gamma.len() || vc_grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "network map needs matching control and Γ tables with at least 2 entries".into(),
            ));
        }
        if vc_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("control grid must be ascending".into()));
        }
        if gamma.iter().any(|g| !(g.norm() < 1.0)) {
            return Err(Error::InvalidArgument("network Γ must lie inside the unit circle".into()));
        }
        Ok(Self {
            vc_grid,
            gamma,
            electrical_rotation,
        })
    }

    /// Γ seen by the PA at `vc` (clamped to the grid), including the adaptor rotation.
    pub fn gamma_at(&self, vc: f64) -> Complex64 {
        let g = &self.vc_grid;
        let n = g.len();
        let raw = if vc <= g[0] {
            self.gamma[0]
        } else if vc >= g[n - 1] {
            self.gamma[n - 1]
        } else {
            let k = g.partition_point(|&v| v <= vc) - 1;
            let t = (vc - g[k]) / (g[k + 1] - g[k]);
            self.gamma[k] + (self.gamma[k + 1] - self.gamma[k]) * t
        };
        raw * Complex64::from_polar(1.0, -2.0 * self.electrical_rotation)
    }

    /// Same network behind a different adaptor.
    pub fn with_rotation(&self, electrical_rotation: f64) -> Self {
        Self {
            electrical_rotation,
            ..self.clone()
        }
    }

    /// Maps `(p_out, vc)` operating points onto the load they present.
    pub fn trajectory(&self, points: impl IntoIterator<Item = (f64, f64)>) -> Result<LoadTrajectory> {
        LoadTrajectory::new(
            points
                .into_iter()
                .map(|(p_out, vc)| TrajectoryPoint::new(p_out, self.gamma_at(vc)))
                .collect(),
        )
    }
}

/// Rotates every load by `e^{−2jθ}`; output powers are untouched.
pub fn rotate_trajectory(traj: &LoadTrajectory, theta: f64) -> LoadTrajectory {
    let r = Complex64::from_polar(1.0, -2.0 * theta);
    LoadTrajectory {
        points: traj
            .points
            .iter()
            .map(|p| TrajectoryPoint::new(p.p_out, p.gamma() * r))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationFit {
    /// Electrical rotation in `(−π/2, π/2]`; rotations are defined modulo π.
    pub theta: f64,
    /// RMS of `|γ_a·e^{−2jθ} − γ_b|` over matched points.
    pub residual: f64,
    pub matched: usize,
}

/// Finds the rotation taking `traj_a` onto `traj_b`.
///
/// `traj_b` is resampled at each output power of `traj_a` inside their
/// common span; the least-squares angle has the closed form
/// `θ = −½·arg Σ conj(γ_a)·γ_b`.
pub fn fit_rotation(traj_a: &LoadTrajectory, traj_b: &LoadTrajectory) -> Result<RotationFit> {
    let pairs: Vec<(Complex64, Complex64)> = traj_a
        .points
        .iter()
        .filter_map(|p| traj_b.gamma_at(p.p_out).map(|gb| (p.gamma(), gb)))
        .collect();
    if pairs.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            have: pairs.len(),
        });
    }
    let s: Complex64 = pairs.iter().map(|(a, b)| a.conj() * b).sum();
    let mut theta = -0.5 * s.arg();
    if theta <= -std::f64::consts::FRAC_PI_2 {
        theta += std::f64::consts::PI;
    }
    let r = Complex64::from_polar(1.0, -2.0 * theta);
    let residual = (pairs.iter().map(|(a, b)| (a * r - b).norm_sqr()).sum::<f64>()
        / pairs.len() as f64)
        .sqrt();
    Ok(RotationFit {
        theta,
        residual,
        matched: pairs.len(),
    })
}
