//! Synthetic reference characterizations of a class-E and a class-J PA
//! behind the same varactor matching network.
//!
//! Each surface is a smooth parametric family sampled on the grid a
//! load-pull sweep would produce (1 dB drive steps, 1 V control steps over
//! 6–27 V). The parameters were fitted offline by
//! `scripts/calibrate_fixtures.py`; only the fitted values live here.
//!
//! With `v = (V_c − 6)/21` the normalized control setting:
//!
//! ```text
//! P_sat(v) = P_sat,hi · 10^(−D·(1 − v)/10)
//! G(v)     = G_hi · 10^(γ·(1 − v)/20),   x_sat = sqrt(2·z·P_sat) / G
//! |y|      = G·|x| / (1 + (|x|/x_sat)^4)^(1/4)
//! η_sat(v) = η_hi − Δη·(1 − v)^b
//! P_dc     = P_q + k(v)·|x|,  with k set so drain efficiency at x_sat is η_sat
//! f_φ      = φ0 + φ2·(|x|/x_max)² + φ_v·(V_c − 16.5)
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::smith::VmnMap;
use crate::surface::QuasiStaticSurface;

pub const FIXTURE_Z_REF: f64 = 50.0;
const VC_LO: f64 = 6.0;
const VC_HI: f64 = 27.0;
const VC_STEP: f64 = 1.0;
const DRIVE_STEPS_DB: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    ClassE,
    ClassJ,
}

impl FixtureKind {
    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::ClassE => "class_e",
            FixtureKind::ClassJ => "class_j",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace('-', "_").as_str() {
            "class_e" | "e" => Ok(FixtureKind::ClassE),
            "class_j" | "j" => Ok(FixtureKind::ClassJ),
            other => Err(Error::Config(format!(
                "unknown fixture '{other}' (expected class_e or class_j)"
            ))),
        }
    }

    pub fn params(self) -> FixtureParams {
        match self {
            FixtureKind::ClassE => FixtureParams {
                psat_hi: 6.700387599895243,
                psat_range_db: 7.580664580170872,
                drive_headroom: 1.7132840576657848,
                gain_hi: 14.558399749887165,
                gain_range_db: 0.8186068514483704,
                eta_hi: 0.6018233245717333,
                eta_drop: 0.3353660187066525,
                eta_shape: 3.1374561922892523,
                p_quiescent: 0.414705589908479,
                phase_offset: 0.2,
                phase_am: 0.6,
                phase_vc: -0.02,
            },
            FixtureKind::ClassJ => FixtureParams {
                psat_hi: 9.736472082914036,
                psat_range_db: 6.874366477216092,
                drive_headroom: 2.107491147654173,
                gain_hi: 5.35305050354747,
                gain_range_db: 1.1785175659855267,
                eta_hi: 0.7126311466650294,
                eta_drop: 0.16057338327134107,
                eta_shape: 2.638459764474607,
                p_quiescent: 0.25281444906013895,
                phase_offset: -0.1,
                phase_am: 0.5,
                phase_vc: 0.03,
            },
        }
    }

    /// Control voltage of the PA-alone baseline: the network setting that
    /// presents 50 Ω, which is also the only column reaching the full
    /// peak output power.
    pub fn vc_fixed(self) -> f64 {
        VC_HI
    }

    /// Electrical length of the adaptor between PA and network.
    pub fn adaptor_rotation(self) -> f64 {
        match self {
            FixtureKind::ClassE => 0.0,
            FixtureKind::ClassJ => 0.35,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureParams {
    /// Saturated output power at the top control voltage, W.
    pub psat_hi: f64,
    /// Saturated power lost from the top to the bottom control voltage, dB.
    pub psat_range_db: f64,
    /// Largest drive relative to the top-column saturation drive.
    pub drive_headroom: f64,
    pub gain_hi: f64,
    /// Small-signal gain gained from the top to the bottom control voltage, dB.
    pub gain_range_db: f64,
    pub eta_hi: f64,
    pub eta_drop: f64,
    pub eta_shape: f64,
    pub p_quiescent: f64,
    pub phase_offset: f64,
    pub phase_am: f64,
    /// Insertion-phase slope against control voltage, rad/V.
    pub phase_vc: f64,
}

impl FixtureParams {
    fn top_saturation_drive(&self) -> f64 {
        (2.0 * FIXTURE_Z_REF * self.psat_hi).sqrt() / self.gain_hi
    }

    pub fn x_max(&self) -> f64 {
        self.drive_headroom * self.top_saturation_drive()
    }

    /// `(|y|, phase, P_dc, P_in)` at one operating point.
    pub fn cell(&self, x: f64, vc: f64) -> (f64, f64, f64, f64) {
        let z = FIXTURE_Z_REF;
        let back = 1.0 - (vc - VC_LO) / (VC_HI - VC_LO);
        let psat = self.psat_hi * 10f64.powf(-self.psat_range_db * back / 10.0);
        let ysat = (2.0 * z * psat).sqrt();
        let gain = self.gain_hi * 10f64.powf(self.gain_range_db * back / 20.0);
        let xsat = ysat / gain;
        let y = gain * x / (1.0 + (x / xsat).powi(4)).powf(0.25);
        // output at x = x_sat is ysat / 2^(1/4)
        let p_knee = ysat * ysat / 2f64.sqrt() / (2.0 * z);
        let eta = self.eta_hi - self.eta_drop * back.powf(self.eta_shape);
        let slope = (p_knee / eta - self.p_quiescent) / xsat;
        let p_dc = self.p_quiescent + slope * x;
        let p_in = x * x / (2.0 * z);
        let phase = self.phase_offset
            + self.phase_am * (x / self.x_max()).powi(2)
            + self.phase_vc * (vc - 0.5 * (VC_LO + VC_HI));
        (y, phase, p_dc, p_in)
    }
}

pub fn fixture_grids(params: &FixtureParams) -> (Vec<f64>, Vec<f64>) {
    let x_max = params.x_max();
    let mut x = vec![0.0];
    x.extend((0..=DRIVE_STEPS_DB).rev().map(|k| x_max * 10f64.powf(-(k as f64) / 20.0)));
    let n_vc = ((VC_HI - VC_LO) / VC_STEP).round() as usize + 1;
    let vc = (0..n_vc).map(|j| VC_LO + VC_STEP * j as f64).collect();
    (x, vc)
}

pub fn make_reference_surface(kind: FixtureKind) -> QuasiStaticSurface {
    surface_from_params(&kind.params(), kind.name()).expect("fixture parameters give a valid surface")
}

/// Samples the parametric family on the fixture grid.
pub fn surface_from_params(params: &FixtureParams, label: &str) -> Result<QuasiStaticSurface> {
    let (x_grid, vc_grid) = fixture_grids(params);
    let table = |pick: fn((f64, f64, f64, f64)) -> f64| -> Vec<Vec<f64>> {
        x_grid
            .iter()
            .map(|&x| vc_grid.iter().map(|&v| pick(params.cell(x, v))).collect())
            .collect()
    };
    QuasiStaticSurface::new(
        x_grid.clone(),
        vc_grid.clone(),
        table(|c| c.0),
        table(|c| c.1),
        table(|c| c.2),
        table(|c| c.3),
        FIXTURE_Z_REF,
        label,
    )
}

/// Reflection coefficient presented by the varactor network: 50 Ω at the
/// top control voltage, moving toward higher impedance as `V_c` drops.
pub fn reference_network(kind: FixtureKind) -> VmnMap {
    let vc: Vec<f64> = (0..=21).map(|k| VC_LO + k as f64).collect();
    let gamma = vc
        .iter()
        .map(|&v| {
            let back = (VC_HI - v) / (VC_HI - VC_LO);
            Complex64::from_polar(0.62 * back.powf(0.8), 0.25 + 0.45 * back)
        })
        .collect();
    VmnMap::new(vc, gamma, kind.adaptor_rotation()).expect("fixture network is passive")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape_and_zero_row() {
        for kind in [FixtureKind::ClassE, FixtureKind::ClassJ] {
            let s = make_reference_surface(kind);
            assert_eq!(s.vc_grid.len(), 22);
            assert_eq!(s.x_grid.len(), DRIVE_STEPS_DB + 2);
            assert!(s.y_mag[0].iter().all(|&y| y == 0.0));
            assert!(s.first_non_monotone().is_none());
            let pt = s.evaluate(0.0, 15.0).unwrap();
            assert_eq!(pt.y_mag, 0.0);
            assert!(pt.p_dc > 0.0);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            make_reference_surface(FixtureKind::ClassE),
            make_reference_surface(FixtureKind::ClassE)
        );
    }

    #[test]
    fn names_round_trip() {
        for kind in [FixtureKind::ClassE, FixtureKind::ClassJ] {
            assert_eq!(FixtureKind::parse(kind.name()).unwrap(), kind);
        }
        assert!(FixtureKind::parse("class_ab").is_err());
    }

    #[test]
    fn network_is_matched_at_top() {
        let m = reference_network(FixtureKind::ClassE);
        assert!(m.gamma_at(27.0).norm() < 1e-12);
        assert!(m.gamma_at(6.0).norm() > 0.5);
    }
}
