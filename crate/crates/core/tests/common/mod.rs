//! Builders shared by the integration suites.
#![allow(dead_code)]

pub mod invariants;

use dlm_core::experiment::ExperimentConfig;
use dlm_core::fixtures::{surface_from_params, FixtureKind, FixtureParams};
use dlm_core::synth::{generate_code_mix, TestSignalSpec};
use dlm_core::{IqSignal, QuasiStaticSurface};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const FIXTURES: [FixtureKind; 2] = [FixtureKind::ClassE, FixtureKind::ClassJ];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Short multicode waveform: band-limited to about 1/oversample of the
/// sample rate, unit average power.
pub fn band_limited(seed: u64, n_chips: usize, oversample: usize) -> IqSignal {
    let spec = TestSignalSpec {
        n_chips,
        oversample,
        seed,
        ..Default::default()
    };
    generate_code_mix(&spec, &[1.0; 16]).unwrap()
}

/// Arbitrary surface on a random grid: each column's output rises with
/// drive, DC power is positive and PAE stays below one.
pub fn random_grid_surface(seed: u64) -> QuasiStaticSurface {
    let mut r = rng(seed);
    let nx = r.random_range(4..20);
    let nv = r.random_range(2..12);
    let z = 50.0;
    let mut x = vec![0.0];
    for _ in 1..nx {
        let last = *x.last().unwrap();
        x.push(last + r.random_range(0.05..0.5));
    }
    let mut vc = vec![r.random_range(0.0..5.0)];
    for _ in 1..nv {
        let last = *vc.last().unwrap();
        vc.push(last + r.random_range(0.5..3.0));
    }
    let mut y = vec![vec![0.0; nv]; nx];
    let mut p_dc = vec![vec![0.0; nv]; nx];
    let mut p_in = vec![vec![0.0; nv]; nx];
    for j in 0..nv {
        let gain = r.random_range(2.0..20.0);
        for i in 0..nx {
            p_in[i][j] = x[i] * x[i] / (2.0 * z);
            if i > 0 {
                // rising output with random per-step gain, in whole tenths so
                // that ties between cells actually occur
                let step = (r.random_range(1..10) as f64) * 0.1 * gain * (x[i] - x[i - 1]);
                y[i][j] = y[i - 1][j] + step;
            }
            let p_out = y[i][j] * y[i][j] / (2.0 * z);
            let eta = r.random_range(0.05..0.9);
            p_dc[i][j] = (p_out / eta).max(r.random_range(0.01..0.5));
        }
    }
    let phase = vec![vec![0.0; nv]; nx];
    QuasiStaticSurface::new(x, vc, y, phase, p_dc, p_in, z, "random").unwrap()
}

/// Random member of the fixture family, near the calibrated parameters.
pub fn random_family_params(seed: u64) -> FixtureParams {
    let mut r = rng(seed);
    let base = if r.random::<bool>() {
        FixtureKind::ClassE.params()
    } else {
        FixtureKind::ClassJ.params()
    };
    let mut jitter = |v: f64, rel: f64| v * (1.0 + r.random_range(-rel..rel));
    let mut p = FixtureParams {
        psat_hi: jitter(base.psat_hi, 0.5),
        psat_range_db: jitter(base.psat_range_db, 0.5),
        drive_headroom: jitter(base.drive_headroom, 0.2).max(1.2),
        gain_hi: jitter(base.gain_hi, 0.5),
        gain_range_db: jitter(base.gain_range_db, 0.5),
        eta_hi: jitter(base.eta_hi, 0.1),
        eta_drop: jitter(base.eta_drop, 0.5),
        eta_shape: jitter(base.eta_shape, 0.5),
        p_quiescent: jitter(base.p_quiescent, 0.5),
        phase_offset: jitter(base.phase_offset, 1.0),
        phase_am: jitter(base.phase_am, 1.0),
        phase_vc: jitter(base.phase_vc, 1.0),
    };
    // stay physical: positive efficiency and DC power rising with drive
    // at the lowest control voltage, where both margins are smallest
    p.eta_drop = p.eta_drop.min(0.8 * p.eta_hi);
    let eta_lo = p.eta_hi - p.eta_drop;
    let psat_lo = p.psat_hi * 10f64.powf(-p.psat_range_db / 10.0);
    p.p_quiescent = p.p_quiescent.min(0.8 * psat_lo / 2f64.sqrt() / eta_lo);
    p
}

pub fn random_family_surface(seed: u64) -> QuasiStaticSurface {
    surface_from_params(&random_family_params(seed), "family").unwrap()
}

/// Experiment configuration with a short signal for fast end-to-end runs.
/// A thousand chips rarely hold an 11 dB peak, so the PAR target is lower.
pub fn quick_config(kind: FixtureKind, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::fixture(kind);
    cfg.signal.n_chips = 1024;
    cfg.signal.target_par = 9.75;
    cfg.signal.oversample = 8;
    cfg.signal.seed = seed;
    cfg.nfft = 512;
    cfg.n_averages = 8;
    cfg
}

pub fn complex_gaussian(r: &mut ChaCha8Rng) -> Complex64 {
    let d = rand_distr::StandardNormal;
    Complex64::new(r.sample(d), r.sample(d))
}
