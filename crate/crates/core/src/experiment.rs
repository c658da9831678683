//! End-to-end experiments: the dual-input transmitter against the PA-alone
//! baseline at matched average output power, plus the delay-mismatch and
//! coherent-averaging studies.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capture::averaged_capture;
use crate::delay::{apply_fractional_delay, delay_control, estimate_delay, EDGE_GUARD};
use crate::error::{Error, Result};
use crate::extract::{
    compute_pae_grid, extract_max_pae_ridge, extract_phase_predistorter, fit_control_law, phase_spread,
    ControlLaw, LawOrders, PhaseSource, Ridge,
};
use crate::fixtures::{make_reference_surface, reference_network, FixtureKind};
use crate::io;
use crate::metrics::{
    acpr, control_occupied_bandwidth, measure_noise_floor, nmse, normalized_gain_curve, power_spectrum,
    EfficiencyReport, PowerCurve, PowerPdf, SpectrumConfig,
};
use crate::poly::Polynomial;
use crate::signal::{average_power, ControlSignal, IqSignal};
use crate::smith::LoadTrajectory;
use crate::surface::{QuasiStaticSurface, Simulation};
use crate::synth::{generate_test_signal, predistort_single_input, synthesize_dual_inputs, TestSignalSpec};

/// WCDMA channel spacing over chip rate.
pub const CHANNEL_SPACING_RATIO: f64 = 5.0 / 3.84;

const PDF_BINS: usize = 1000;
const GAIN_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fixture name (`class_e`, `class_j`) or path to a load-pull CSV.
    pub surface: String,
    pub signal: TestSignalSpec,
    pub orders: LawOrders,
    /// Ridge bins; defaults to the number of 1 dB drive steps.
    pub n_bins: Option<usize>,
    pub phase_source: PhaseSource,
    /// Control voltage of the PA-alone baseline; defaults to the fixture's
    /// 50 Ω setting, or the top of the grid for measured surfaces.
    pub vc_fixed: Option<f64>,
    /// Delay of the control voltage relative to the RF drive, samples.
    pub delay_mismatch: f64,
    /// White floor of a single capture, dBc; `None` disables noise.
    pub noise_floor_dbc: Option<f64>,
    pub n_averages: usize,
    pub noise_seed: u64,
    pub nfft: usize,
    /// Peak of the desired output relative to the strongest ridge point, dB.
    pub peak_backoff_db: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            surface: "class_e".into(),
            signal: TestSignalSpec::default(),
            orders: LawOrders::default(),
            n_bins: None,
            phase_source: PhaseSource::Static,
            vc_fixed: None,
            delay_mismatch: 0.0,
            noise_floor_dbc: Some(-25.0),
            n_averages: 100,
            noise_seed: 7,
            nfft: 2048,
            peak_backoff_db: 0.0,
            output_dir: PathBuf::from("dlm-output"),
        }
    }
}

impl ExperimentConfig {
    /// Reads TOML or JSON, chosen by extension (TOML otherwise).
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn fixture(kind: FixtureKind) -> Self {
        Self {
            surface: kind.name().into(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.signal.validate()?;
        let bad = |m: String| Err(Error::Config(m));
        if FixtureKind::parse(&self.surface).is_err() && !Path::new(&self.surface).exists() {
            return bad(format!("surface '{}' is neither a fixture nor an existing file", self.surface));
        }
        if self.n_averages == 0 {
            return bad("n_averages must be at least 1".into());
        }
        if self.n_bins.is_some_and(|n| n < 4) {
            return bad("n_bins must be at least 4".into());
        }
        if !self.delay_mismatch.is_finite() || self.delay_mismatch.abs() > 64.0 {
            return bad(format!("delay_mismatch {} outside ±64 samples", self.delay_mismatch));
        }
        if self.noise_floor_dbc.is_some_and(|f| !(-200.0..=0.0).contains(&f)) {
            return bad("noise_floor_dbc must lie in [-200, 0] dBc".into());
        }
        if !(self.nfft >= 64 && self.nfft.is_power_of_two()) {
            return bad(format!("nfft {} must be a power of two ≥ 64", self.nfft));
        }
        if !(0.0..=20.0).contains(&self.peak_backoff_db) {
            return bad("peak_backoff_db must lie in [0, 20] dB".into());
        }
        if let Some(o) = [self.orders.amp, self.orders.vc, self.orders.phase].iter().find(|&&o| o == 0 || o > 15) {
            return bad(format!("polynomial order {o} outside 1..=15"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form of the configuration. The output
    /// directory is left out: it does not change any result.
    pub fn hash(&self) -> String {
        let identity = Self {
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        let canonical = serde_json::to_string(&identity).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn channel_bw(&self) -> f64 {
        self.signal.chip_rate
    }

    pub fn spectrum(&self) -> SpectrumConfig {
        SpectrumConfig {
            nfft: self.nfft,
            overlap: self.nfft / 2,
        }
    }

    pub fn fixture_kind(&self) -> Option<FixtureKind> {
        FixtureKind::parse(&self.surface).ok()
    }

    pub fn load_surface(&self) -> Result<QuasiStaticSurface> {
        match self.fixture_kind() {
            Some(kind) => Ok(make_reference_surface(kind)),
            None => io::load_loadpull_csv(Path::new(&self.surface)),
        }
    }

    pub fn resolved_vc_fixed(&self, surface: &QuasiStaticSurface) -> f64 {
        self.vc_fixed.unwrap_or_else(|| match self.fixture_kind() {
            Some(kind) => kind.vc_fixed(),
            None => surface.vc_range().1,
        })
    }

    /// Floor left after coherent averaging, dBc.
    pub fn effective_floor_dbc(&self) -> Option<f64> {
        self.noise_floor_dbc
            .map(|f| f - 10.0 * (self.n_averages as f64).log10())
    }
}

/// Everything computed before any modulated run.
#[derive(Debug, Clone)]
pub struct Design {
    pub surface: QuasiStaticSurface,
    pub ridge: Ridge,
    pub law: ControlLaw,
    pub vc_fixed: f64,
    /// Desired output, peak-scaled onto the ridge.
    pub u: IqSignal,
}

/// Surface, ridge, static control law and the scaled desired output.
pub fn prepare_design(cfg: &ExperimentConfig) -> Result<Design> {
    cfg.validate()?;
    let surface = cfg.load_surface().map_err(|e| e.at_stage("characterize"))?;
    let vc_fixed = cfg.resolved_vc_fixed(&surface);
    let (ridge, law) = (|| {
        let grid = compute_pae_grid(&surface)?;
        let ridge = extract_max_pae_ridge(&grid, cfg.n_bins.unwrap_or_else(|| grid.default_bins()))?;
        let law = fit_control_law(&ridge, &surface, cfg.orders)?;
        Ok((ridge, law))
    })()
    .map_err(|e: Error| e.at_stage("extract-law"))?;
    let u = desired_output(cfg, &law).map_err(|e| e.at_stage("synthesize"))?;
    Ok(Design {
        surface,
        ridge,
        law,
        vc_fixed,
        u,
    })
}

/// The configured test signal with its peak placed `peak_backoff_db` below
/// the strongest ridge point of `law`.
pub fn desired_output(cfg: &ExperimentConfig, law: &ControlLaw) -> Result<IqSignal> {
    let raw = generate_test_signal(&cfg.signal)?;
    let peak = raw.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let target = law.meta.u_ridge_max * 10f64.powf(-cfg.peak_backoff_db / 20.0);
    let k = target / peak;
    Ok(raw.with_samples(raw.samples.iter().map(|s| s * k).collect()).relabel("u"))
}

/// Emulated acquisition: white floor on each capture, then coherent
/// averaging. `stream` selects an independent noise realization.
pub fn capture(cfg: &ExperimentConfig, y: &IqSignal, stream: u64) -> Result<IqSignal> {
    match cfg.noise_floor_dbc {
        None => Ok(y.clone()),
        Some(floor) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
            rng.set_stream(stream);
            averaged_capture(y, floor, cfg.channel_bw(), cfg.n_averages, &mut rng)
        }
    }
}

/// Drops the samples that delay interpolation may have touched.
pub fn trim(sig: &IqSignal) -> IqSignal {
    let n = sig.len();
    if n <= 4 * EDGE_GUARD {
        return sig.clone();
    }
    sig.with_samples(sig.samples[EDGE_GUARD..n - EDGE_GUARD].to_vec())
}

/// Replaces the law's phase predistorter with one fitted from a first
/// modulated run made without phase correction.
pub fn measured_phase_law(cfg: &ExperimentConfig, design: &Design) -> Result<ControlLaw> {
    let order = design.law.meta.orders.phase;
    let bare = design
        .law
        .with_phase(Polynomial::zero(), PhaseSource::Measured);
    let inputs = synthesize_dual_inputs(&design.u, &bare)?;
    let sim = design.surface.simulate_transmitter(&inputs.x, &inputs.vc)?;
    let mut y = capture(cfg, &sim.y, 1)?;
    let d = estimate_delay(&design.u, &y)?;
    if d.abs() > 1e-3 {
        y = apply_fractional_delay(&y, -d)?;
    }
    let dphi = extract_phase_predistorter(&trim(&design.u), &trim(&y), order)?;
    Ok(bare.with_phase(dphi.scaled(-1.0), PhaseSource::Measured))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub pae_dlm: f64,
    pub drain_dlm: f64,
    pub pae_alone: f64,
    pub drain_alone: f64,
}

/// Efficiency predicted by averaging the static curves over the output-power pdf.
pub fn predict_efficiency(design: &Design) -> Result<Prediction> {
    let s = &design.surface;
    let pdf = PowerPdf::from_envelope(&design.u, s.z_ref, PDF_BINS)?;
    let first = design.ridge.points[0];
    let mut p_out = vec![0.0];
    let mut p_in = vec![0.0];
    let mut p_dc = vec![s.p_dc[0][first.cell.1]];
    for p in &design.ridge.points {
        p_out.push(p.p_out);
        p_in.push(s.p_in[p.cell.0][p.cell.1]);
        p_dc.push(s.p_dc[p.cell.0][p.cell.1]);
    }
    let ridge_curve = PowerCurve::new(p_out, p_in, p_dc)?;
    let dlm = ridge_curve.average_over(&pdf)?;

    // the fixed column sampled densely up to its compression point
    let (x_cp, _) = s.compression_point(design.vc_fixed);
    let n = 2000;
    let (mut fo, mut fi, mut fd) = (Vec::new(), Vec::new(), Vec::new());
    for k in 0..=n {
        let pt = s.evaluate(x_cp * k as f64 / n as f64, design.vc_fixed)?;
        let po = s.output_power(pt.y_mag);
        if fo.last().is_some_and(|&last| po <= last) {
            continue;
        }
        fo.push(po);
        fi.push(pt.p_in);
        fd.push(pt.p_dc);
    }
    let alone = PowerCurve::new(fo, fi, fd)?.average_over(&pdf)?;
    Ok(Prediction {
        pae_dlm: dlm.pae,
        drain_dlm: dlm.drain,
        pae_alone: alone.pae,
        drain_alone: alone.drain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub channel_bw_hz: f64,
    pub adjacent_offset_hz: f64,
    pub nfft: usize,
    pub noise_floor_dbc: Option<f64>,
    pub n_averages: usize,
    pub effective_floor_dbc: Option<f64>,
    pub edge_guard_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config_hash: String,
    pub surface: String,
    pub phase_source: PhaseSource,
    pub vc_fixed: f64,
    pub dlm: EfficiencyReport,
    pub alone: EfficiencyReport,
    pub prediction: Prediction,
    /// Average output power of the DLM run over the PA-alone run, dB.
    pub power_match_db: f64,
    pub pae_improvement: f64,
    pub vc_bandwidth_hz: f64,
    pub input_bandwidth_hz: f64,
    pub vc_bandwidth_ratio: f64,
    pub gain_flatness_dlm: f64,
    pub gain_flatness_alone: f64,
    pub phase_spread_dlm: f64,
    pub provenance: Provenance,
}

/// One architecture's run: simulated output, its capture and its metrics.
struct Run {
    sim: Simulation,
    captured: IqSignal,
    report: EfficiencyReport,
}

fn evaluate_run(cfg: &ExperimentConfig, u: &IqSignal, sim: Simulation, saturated: usize, stream: u64) -> Result<Run> {
    let captured = capture(cfg, &sim.y, stream)?;
    let bw = cfg.channel_bw();
    let a = acpr(&trim(&captured), bw, bw * CHANNEL_SPACING_RATIO, cfg.spectrum())?;
    let p = sim.powers;
    let report = EfficiencyReport {
        pae_avg: crate::metrics::pae(p.p_out_avg, p.p_in_avg, p.p_dc_avg)?,
        drain_eff_avg: crate::metrics::drain_efficiency(p.p_out_avg, p.p_dc_avg)?,
        p_out_avg: p.p_out_avg,
        p_in_avg: p.p_in_avg,
        p_dc_avg: p.p_dc_avg,
        acpr_low_db: a.lower_db,
        acpr_high_db: a.upper_db,
        nmse_db: nmse(&trim(u), &trim(&captured))?,
        saturation_fraction: saturated as f64 / u.len() as f64,
    };
    Ok(Run { sim, captured, report })
}

/// Outputs of [`run_experiment`] kept in memory for callers and tests.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub law: ControlLaw,
    pub u: IqSignal,
    pub x: IqSignal,
    pub vc: ControlSignal,
    pub y_dlm: IqSignal,
    pub y_alone: IqSignal,
    pub trajectory: Option<LoadTrajectory>,
}

/// Runs the full pipeline without touching the file system.
pub fn simulate_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let design = prepare_design(cfg)?;
    let law = match cfg.phase_source {
        PhaseSource::Static => design.law.clone(),
        PhaseSource::Measured => measured_phase_law(cfg, &design).map_err(|e| e.at_stage("extract-law"))?,
    };
    let u = &design.u;
    let (inputs, dlm, single, alone) = (|| {
        let inputs = synthesize_dual_inputs(u, &law)?;
        let vc = if cfg.delay_mismatch != 0.0 {
            delay_control(&inputs.vc, cfg.delay_mismatch)?
        } else {
            inputs.vc.clone()
        };
        let dlm_sim = design.surface.simulate_transmitter(&inputs.x, &vc)?;
        let single = predistort_single_input(u, &design.surface, design.vc_fixed)?;
        let fixed = ControlSignal::constant(design.vc_fixed, u.len(), u.sample_rate)?;
        let alone_sim = design.surface.simulate_transmitter(&single.x, &fixed)?;
        Ok((inputs, dlm_sim, single, alone_sim))
    })()
    .map_err(|e: Error| e.at_stage("simulate"))?;

    let (dlm, alone, report) = (|| {
        let dlm = evaluate_run(cfg, u, dlm, inputs.saturated, 2)?;
        let alone = evaluate_run(cfg, u, alone, single.saturated, 3)?;
        let prediction = predict_efficiency(&design)?;
        let vc_bw = control_occupied_bandwidth(&inputs.vc, 0.95, cfg.spectrum())?;
        let gain_dlm = normalized_gain_curve(&trim(u), &trim(&dlm.captured), GAIN_BINS)?;
        let gain_alone = normalized_gain_curve(&trim(u), &trim(&alone.captured), GAIN_BINS)?;
        let report = ExperimentReport {
            config_hash: cfg.hash(),
            surface: design.surface.label.clone(),
            phase_source: cfg.phase_source,
            vc_fixed: design.vc_fixed,
            power_match_db: 10.0 * (dlm.report.p_out_avg / alone.report.p_out_avg).log10(),
            pae_improvement: dlm.report.pae_avg - alone.report.pae_avg,
            vc_bandwidth_hz: vc_bw,
            input_bandwidth_hz: cfg.channel_bw(),
            vc_bandwidth_ratio: vc_bw / cfg.channel_bw(),
            gain_flatness_dlm: gain_dlm.flatness(),
            gain_flatness_alone: gain_alone.flatness(),
            phase_spread_dlm: phase_spread(&trim(u), &trim(&dlm.sim.y))?,
            dlm: dlm.report.clone(),
            alone: alone.report.clone(),
            prediction,
            provenance: Provenance {
                channel_bw_hz: cfg.channel_bw(),
                adjacent_offset_hz: cfg.channel_bw() * CHANNEL_SPACING_RATIO,
                nfft: cfg.nfft,
                noise_floor_dbc: cfg.noise_floor_dbc,
                n_averages: cfg.n_averages,
                effective_floor_dbc: cfg.effective_floor_dbc(),
                edge_guard_samples: EDGE_GUARD,
            },
        };
        Ok((dlm, alone, report))
    })()
    .map_err(|e: Error| e.at_stage("report"))?;

    let trajectory = match cfg.fixture_kind() {
        Some(kind) => Some(
            reference_network(kind)
                .trajectory(design.ridge.points.iter().map(|p| (p.p_out, p.vc)))
                .map_err(|e| e.at_stage("report"))?,
        ),
        None => None,
    };
    Ok(ExperimentOutcome {
        report,
        law,
        u: u.clone(),
        x: inputs.x,
        vc: inputs.vc,
        y_dlm: dlm.captured,
        y_alone: alone.captured,
        trajectory,
    })
}

/// Runs the pipeline and writes its artifacts to `out_dir`. Files are
/// staged in a scratch directory and only moved in on success.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ExperimentReport> {
    let outcome = simulate_experiment(cfg)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let staging = out_dir.join(format!(".staging-{}", &outcome.report.config_hash[..12]));
    let written = write_artifacts(&outcome, &staging);
    let result = written.and_then(|names| {
        for name in &names {
            let to = out_dir.join(name);
            fs::rename(staging.join(name), &to).map_err(|e| Error::io(&to, e))?;
        }
        Ok(())
    });
    let _ = fs::remove_dir_all(&staging);
    result.map_err(|e| e.at_stage("write"))?;
    info!("experiment artifacts written to {}", out_dir.display());
    Ok(outcome.report)
}

fn write_artifacts(o: &ExperimentOutcome, dir: &Path) -> Result<Vec<String>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut names: Vec<String> = Vec::new();
    let mut add = |n: &str| names.push(n.to_string());
    io::write_law(&dir.join("law.json"), &o.law)?;
    add("law.json");
    for (stem, sig) in [("u", &o.u), ("x", &o.x), ("y_dlm", &o.y_dlm), ("y_alone", &o.y_alone)] {
        io::write_signal(&dir.join(format!("{stem}.csv")), sig)?;
        add(&format!("{stem}.csv"));
        add(&format!("{stem}.json"));
    }
    io::write_control(&dir.join("vc.csv"), &o.vc, "vc")?;
    add("vc.csv");
    add("vc.json");
    let spectrum_cfg = SpectrumConfig {
        nfft: o.report.provenance.nfft,
        overlap: o.report.provenance.nfft / 2,
    };
    for (stem, sig) in [("dlm", &o.y_dlm), ("alone", &o.y_alone)] {
        let name = format!("spectrum_{stem}.csv");
        io::write_spectrum_csv(&dir.join(&name), &power_spectrum(&trim(sig), spectrum_cfg)?)?;
        add(&name);
        let name = format!("gain_{stem}.csv");
        io::write_gain_csv(&dir.join(&name), &normalized_gain_curve(&trim(&o.u), &trim(sig), GAIN_BINS)?)?;
        add(&name);
    }
    if let Some(t) = &o.trajectory {
        io::write_trajectory(&dir.join("trajectory.json"), t)?;
        add("trajectory.json");
    }
    io::write_json(&dir.join("report.json"), &o.report)?;
    add("report.json");
    Ok(names)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayRow {
    pub delay_samples: f64,
    pub delay_chips: f64,
    pub nmse_db: f64,
    pub acpr_db: f64,
}

/// Re-simulates the dual-input run with the control voltage delayed by each
/// entry of `delays` (samples). Every row sees the same noise realization.
pub fn run_delay_sweep(cfg: &ExperimentConfig, delays: &[f64]) -> Result<Vec<DelayRow>> {
    let design = prepare_design(cfg)?;
    let law = match cfg.phase_source {
        PhaseSource::Static => design.law.clone(),
        PhaseSource::Measured => measured_phase_law(cfg, &design).map_err(|e| e.at_stage("extract-law"))?,
    };
    let inputs = synthesize_dual_inputs(&design.u, &law).map_err(|e| e.at_stage("synthesize"))?;
    let bw = cfg.channel_bw();
    let sps = cfg.signal.oversample as f64;
    delays
        .iter()
        .map(|&d| {
            let vc = delay_control(&inputs.vc, d)?;
            let sim = design.surface.simulate_transmitter(&inputs.x, &vc)?;
            let y = trim(&capture(cfg, &sim.y, 2)?);
            Ok(DelayRow {
                delay_samples: d,
                delay_chips: d / sps,
                nmse_db: nmse(&trim(&design.u), &y)?,
                acpr_db: acpr(&y, bw, bw * CHANNEL_SPACING_RATIO, cfg.spectrum())?.worst(),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("sweep-delay"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragingRow {
    pub n_averages: usize,
    pub floor_dbc: f64,
}

/// Measured out-of-band floor of the dual-input output for each averaging count.
pub fn run_averaging_study(cfg: &ExperimentConfig, n_list: &[usize]) -> Result<Vec<AveragingRow>> {
    let floor = cfg
        .noise_floor_dbc
        .ok_or_else(|| Error::Config("the averaging study needs noise_floor_dbc".into()))?;
    let design = prepare_design(cfg)?;
    let inputs = synthesize_dual_inputs(&design.u, &design.law).map_err(|e| e.at_stage("synthesize"))?;
    let sim = design
        .surface
        .simulate_transmitter(&inputs.x, &inputs.vc)
        .map_err(|e| e.at_stage("simulate"))?;
    let bw = cfg.channel_bw();
    n_list
        .iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::Config("averaging counts must be at least 1".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.noise_seed);
            rng.set_stream(n as u64);
            let y = averaged_capture(&sim.y, floor, bw, n, &mut rng)?;
            Ok(AveragingRow {
                n_averages: n,
                floor_dbc: measure_noise_floor(&y, bw, cfg.spectrum())?,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("study-averaging"))
}

/// Average output power of a signal into `z_ref`, W.
pub fn output_power(sig: &IqSignal, z_ref: f64) -> Result<f64> {
    Ok(average_power(sig)? / (2.0 * z_ref))
}
