use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::json;

use dlm_core::delay::delay_control;
use dlm_core::experiment::{
    capture, desired_output, measured_phase_law, output_power, prepare_design, run_averaging_study,
    run_delay_sweep, run_experiment, trim, ExperimentConfig, CHANNEL_SPACING_RATIO,
};
use dlm_core::extract::{compute_pae_grid, extract_max_pae_ridge, fit_control_law, phase_spread, PhaseSource};
use dlm_core::fixtures::reference_network;
use dlm_core::io;
use dlm_core::metrics::{acpr, control_occupied_bandwidth, nmse, normalized_gain_curve, pae, power_spectrum};
use dlm_core::synth::synthesize_dual_inputs;
use dlm_core::{Error, Result};

const GAIN_BINS: usize = 50;

#[derive(Parser, Debug)]
#[command(name = "dlm", version, about = "Dual-input dynamic load modulation transmitter pipeline")]
struct Cli {
    /// Experiment configuration, TOML or JSON. Built-in defaults when omitted.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; takes precedence over the configuration.
    #[arg(short, long, global = true, env = "DLM_OUTPUT_DIR")]
    output_dir: Option<PathBuf>,

    /// Fixture name (class_e, class_j) or load-pull CSV, replacing the configured surface.
    #[arg(long, global = true)]
    surface: Option<String>,

    /// Where the phase predistorter comes from.
    #[arg(long, global = true, value_enum)]
    phase_source: Option<PhaseArg>,

    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PhaseArg {
    Static,
    Measured,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the characterization surface, its maximum-PAE ridge and load trajectory.
    Characterize,
    /// Fit the control law and write law.json.
    ExtractLaw,
    /// Generate the desired output and the co-designed drive and control signals.
    Synthesize {
        /// Control law to use instead of extracting one.
        #[arg(long)]
        law: Option<PathBuf>,
    },
    /// Drive the surface with a drive/control pair and write the captured output.
    Simulate {
        /// RF drive signal (default: <output-dir>/x.csv).
        #[arg(long)]
        x: Option<PathBuf>,
        /// Control voltage (default: <output-dir>/vc.csv).
        #[arg(long)]
        vc: Option<PathBuf>,
        /// Control-voltage delay in samples, replacing the configured mismatch.
        #[arg(long, allow_hyphen_values = true)]
        delay: Option<f64>,
    },
    /// Linearity and spectral metrics of an output against the desired signal.
    Report {
        /// Desired output (default: <output-dir>/u.csv).
        #[arg(long)]
        reference: Option<PathBuf>,
        /// Captured output (default: <output-dir>/y.csv).
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// NMSE and ACPR against control-voltage delay.
    SweepDelay {
        /// Delays in samples, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-8,-6,-4,-2,-1,0,1,2,4,6,8"
        )]
        delays: Vec<f64>,
    },
    /// Measured noise floor against the number of averaged captures.
    StudyAveraging {
        /// Averaging counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "1,4,16,64,100")]
        counts: Vec<usize>,
    },
    /// Full experiment: DLM against PA alone, with every artifact and report.json.
    All,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.surface {
        cfg.surface = s;
    }
    if let Some(p) = cli.phase_source {
        cfg.phase_source = match p {
            PhaseArg::Static => PhaseSource::Static,
            PhaseArg::Measured => PhaseSource::Measured,
        };
    }
    if let Some(dir) = cli.output_dir {
        cfg.output_dir = dir;
    }
    cfg.validate()?;
    let out = cfg.output_dir.clone();
    fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    info!("config hash {}", cfg.hash());

    match cli.command {
        Command::Characterize => characterize(&cfg, &out),
        Command::ExtractLaw => extract_law(&cfg, &out),
        Command::Synthesize { law } => synthesize(&cfg, &out, law.as_deref()),
        Command::Simulate { x, vc, delay } => simulate(
            &cfg,
            &out,
            &x.unwrap_or_else(|| out.join("x.csv")),
            &vc.unwrap_or_else(|| out.join("vc.csv")),
            delay.unwrap_or(cfg.delay_mismatch),
        ),
        Command::Report { reference, output } => report(
            &cfg,
            &out,
            &reference.unwrap_or_else(|| out.join("u.csv")),
            &output.unwrap_or_else(|| out.join("y.csv")),
        ),
        Command::SweepDelay { delays } => sweep_delay(&cfg, &out, &delays),
        Command::StudyAveraging { counts } => study_averaging(&cfg, &out, &counts),
        Command::All => {
            let r = run_experiment(&cfg, &out)?;
            print_json(&r)
        }
    }
}

fn print_json<T: serde::Serialize + ?Sized>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value).expect("value serializes"));
    Ok(())
}

fn characterize(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let stage = |e: Error| e.at_stage("characterize");
    let surface = cfg.load_surface().map_err(stage)?;
    let grid = compute_pae_grid(&surface).map_err(stage)?;
    let ridge = extract_max_pae_ridge(&grid, cfg.n_bins.unwrap_or_else(|| grid.default_bins())).map_err(stage)?;
    io::write_loadpull_csv(&out.join("surface.csv"), &surface)?;
    io::write_json(&out.join("ridge.json"), &ridge)?;
    if let Some(kind) = cfg.fixture_kind() {
        let traj = reference_network(kind)
            .trajectory(ridge.points.iter().map(|p| (p.p_out, p.vc)))
            .map_err(stage)?;
        io::write_trajectory(&out.join("trajectory.json"), &traj)?;
    }
    let (vc_lo, vc_hi) = surface.vc_range();
    print_json(&json!({
        "surface": surface.label,
        "drive_points": surface.x_grid.len(),
        "vc_points": surface.vc_grid.len(),
        "vc_range": [vc_lo, vc_hi],
        "max_pae": grid.max_pae(),
        "ridge_points": ridge.points.len(),
        "ridge_peak_power_w": ridge.points.last().map(|p| p.p_out),
    }))
}

fn extract_law(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let law = match cfg.phase_source {
        PhaseSource::Static => {
            let surface = cfg.load_surface().map_err(|e| e.at_stage("characterize"))?;
            let grid = compute_pae_grid(&surface)?;
            let ridge = extract_max_pae_ridge(&grid, cfg.n_bins.unwrap_or_else(|| grid.default_bins()))?;
            fit_control_law(&ridge, &surface, cfg.orders).map_err(|e| e.at_stage("extract-law"))?
        }
        PhaseSource::Measured => {
            let design = prepare_design(cfg)?;
            measured_phase_law(cfg, &design).map_err(|e| e.at_stage("extract-law"))?
        }
    };
    io::write_law(&out.join("law.json"), &law)?;
    print_json(&json!({
        "u_ridge_max": law.meta.u_ridge_max,
        "u_max": law.u_max,
        "vc_bounds": [law.v_min, law.v_max],
        "orders": law.meta.orders,
        "phase_source": law.meta.phase_source,
    }))
}

fn synthesize(cfg: &ExperimentConfig, out: &Path, law_path: Option<&Path>) -> Result<()> {
    let law = match law_path {
        Some(p) => io::read_law(p)?,
        None => {
            let design = prepare_design(cfg)?;
            match cfg.phase_source {
                PhaseSource::Static => design.law,
                PhaseSource::Measured => measured_phase_law(cfg, &design).map_err(|e| e.at_stage("extract-law"))?,
            }
        }
    };
    let stage = |e: Error| e.at_stage("synthesize");
    let u = desired_output(cfg, &law).map_err(stage)?;
    let inputs = synthesize_dual_inputs(&u, &law).map_err(stage)?;
    io::write_signal(&out.join("u.csv"), &u)?;
    io::write_signal(&out.join("x.csv"), &inputs.x)?;
    io::write_control(&out.join("vc.csv"), &inputs.vc, "vc")?;
    let vc_bw = control_occupied_bandwidth(&inputs.vc, 0.95, cfg.spectrum()).map_err(stage)?;
    print_json(&json!({
        "samples": u.len(),
        "sample_rate_hz": u.sample_rate,
        "saturation_fraction": inputs.saturation_fraction(),
        "vc_bandwidth_hz": vc_bw,
        "vc_bandwidth_ratio": vc_bw / cfg.channel_bw(),
    }))
}

fn simulate(cfg: &ExperimentConfig, out: &Path, x_path: &Path, vc_path: &Path, delay: f64) -> Result<()> {
    let x = io::read_signal(x_path)?;
    let mut vc = io::read_control(vc_path)?;
    let stage = |e: Error| e.at_stage("simulate");
    let surface = cfg.load_surface().map_err(|e| e.at_stage("characterize"))?;
    if delay != 0.0 {
        vc = delay_control(&vc, delay).map_err(stage)?;
    }
    let sim = surface.simulate_transmitter(&x, &vc).map_err(stage)?;
    let y = capture(cfg, &sim.y, 2).map_err(stage)?.relabel("y");
    io::write_signal(&out.join("y.csv"), &y)?;
    let p = sim.powers;
    let summary = json!({
        "p_out_avg": p.p_out_avg,
        "p_in_avg": p.p_in_avg,
        "p_dc_avg": p.p_dc_avg,
        "pae_avg": pae(p.p_out_avg, p.p_in_avg, p.p_dc_avg).map_err(stage)?,
        "z_ref_ohm": surface.z_ref,
        "delay_samples": delay,
    });
    io::write_json(&out.join("simulation.json"), &summary)?;
    print_json(&summary)
}

fn report(cfg: &ExperimentConfig, out: &Path, u_path: &Path, y_path: &Path) -> Result<()> {
    let u = io::read_signal(u_path)?;
    let y = io::read_signal(y_path)?;
    let stage = |e: Error| e.at_stage("report");
    let (ut, yt) = (trim(&u), trim(&y));
    let bw = cfg.channel_bw();
    let a = acpr(&yt, bw, bw * CHANNEL_SPACING_RATIO, cfg.spectrum()).map_err(stage)?;
    let gain = normalized_gain_curve(&ut, &yt, GAIN_BINS).map_err(stage)?;
    io::write_spectrum_csv(&out.join("spectrum.csv"), &power_spectrum(&yt, cfg.spectrum()).map_err(stage)?)?;
    io::write_gain_csv(&out.join("gain.csv"), &gain)?;

    let surface = cfg.load_surface().map_err(|e| e.at_stage("characterize"))?;
    let mut summary = json!({
        "config_hash": cfg.hash(),
        "nmse_db": nmse(&ut, &yt).map_err(stage)?,
        "acpr_low_db": a.lower_db,
        "acpr_high_db": a.upper_db,
        "gain_flatness": gain.flatness(),
        "phase_spread": phase_spread(&ut, &yt).map_err(stage)?,
        "p_out_avg": output_power(&y, surface.z_ref).map_err(stage)?,
    });
    let vc_path = out.join("vc.csv");
    if vc_path.exists() {
        let vc = io::read_control(&vc_path)?;
        let vc_bw = control_occupied_bandwidth(&vc, 0.95, cfg.spectrum()).map_err(stage)?;
        summary["vc_bandwidth_ratio"] = json!(vc_bw / bw);
    }
    let sim_path = out.join("simulation.json");
    if sim_path.exists() {
        let sim: serde_json::Value = io::read_json(&sim_path)?;
        summary["pae_avg"] = sim["pae_avg"].clone();
    } else {
        warn!("no simulation.json next to the output; PAE omitted");
    }
    io::write_json(&out.join("metrics.json"), &summary)?;
    print_json(&summary)
}

fn sweep_delay(cfg: &ExperimentConfig, out: &Path, delays: &[f64]) -> Result<()> {
    let rows = run_delay_sweep(cfg, delays)?;
    let path = out.join("delay_sweep.csv");
    let mut text = String::from("delay_samples,delay_chips,nmse_db,acpr_db\n");
    for r in &rows {
        text.push_str(&format!("{},{},{},{}\n", r.delay_samples, r.delay_chips, r.nmse_db, r.acpr_db));
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    print_json(&rows)
}

fn study_averaging(cfg: &ExperimentConfig, out: &Path, counts: &[usize]) -> Result<()> {
    let rows = run_averaging_study(cfg, counts)?;
    let path = out.join("averaging.csv");
    let mut text = String::from("n_averages,floor_dbc\n");
    for r in &rows {
        text.push_str(&format!("{},{}\n", r.n_averages, r.floor_dbc));
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    print_json(&rows)
}
