//! File formats.
//!
//! * Signals: CSV `index,i,q` plus a sidecar `<stem>.json` holding
//!   `{"sample_rate_hz", "label"}`.
//! * Control voltages: CSV `index,v` plus sidecar with `v_min`, `v_max` too.
//! * Load-pull surfaces: CSV `x_volt,vc_volt,y_volt,phase_rad,pdc_w,pin_w`,
//!   one row per grid cell, plus sidecar `{"z_ref_ohm", "label"}`.
//! * Trajectories, control laws and reports: JSON.
//!
//! Floats are written in shortest round-trip form, so write-then-read is exact.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::ControlLaw;
use crate::metrics::{GainCurve, Spectrum};
use crate::signal::{ControlSignal, IqSignal};
use crate::smith::{LoadTrajectory, TrajectoryPoint};
use crate::surface::QuasiStaticSurface;

pub const LOADPULL_HEADER: [&str; 6] = ["x_volt", "vc_volt", "y_volt", "phase_rad", "pdc_w", "pin_w"];

/// Sidecar path: the data path with its extension replaced by `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.into(),
        source: e,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct SignalSidecar {
    sample_rate_hz: f64,
    #[serde(default)]
    label: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct ControlSidecar {
    sample_rate_hz: f64,
    #[serde(default)]
    label: String,
    v_min: f64,
    v_max: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct SurfaceSidecar {
    z_ref_ohm: f64,
    #[serde(default)]
    label: String,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.into(),
            line,
            msg: format!("{other:?}"),
        },
    }
}

fn write_rows<const N: usize>(path: &Path, header: [&str; N], rows: impl Iterator<Item = [String; N]>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header).map_err(|e| csv_err(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a CSV whose header must contain `columns` (in any order) and
/// returns each row's values in that order, with its line number.
fn read_rows(path: &Path, columns: &[&str]) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let header = r.headers().map_err(|e| csv_err(path, e))?.clone();
    let index: Vec<usize> = columns
        .iter()
        .map(|c| {
            header.iter().position(|h| h == *c).ok_or_else(|| Error::Parse {
                path: path.into(),
                line: 1,
                msg: format!("missing column '{c}'"),
            })
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let values = index
            .iter()
            .zip(columns)
            .map(|(&k, name)| {
                let field = rec.get(k).unwrap_or("");
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => Ok(v),
                    _ => Err(Error::Parse {
                        path: path.into(),
                        line,
                        msg: format!("column '{name}': invalid value '{field}'"),
                    }),
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(rows)
}

pub fn write_signal(path: &Path, sig: &IqSignal) -> Result<()> {
    write_rows(
        path,
        ["index", "i", "q"],
        sig.samples
            .iter()
            .enumerate()
            .map(|(n, s)| [n.to_string(), s.re.to_string(), s.im.to_string()]),
    )?;
    write_json(
        &sidecar_path(path),
        &SignalSidecar {
            sample_rate_hz: sig.sample_rate,
            label: sig.label.clone(),
        },
    )
}

pub fn read_signal(path: &Path) -> Result<IqSignal> {
    let meta: SignalSidecar = read_json(&sidecar_path(path))?;
    let rows = read_rows(path, &["i", "q"])?;
    let samples = rows.iter().map(|(_, v)| Complex64::new(v[0], v[1])).collect();
    IqSignal::new(samples, meta.sample_rate_hz, meta.label).map_err(|e| Error::Parse {
        path: path.into(),
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_control(path: &Path, sig: &ControlSignal, label: &str) -> Result<()> {
    write_rows(
        path,
        ["index", "v"],
        sig.samples.iter().enumerate().map(|(n, v)| [n.to_string(), v.to_string()]),
    )?;
    write_json(
        &sidecar_path(path),
        &ControlSidecar {
            sample_rate_hz: sig.sample_rate,
            label: label.into(),
            v_min: sig.v_min,
            v_max: sig.v_max,
        },
    )
}

pub fn read_control(path: &Path) -> Result<ControlSignal> {
    let meta: ControlSidecar = read_json(&sidecar_path(path))?;
    let rows = read_rows(path, &["v"])?;
    ControlSignal::new(
        rows.iter().map(|(_, v)| v[0]).collect(),
        meta.sample_rate_hz,
        meta.v_min,
        meta.v_max,
    )
    .map_err(|e| Error::Parse {
        path: path.into(),
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_loadpull_csv(path: &Path, surface: &QuasiStaticSurface) -> Result<()> {
    let s = surface;
    let rows = (0..s.x_grid.len()).flat_map(|i| {
        (0..s.vc_grid.len()).map(move |j| {
            [
                s.x_grid[i].to_string(),
                s.vc_grid[j].to_string(),
                s.y_mag[i][j].to_string(),
                s.phase[i][j].to_string(),
                s.p_dc[i][j].to_string(),
                s.p_in[i][j].to_string(),
            ]
        })
    });
    write_rows(path, LOADPULL_HEADER, rows)?;
    write_json(
        &sidecar_path(path),
        &SurfaceSidecar {
            z_ref_ohm: s.z_ref,
            label: s.label.clone(),
        },
    )
}

/// Reads a rectangular load-pull grid. Rows may come in any order;
/// duplicated `(x, vc)` pairs, missing cells and invalid numbers are errors
/// naming the offending line. Without a sidecar, 50 Ω and the file stem
/// are assumed.
pub fn load_loadpull_csv(path: &Path) -> Result<QuasiStaticSurface> {
    let side = sidecar_path(path);
    let meta = if side.exists() {
        read_json::<SurfaceSidecar>(&side)?
    } else {
        warn!("{}: no sidecar, assuming 50 ohm", path.display());
        SurfaceSidecar {
            z_ref_ohm: 50.0,
            label: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
        }
    };
    let rows = read_rows(path, &LOADPULL_HEADER)?;
    let parse_err = |line: usize, msg: String| Error::Parse {
        path: path.into(),
        line,
        msg,
    };
    if rows.is_empty() {
        return Err(parse_err(1, "no data rows".into()));
    }
    // exact float keys: grid values must repeat bit-for-bit across rows
    let mut cells: HashMap<(u64, u64), (usize, [f64; 4])> = HashMap::new();
    let mut xs = BTreeMap::new();
    let mut vcs = BTreeMap::new();
    for (line, v) in &rows {
        let key = (v[0].to_bits(), v[1].to_bits());
        if let Some((first, _)) = cells.get(&key) {
            return Err(parse_err(
                *line,
                format!("duplicate grid point x={} V, vc={} V (first on line {first})", v[0], v[1]),
            ));
        }
        cells.insert(key, (*line, [v[2], v[3], v[4], v[5]]));
        xs.insert(OrdF64(v[0]), ());
        vcs.insert(OrdF64(v[1]), ());
    }
    let x_grid: Vec<f64> = xs.into_keys().map(|k| k.0).collect();
    let vc_grid: Vec<f64> = vcs.into_keys().map(|k| k.0).collect();
    if cells.len() != x_grid.len() * vc_grid.len() {
        return Err(parse_err(
            rows.last().map(|r| r.0).unwrap_or(1),
            format!(
                "non-rectangular grid: {} rows for {} drive x {} control levels",
                cells.len(),
                x_grid.len(),
                vc_grid.len()
            ),
        ));
    }
    let mut tables = [(); 4].map(|_| vec![vec![0.0; vc_grid.len()]; x_grid.len()]);
    for (i, &x) in x_grid.iter().enumerate() {
        for (j, &v) in vc_grid.iter().enumerate() {
            let (_, vals) = cells[&(x.to_bits(), v.to_bits())];
            for (t, val) in tables.iter_mut().zip(vals) {
                t[i][j] = val;
            }
        }
    }
    let [y, phase, pdc, pin] = tables;
    QuasiStaticSurface::new(x_grid, vc_grid, y, phase, pdc, pin, meta.z_ref_ohm, meta.label).map_err(|e| {
        parse_err(0, e.to_string())
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub fn write_trajectory(path: &Path, traj: &LoadTrajectory) -> Result<()> {
    write_json(path, traj)
}

pub fn read_trajectory(path: &Path) -> Result<LoadTrajectory> {
    let points: Vec<TrajectoryPoint> = read_json(path)?;
    LoadTrajectory::new(points).map_err(|e| Error::Parse {
        path: path.into(),
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_law(path: &Path, law: &ControlLaw) -> Result<()> {
    write_json(path, law)
}

pub fn read_law(path: &Path) -> Result<ControlLaw> {
    let law: ControlLaw = read_json(path)?;
    if !(law.u_max > 0.0) || law.v_min > law.v_max {
        return Err(Error::Parse {
            path: path.into(),
            line: 0,
            msg: "control law needs u_max > 0 and v_min <= v_max".into(),
        });
    }
    Ok(law)
}

pub fn write_spectrum_csv(path: &Path, spec: &Spectrum) -> Result<()> {
    let db = spec.psd_db_relative();
    write_rows(
        path,
        ["freq_hz", "psd_db"],
        spec.freq_hz.iter().zip(db).map(|(f, p)| [f.to_string(), p.to_string()]),
    )
}

pub fn write_gain_csv(path: &Path, curve: &GainCurve) -> Result<()> {
    write_rows(
        path,
        ["u_mag", "gain_norm"],
        curve.bins.iter().map(|b| [b.u_mag.to_string(), b.gain_norm.to_string()]),
    )
}
