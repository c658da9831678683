use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty signal")]
    EmptySignal,

    #[error("zero average power")]
    ZeroPower,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("sample rate mismatch: {left} Hz vs {right} Hz")]
    SampleRateMismatch { left: f64, right: f64 },

    #[error("delay of {delay} samples out of range (|delay| must be below {limit})")]
    DelayOutOfRange { delay: f64, limit: f64 },

    #[error("no alignment found (peak correlation {peak:.3})")]
    NoAlignment { peak: f64 },

    #[error("drive beyond characterized range: |x| = {x_mag} V, limit {limit} V")]
    DriveOutOfRange { x_mag: f64, limit: f64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid surface: {0}")]
    InvalidSurface(String),

    #[error("insufficient points: need {needed}, have {have}")]
    InsufficientPoints { needed: usize, have: usize },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("non-quasi-static phase (residual spread {spread:.3} rad)")]
    NonQuasiStaticPhase { spread: f64 },

    #[error("{saturated} of {total} samples saturated, above the {limit_pct}% limit")]
    Saturation {
        saturated: usize,
        total: usize,
        limit_pct: f64,
    },

    #[error("pdf mass outside curve domain (power {power} W beyond [{lo}, {hi}] W)")]
    PdfOutsideCurve { power: f64, lo: f64, hi: f64 },

    #[error("signal too short: {len} samples, need at least {needed}")]
    TooShort { len: usize, needed: usize },

    #[error("band edge {edge} Hz exceeds Nyquist {nyquist} Hz")]
    BeyondNyquist { edge: f64, nyquist: f64 },

    #[error("unreachable PAR {target} dB after code-mix search (closest {achieved:.2} dB)")]
    UnreachablePar { target: f64, achieved: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error on {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn at_stage(self, stage: &'static str) -> Self {
        match self {
            Error::Stage { .. } => self,
            other => Error::Stage {
                stage,
                source: Box::new(other),
            },
        }
    }

    /// True for errors caused by the caller's configuration or input files
    /// rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_)
            | Error::Parse { .. }
            | Error::Io { .. }
            | Error::Json { .. }
            | Error::InvalidArgument(_) => true,
            Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
