//! Dual-input dynamic-load-modulation transmitter toolkit.
//!
//! The pipeline runs from a quasi-static PA + matching-network
//! characterization, through extraction of an efficiency-optimal control
//! law, to synthesis and simulation of the RF drive and control voltage for
//! a high-PAR test signal, and finally the efficiency and linearity metrics.

pub mod capture;
pub mod delay;
pub mod error;
pub mod experiment;
pub mod extract;
pub mod fixtures;
pub mod io;
pub mod metrics;
pub mod poly;
pub mod signal;
pub mod smith;
pub mod surface;
pub mod synth;

pub use error::{Error, Result};
pub use signal::{ControlSignal, IqSignal};
pub use surface::QuasiStaticSurface;
