//! Simulation library for a tri-antenna phase-shift precision landing system.
//!
//! A drone carries three receive antennas on an equilateral triangle. The
//! landing point (LP) radiates a continuous tone; pairwise phase differences
//! between the antennas steer the drone over the LP with simple bang-bang
//! maneuvers. The modules follow the signal chain:
//!
//! - [`geometry`]: antenna layout, exact path differences and phase shifts.
//! - [`rf_link`]: received amplitudes (spreading, gains, polarization ripple).
//! - [`detection`]: phase-detector transfer, ADC quantization, averaging.
//! - [`design`]: tracking-boundary solver and array design curves.
//! - [`guidance`]: calibration zeroing, LOCK test, sector classification.
//! - [`sim`]: closed-loop landing episodes and batches.
//! - [`scenario`]: TOML scenario files.
//! - [`cli`]: command-line front end.

pub mod cli;
pub mod design;
pub mod detection;
pub mod error;
pub mod format;
pub mod geometry;
pub mod guidance;
pub mod rf_link;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};

/// Version of the on-disk formats (CSV headers, scenario keys, JSON records).
pub const FORMAT_VERSION: u32 = 1;
