//! Noise modeling for Rydberg-atom microwave receivers.
//!
//! The crate computes electric-field sensitivities (noise-equivalent field,
//! NEF) and input-referred noise temperatures (NET) of atomic microwave
//! receivers in free-space and port-coupled configurations:
//!
//! - [`noisequanta`] — thermal/vacuum noise quanta, extrinsic free-space NEF
//!   and NEF ↔ noise-temperature conversion,
//! - [`pattern`] — reception pattern and effective gain of an extended
//!   atomic ensemble,
//! - [`homodel`] — single-mode harmonic-oscillator model of a port-coupled
//!   resonator with optimal-coupling design rules,
//! - [`wgmodel`] — spatially resolved 1-D waveguide noise transport,
//! - [`geometry`] — mode constants and losses of concrete structures,
//! - [`optics`] — probe-readout NEF limits,
//! - [`lindblad`] — four-level master-equation model of the EIT readout and
//!   its shot-noise-limited sensitivity,
//! - [`survey`] — frequency sweeps comparing cavity-enhanced receivers
//!   against published LNAs.

pub mod constants;
pub mod error;
pub mod geometry;
pub mod homodel;
pub mod lindblad;
pub mod noisequanta;
pub mod numerics;
pub mod optics;
pub mod pattern;
pub mod survey;
pub mod wgmodel;

pub use error::{Error, Result};
pub use noisequanta::{AntennaGain, DetectionMode, NoiseEnvironment};
