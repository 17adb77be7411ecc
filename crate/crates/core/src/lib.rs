//! Reflection spectra, group delay and pulse propagation for a single
//! artificial atom terminating a waveguide.
//!
//! Internal units are SI with angular frequencies (rad/s). Conversions from
//! cyclic MHz, dBm and ns live in [`units`].

pub mod config;
pub mod devices;
pub mod error;
pub mod fit;
pub mod freq;
pub mod io;
pub mod ode;
pub mod optim;
pub mod params;
pub mod time;
pub mod units;

pub use error::{Error, Result};
pub use params::{AtomParams, DriveSpec, EffectiveRates, GaussianEnvelope, LineCalibration};
