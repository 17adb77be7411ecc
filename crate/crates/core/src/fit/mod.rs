//! Recover atom parameters from spectra: circle fit, weak-probe line fit,
//! power dependence and two-tone maps.

mod circle;
mod power;
mod result;
mod spectrum_fit;
mod two_tone;

pub use circle::{circle_fit, CircleFit};
pub use power::{fit_power_dependence, PowerPin};
pub use result::{FitParam, FitResult};
pub use spectrum_fit::{fit_weak_spectrum, fit_weak_spectrum_with};
pub use two_tone::{fit_two_tone, TwoToneMap};
