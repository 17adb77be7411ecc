//! Closed-form reflection, group delay and 2D sweeps.

mod delay;
mod features;
mod reflection;
mod spectrum;
mod sweep;

pub use delay::{
    group_delay_analytic, group_delay_numeric, group_delay_numeric_with, zero_delay_boundary, DelayOptions,
    DelayProfile,
};
pub use features::{features, Features};
pub(crate) use reflection::three_level_response;
pub use reflection::{reflection_powered, reflection_two_level, reflection_two_tone, reflection_weak, transfer_function};
pub use spectrum::{linspace, unwrap_phase, ComplexSpectrum};
pub use sweep::{sweep_map, SweepAxis, SweepCell, SweepMap, TransitionRow};
