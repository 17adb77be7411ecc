//! Pulse propagation through the three-level atom and delay extraction from
//! output envelopes.

mod bloch;
mod extract;
mod narrowband;
mod trace;

pub use bloch::{input_output, integrate_bloch, simulate_output, BlochModel, BlochOptions, BlochState};
pub use extract::{
    extract_delay, fit_gaussian_envelope, peak_time, Confidence, DelayEstimate, GaussianFit, LOW_CONFIDENCE_RATIO,
};
pub use narrowband::{envelope_width, narrowband_output, NarrowbandOutput};
pub use trace::{gaussian_probe, gaussian_probe_truncated, PulseTrace};
