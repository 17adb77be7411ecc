use num_complex::Complex64;

use crate::error::Result;
use crate::freq::{group_delay_analytic, reflection_two_tone};
use crate::params::{effective_rates, AtomParams};
use crate::time::trace::PulseTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct NarrowbandOutput {
    pub trace: PulseTrace,
    pub r: Complex64,
    pub tau_d: f64,
    /// Envelope RMS width (amplitude weighted) in seconds.
    pub sigma_estimate: f64,
    /// Set when the pulse is shorter than the effective coherence time
    /// `1/γ`, where the delayed-copy picture breaks down.
    pub broadband_warning: bool,
}

/// Amplitude-weighted RMS width of an envelope; equals σ for a Gaussian.
pub fn envelope_width(trace: &PulseTrace) -> f64 {
    let w = trace.abs();
    let total: f64 = w.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mean = w.iter().enumerate().map(|(i, a)| a * trace.time(i)).sum::<f64>() / total;
    let var = w.iter().enumerate().map(|(i, a)| a * (trace.time(i) - mean).powi(2)).sum::<f64>() / total;
    var.sqrt()
}

/// Delayed, rescaled copy `r·Ω_p(t − τ_d)` of the probe, with `r` and `τ_d`
/// evaluated at the probe carrier detuning and a resonant control tone of
/// Rabi frequency `omega_c`.
pub fn narrowband_output(atom: &AtomParams, probe: &PulseTrace, omega_c: f64) -> Result<NarrowbandOutput> {
    let dp = probe.carrier_detuning();
    let rates = effective_rates(atom, omega_c)?;
    let tau_d = group_delay_analytic(&rates, dp)?;
    let r = reflection_two_tone(atom, dp, omega_c, 0.0);
    let samples = (0..probe.len()).map(|i| r * probe.sample_at(probe.time(i) - tau_d)).collect();
    let trace = probe.with_samples(samples)?;
    let sigma_estimate = envelope_width(probe);
    Ok(NarrowbandOutput { trace, r, tau_d, sigma_estimate, broadband_warning: sigma_estimate * rates.gamma < 1.0 })
}
