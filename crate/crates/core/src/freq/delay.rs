use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use crate::error::{Error, Result};
use crate::freq::spectrum::ComplexSpectrum;
use crate::params::EffectiveRates;

/// Group delay of an effective two-level atom at probe detuning `delta`.
///
/// Positive values mean the reflected envelope is delayed, negative that it
/// is advanced.
pub fn group_delay_analytic(rates: &EffectiveRates, delta: f64) -> Result<f64> {
    let EffectiveRates { gamma_r, gamma, gamma_n } = *rates;
    let balance = gamma_r / 2.0 - gamma_n;
    let den = balance * balance + delta * delta;
    // exact cancellation is only reachable up to rounding of the rates
    let eps = 1e-12 * gamma_r.abs().max(gamma.abs());
    if den <= eps * eps {
        return Err(Error::Singular(format!(
            "Γ/2 = Γⁿ on resonance (Γ = {gamma_r:.6e}, Γⁿ = {gamma_n:.6e}); group delay undefined"
        )));
    }
    let x = delta / gamma;
    let lorentz = (gamma_r / gamma) / (1.0 + x * x);
    Ok(lorentz * (balance + delta * delta / gamma) / den)
}

/// Detunings `±√(γ(Γⁿ − Γ/2))` where the group delay changes sign.
///
/// Only exists in the fast-light regime `Γⁿ > Γ/2`.
pub fn zero_delay_boundary(rates: &EffectiveRates) -> Option<(f64, f64)> {
    let excess = rates.gamma_n - rates.gamma_r / 2.0;
    if excess > 0.0 && rates.gamma_r > 0.0 {
        let d = (rates.gamma * excess).sqrt();
        Some((-d, d))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayOptions {
    /// Accept spectra whose phase moves more than `max_phase_step` between samples.
    pub allow_coarse: bool,
    pub max_phase_step: f64,
    /// Half-width of a local quadratic least-squares window for noisy data.
    /// `None` uses plain three-point differences.
    pub smoothing_half_window: Option<usize>,
}

impl Default for DelayOptions {
    fn default() -> Self {
        DelayOptions { allow_coarse: false, max_phase_step: FRAC_PI_8, smoothing_half_window: None }
    }
}

impl DelayOptions {
    /// Settings for sweeps: never reject, flag unresolved cells instead.
    pub fn permissive() -> Self {
        DelayOptions { allow_coarse: true, ..Default::default() }
    }
}

/// Group delay profile of a spectrum. Masked cells hold a finite but
/// meaningless value.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayProfile {
    pub detunings: Vec<f64>,
    pub tau_d: Vec<f64>,
    pub singular_mask: Vec<bool>,
}

impl DelayProfile {
    pub fn len(&self) -> usize {
        self.tau_d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau_d.is_empty()
    }
}

pub fn group_delay_numeric(spectrum: &ComplexSpectrum) -> Result<DelayProfile> {
    group_delay_numeric_with(spectrum, &DelayOptions::default())
}

/// `τ_d = −d∠r/dω` from the unwrapped phase.
pub fn group_delay_numeric_with(spectrum: &ComplexSpectrum, opts: &DelayOptions) -> Result<DelayProfile> {
    let n = spectrum.len();
    if n < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: n });
    }
    let x = spectrum.detunings();
    let phi = spectrum.phase_unwrapped();
    let steps: Vec<f64> = phi.windows(2).map(|w| (w[1] - w[0]).abs()).collect();

    if !opts.allow_coarse {
        if let Some(i) = steps.iter().position(|&s| s > opts.max_phase_step) {
            return Err(Error::GridTooCoarse(format!(
                "phase moves {:.3} rad between detunings {:.6e} and {:.6e} rad/s (limit {:.3})",
                steps[i],
                x[i],
                x[i + 1],
                opts.max_phase_step
            )));
        }
    }

    let slope = match opts.smoothing_half_window {
        Some(m) if m >= 1 => local_quadratic_slope(x, phi, m),
        _ => three_point_slope(x, phi),
    };

    let peak = spectrum.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut tau_d = Vec::with_capacity(n);
    let mut singular_mask = Vec::with_capacity(n);
    for i in 0..n {
        let t = -slope[i];
        let vanishing = spectrum.values()[i].norm() <= 1e-12 * peak;
        let unresolved = (i > 0 && steps[i - 1] > FRAC_PI_2) || (i + 1 < n && steps[i] > FRAC_PI_2);
        let bad = !t.is_finite() || vanishing || unresolved;
        singular_mask.push(bad);
        tau_d.push(if t.is_finite() { t } else { 0.0 });
    }
    Ok(DelayProfile { detunings: x.to_vec(), tau_d, singular_mask })
}

/// Second-order differences on a possibly non-uniform grid, one-sided at the ends.
fn three_point_slope(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        out[i] = (hl * hl * y[i + 1] - hr * hr * y[i - 1] + (hr * hr - hl * hl) * y[i]) / (hl * hr * (hl + hr));
    }
    out[0] = one_sided(x[0], x[1], x[2], y[0], y[1], y[2]);
    out[n - 1] = one_sided(x[n - 1], x[n - 2], x[n - 3], y[n - 1], y[n - 2], y[n - 3]);
    out
}

/// Derivative at `x0` of the parabola through three points.
fn one_sided(x0: f64, x1: f64, x2: f64, y0: f64, y1: f64, y2: f64) -> f64 {
    let a = x1 - x0;
    let b = x2 - x0;
    // p(t) = y0 + c1 t + c2 t², t = x − x0
    let c2 = ((y2 - y0) / b - (y1 - y0) / a) / (b - a);
    (y1 - y0) / a - c2 * a
}

/// Slope of a least-squares parabola over `[i−m, i+m]` (clipped at the edges).
fn local_quadratic_slope(x: &[f64], y: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(m);
            let hi = (i + m).min(n - 1);
            let (lo, hi) = if hi - lo < 2 { (lo.min(n - 3), (lo.min(n - 3)) + 2) } else { (lo, hi) };
            let scale = (x[hi] - x[lo]).abs().max(f64::MIN_POSITIVE);
            let mut s = [0.0f64; 5];
            let mut b = [0.0f64; 3];
            for k in lo..=hi {
                let t = (x[k] - x[i]) / scale;
                let mut p = 1.0;
                for sj in s.iter_mut() {
                    *sj += p;
                    p *= t;
                }
                b[0] += y[k];
                b[1] += y[k] * t;
                b[2] += y[k] * t * t;
            }
            let m3 = nalgebra::Matrix3::new(s[0], s[1], s[2], s[1], s[2], s[3], s[2], s[3], s[4]);
            let rhs = nalgebra::Vector3::new(b[0], b[1], b[2]);
            match m3.lu().solve(&rhs) {
                Some(c) => c[1] / scale,
                None => f64::NAN,
            }
        })
        .collect()
}
