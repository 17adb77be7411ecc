use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::time::trace::PulseTrace;

/// Residual-to-signal ratio above which a Gaussian no longer describes the
/// envelope and the peak-time estimate is reported instead.
pub const LOW_CONFIDENCE_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Clean,
    LowConfidence,
}

impl Confidence {
    pub fn as_str(&self) -> &'static str {
        match self {
            Confidence::Clean => "clean",
            Confidence::LowConfidence => "low_confidence",
        }
    }
}

/// `A·exp(−(t−t₀)²/2σ²) + B` fitted to `|envelope|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    pub center: f64,
    pub sigma: f64,
    pub offset: f64,
    /// `‖residual‖₂ / ‖|envelope|‖₂`.
    pub residual_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayEstimate {
    /// Reported delay: Gaussian-centre difference for clean fits, otherwise
    /// the difference of interpolated peak times.
    pub tau_d: f64,
    pub confidence: Confidence,
    pub residual_ratio: f64,
    pub fit_delay: f64,
    pub peak_delay: f64,
    pub reference: GaussianFit,
    pub output: GaussianFit,
}

fn argmax(v: &[f64]) -> usize {
    (0..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b })
}

/// Peak time with parabolic refinement through the three largest samples.
pub fn peak_time(trace: &PulseTrace) -> Result<f64> {
    let a = trace.abs();
    let i = argmax(&a);
    if !(a[i] > 0.0) {
        return Err(Error::FitDiverged("envelope is identically zero".into()));
    }
    let mut t = trace.time(i);
    if i > 0 && i + 1 < a.len() {
        let (l, c, r) = (a[i - 1], a[i], a[i + 1]);
        let curv = l - 2.0 * c + r;
        if curv < 0.0 {
            t += 0.5 * (l - r) / curv * trace.dt();
        }
    }
    Ok(t)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Least-squares Gaussian-plus-offset fit to the envelope magnitude.
pub fn fit_gaussian_envelope(trace: &PulseTrace) -> Result<GaussianFit> {
    let a = trace.abs();
    let n = a.len();
    let imax = argmax(&a);
    let peak = a[imax];
    if !(peak > 0.0) {
        return Err(Error::FitDiverged("envelope is identically zero".into()));
    }
    let edge = (n / 20).max(1);
    let b0 = median(a[..edge].iter().chain(&a[n - edge..]).copied().collect());
    let half = b0 + 0.5 * (peak - b0);
    let lo = (0..imax).rev().find(|&i| a[i] < half);
    let hi = (imax + 1..n).find(|&i| a[i] < half);
    let fwhm = match (lo, hi) {
        (Some(l), Some(h)) => (h - l) as f64 * trace.dt(),
        (Some(l), None) => 2.0 * (imax - l) as f64 * trace.dt(),
        (None, Some(h)) => 2.0 * (h - imax) as f64 * trace.dt(),
        (None, None) => 0.25 * n as f64 * trace.dt(),
    };
    let sigma0 = fwhm / 2.355;
    let tc = trace.time(imax);

    // dimensionless: amplitudes in units of the peak, times in units of sigma0
    let ts: Vec<f64> = (0..n).map(|i| (trace.time(i) - tc) / sigma0).collect();
    let ys: Vec<f64> = a.iter().map(|v| v / peak).collect();
    let model = |p: &[f64], t: f64| p[0] * (-0.5 * ((t - p[1]) / p[2]).powi(2)).exp() + p[3];
    let residuals = |p: &[f64]| ts.iter().zip(&ys).map(|(&t, &y)| model(p, t) - y).collect::<Vec<_>>();
    let x0 = [1.0 - b0 / peak, 0.0, 1.0, b0 / peak];
    let rep = levenberg_marquardt(residuals, &x0, &LmOptions::default())?;
    let p = &rep.x;
    if !rep.converged || !p.iter().all(|v| v.is_finite()) || p[2] == 0.0 {
        return Err(Error::FitDiverged("Gaussian envelope fit did not converge".into()));
    }
    let signal = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
    Ok(GaussianFit {
        amplitude: p[0] * peak,
        center: tc + p[1] * sigma0,
        sigma: p[2].abs() * sigma0,
        offset: p[3] * peak,
        residual_ratio: rep.residual_norm / signal,
    })
}

/// Delay of `output` relative to `reference` from their envelope peaks.
///
/// Envelopes that a single Gaussian does not describe (residual ratio above
/// [`LOW_CONFIDENCE_RATIO`]) are flagged and fall back to the peak-time
/// difference.
pub fn extract_delay(reference: &PulseTrace, output: &PulseTrace) -> Result<DelayEstimate> {
    let rf = fit_gaussian_envelope(reference)?;
    let of = fit_gaussian_envelope(output)?;
    let fit_delay = of.center - rf.center;
    let peak_delay = peak_time(output)? - peak_time(reference)?;
    let residual_ratio = rf.residual_ratio.max(of.residual_ratio);
    let (tau_d, confidence) = if residual_ratio > LOW_CONFIDENCE_RATIO {
        (peak_delay, Confidence::LowConfidence)
    } else {
        (fit_delay, Confidence::Clean)
    };
    Ok(DelayEstimate { tau_d, confidence, residual_ratio, fit_delay, peak_delay, reference: rf, output: of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::trace::gaussian_probe;
    use num_complex::Complex64;

    #[test]
    fn synthetic_shift() {
        let reference = gaussian_probe(1.0, 500e-9, 3e-6, 8e-6, 1e-9).unwrap();
        let shifted = gaussian_probe(0.7, 500e-9, 3.1e-6, 8e-6, 1e-9).unwrap();
        let est = extract_delay(&reference, &shifted).unwrap();
        assert_eq!(est.confidence, Confidence::Clean);
        assert!((est.tau_d - 100e-9).abs() < 0.1e-9, "{}", est.tau_d);
        assert!((est.output.amplitude - 0.7).abs() < 1e-9);
        assert!((est.output.sigma - 500e-9).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_offset_and_subsample_centre() {
        let t = PulseTrace::from_fn(0.0, 1e-9, 4000, 0.0, |t| {
            let x = (t - 1.8374e-6) / 250e-9;
            Complex64::from_polar(2.0 * (-0.5 * x * x).exp() + 0.05, 0.3)
        })
        .unwrap();
        let f = fit_gaussian_envelope(&t).unwrap();
        assert!((f.center - 1.8374e-6).abs() < 1e-13);
        assert!((f.offset - 0.05).abs() < 1e-9);
        assert!(f.residual_ratio < 1e-9);
    }

    #[test]
    fn advance_is_negative() {
        let reference = gaussian_probe(1.0, 1e-6, 6e-6, 12e-6, 1e-9).unwrap();
        let advanced = gaussian_probe(0.41, 1e-6, 6e-6 - 19.4e-9, 12e-6, 1e-9).unwrap();
        let est = extract_delay(&reference, &advanced).unwrap();
        assert!((est.tau_d + 19.4e-9).abs() < 0.1e-9);
    }

    #[test]
    fn double_peak_is_low_confidence() {
        let reference = gaussian_probe(1.0, 100e-9, 1e-6, 3e-6, 1e-9).unwrap();
        let two = PulseTrace::from_fn(0.0, 1e-9, 3000, 0.0, |t| {
            let g = |c: f64| (-0.5 * ((t - c) / 80e-9).powi(2)).exp();
            Complex64::new(g(1.0e-6) + 0.8 * g(1.6e-6), 0.0)
        })
        .unwrap();
        let est = extract_delay(&reference, &two).unwrap();
        assert_eq!(est.confidence, Confidence::LowConfidence);
        assert!(est.residual_ratio > LOW_CONFIDENCE_RATIO);
        assert!(est.tau_d.abs() < 2e-9);
    }

    #[test]
    fn zero_trace_refused() {
        let reference = gaussian_probe(1.0, 100e-9, 1e-6, 3e-6, 1e-9).unwrap();
        let zero = gaussian_probe(0.0, 100e-9, 1e-6, 3e-6, 1e-9).unwrap();
        assert!(matches!(extract_delay(&reference, &zero), Err(Error::FitDiverged(_))));
    }
}
