use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex probe or output envelope on a uniform time grid, in Rabi-frequency
/// scale (rad/s), in the frame rotating at the probe carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseTrace {
    t0_offset: f64,
    dt: f64,
    samples: Vec<Complex64>,
    carrier_detuning: f64,
}

impl PulseTrace {
    pub fn new(t0_offset: f64, dt: f64, samples: Vec<Complex64>, carrier_detuning: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::BadGrid(format!("dt must be > 0, got {dt}")));
        }
        if !t0_offset.is_finite() || !carrier_detuning.is_finite() {
            return Err(Error::invalid("trace offset and carrier detuning must be finite"));
        }
        if samples.len() < 2 {
            return Err(Error::InsufficientSamples { needed: 2, got: samples.len() });
        }
        if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(PulseTrace { t0_offset, dt, samples, carrier_detuning })
    }

    pub fn from_fn(
        t0_offset: f64,
        dt: f64,
        n: usize,
        carrier_detuning: f64,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let samples = (0..n).map(|i| f(t0_offset + i as f64 * dt)).collect();
        Self::new(t0_offset, dt, samples, carrier_detuning)
    }

    pub fn t0_offset(&self) -> f64 {
        self.t0_offset
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn carrier_detuning(&self) -> f64 {
        self.carrier_detuning
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0_offset + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    pub fn with_carrier_detuning(mut self, carrier_detuning: f64) -> Result<Self> {
        if !carrier_detuning.is_finite() {
            return Err(Error::invalid("carrier detuning must be finite"));
        }
        self.carrier_detuning = carrier_detuning;
        Ok(self)
    }

    /// Same grid, new samples.
    pub fn with_samples(&self, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: samples.len() });
        }
        Self::new(self.t0_offset, self.dt, samples, self.carrier_detuning)
    }

    /// Catmull–Rom interpolation between samples; zero outside the trace.
    pub fn sample_at(&self, t: f64) -> Complex64 {
        let n = self.samples.len();
        let x = (t - self.t0_offset) / self.dt;
        if !(x >= 0.0 && x <= (n - 1) as f64) {
            return Complex64::new(0.0, 0.0);
        }
        let nearest = x.round();
        if (x - nearest).abs() < 1e-9 {
            return self.samples[nearest as usize];
        }
        let i = (x.floor() as usize).min(n - 2);
        let u = x - i as f64;
        let s = &self.samples;
        let p0 = s[i.saturating_sub(1)];
        let p1 = s[i];
        let p2 = s[i + 1];
        let p3 = s[(i + 2).min(n - 1)];
        let u2 = u * u;
        let u3 = u2 * u;
        (p1 * 2.0 + (p2 - p0) * u + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2 + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3)
            * 0.5
    }
}

/// Gaussian envelope `amplitude·exp(−(t−t0)²/2σ²)` sampled on `[0, span)`.
///
/// Requires `dt < σ/10` and `t0 ≥ 5σ`.
pub fn gaussian_probe(amplitude: f64, sigma: f64, t0: f64, span: f64, dt: f64) -> Result<PulseTrace> {
    if t0 < 5.0 * sigma {
        return Err(Error::invalid(format!("pulse centre {t0:e} s is closer than 5σ to the trace start")));
    }
    gaussian_probe_truncated(amplitude, sigma, t0, span, dt)
}

/// [`gaussian_probe`] without the `t0 ≥ 5σ` guard.
pub fn gaussian_probe_truncated(amplitude: f64, sigma: f64, t0: f64, span: f64, dt: f64) -> Result<PulseTrace> {
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(Error::invalid(format!("amplitude must be finite and >= 0, got {amplitude}")));
    }
    if !(sigma.is_finite() && sigma > 0.0) || !t0.is_finite() {
        return Err(Error::invalid("sigma must be > 0 and t0 finite"));
    }
    if !(dt.is_finite() && dt > 0.0) || dt >= sigma / 10.0 {
        return Err(Error::BadGrid(format!("dt = {dt:e} s must be positive and below σ/10 = {:e} s", sigma / 10.0)));
    }
    if !(span.is_finite() && span > 0.0) {
        return Err(Error::BadGrid(format!("span must be > 0, got {span}")));
    }
    let n = ((span / dt) * (1.0 - 1e-12)).ceil() as usize;
    PulseTrace::from_fn(0.0, dt, n, 0.0, |t| {
        let x = (t - t0) / sigma;
        Complex64::new(amplitude * (-0.5 * x * x).exp(), 0.0)
    })
}
