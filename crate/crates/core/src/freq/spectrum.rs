use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::TWO_PI;

/// Complex reflection sampled on a strictly increasing detuning axis (rad/s).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    detunings: Vec<f64>,
    values: Vec<Complex64>,
    phase_unwrapped: Vec<f64>,
}

impl ComplexSpectrum {
    pub fn new(detunings: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if detunings.len() != values.len() {
            return Err(Error::LengthMismatch { expected: detunings.len(), got: values.len() });
        }
        if detunings.iter().any(|d| !d.is_finite()) || values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::invalid("spectrum contains non-finite samples"));
        }
        if let Some(w) = detunings.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!("detunings must be strictly increasing (index {})", w + 1)));
        }
        let phases: Vec<f64> = values.iter().map(|v| v.arg()).collect();
        let phase_unwrapped = unwrap_phase(&phases);
        Ok(ComplexSpectrum { detunings, values, phase_unwrapped })
    }

    /// Sample `f` on the given detunings.
    pub fn from_fn(detunings: Vec<f64>, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = detunings.iter().map(|&d| f(d)).collect();
        Self::new(detunings, values)
    }

    pub fn detunings(&self) -> &[f64] {
        &self.detunings
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn phase_unwrapped(&self) -> &[f64] {
        &self.phase_unwrapped
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Remove a linear phase `exp(−iωτ)` such as a cable delay `tau` (s).
    ///
    /// `reference` is the axis value where the correction is zero.
    pub fn remove_linear_phase(&self, tau: f64, reference: f64) -> Self {
        let values = self
            .detunings
            .iter()
            .zip(&self.values)
            .map(|(&d, &v)| v * Complex64::from_polar(1.0, (d - reference) * tau))
            .collect();
        Self::new(self.detunings.clone(), values).expect("rotation keeps samples finite")
    }
}

/// Standard ±π branch correction: adjacent unwrapped phases differ by at most π.
pub fn unwrap_phase(phases: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(phases.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in phases {
        if let Some(q) = prev {
            let mut step = p - q;
            while step > PI {
                step -= TWO_PI;
                offset -= TWO_PI;
            }
            while step < -PI {
                step += TWO_PI;
                offset += TWO_PI;
            }
        }
        out.push(p + offset);
        prev = Some(p);
    }
    out
}

/// `n` points evenly spaced on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}
