//! Device parameters and the effective-rate algebra of the control pump.

use serde::Serialize;

use crate::error::{Error, Result};

const CLOSURE_RTOL: f64 = 1e-9;

/// Rates and couplings of one artificial atom. All rates are angular (rad/s).
///
/// Construct through [`AtomParams::builder`]; the builder closes
/// `γ₁₀ = Γ₁₀/2 + Γⁿ₁₀` and `γ₂₀ = Γ₂₁/2 + Γⁿ₂₀` so the stored values are
/// always consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AtomParams {
    omega_10: f64,
    gamma_r_10: f64,
    gamma_10: f64,
    gamma_n_10: f64,
    k_10: f64,
    gamma_r_21: f64,
    gamma_20: f64,
    gamma_n_20: f64,
    gamma_21: f64,
}

impl AtomParams {
    pub fn builder() -> AtomParamsBuilder {
        AtomParamsBuilder::default()
    }

    /// |0⟩↔|1⟩ transition frequency.
    pub fn omega_10(&self) -> f64 {
        self.omega_10
    }
    /// Radiative decay Γ₁₀ into the waveguide.
    pub fn gamma_r_10(&self) -> f64 {
        self.gamma_r_10
    }
    /// Decoherence γ₁₀ (resonance half-width).
    pub fn gamma_10(&self) -> f64 {
        self.gamma_10
    }
    /// Non-radiative rate Γⁿ₁₀ (pure dephasing plus intrinsic loss).
    pub fn gamma_n_10(&self) -> f64 {
        self.gamma_n_10
    }
    /// Probe coupling, Hz/√W (cyclic).
    pub fn k_10(&self) -> f64 {
        self.k_10
    }
    /// Γ₂₁, decay |2⟩→|1⟩.
    pub fn gamma_r_21(&self) -> f64 {
        self.gamma_r_21
    }
    /// γ₂₀, |0⟩↔|2⟩ decoherence.
    pub fn gamma_20(&self) -> f64 {
        self.gamma_20
    }
    pub fn gamma_n_20(&self) -> f64 {
        self.gamma_n_20
    }
    /// γ₂₁, |1⟩↔|2⟩ decoherence.
    pub fn gamma_21(&self) -> f64 {
        self.gamma_21
    }

    /// Same device with a different |0⟩↔|1⟩ transition (frequency, Γ₁₀, γ₁₀).
    ///
    /// Used when sweeping the atom frequency through a table of measured
    /// rates. The upper-level rates keep their values.
    pub fn with_transition(&self, omega_10: f64, gamma_r_10: f64, gamma_10: f64) -> Result<Self> {
        AtomParams::builder()
            .omega_10(omega_10)
            .gamma_r_10(gamma_r_10)
            .gamma_10(gamma_10)
            .k_10(self.k_10)
            .gamma_r_21(self.gamma_r_21)
            .gamma_20(self.gamma_20)
            .gamma_21(self.gamma_21)
            .build()
    }
}

#[derive(Debug, Clone, Default)]
pub struct AtomParamsBuilder {
    omega_10: Option<f64>,
    gamma_r_10: Option<f64>,
    gamma_10: Option<f64>,
    gamma_n_10: Option<f64>,
    k_10: Option<f64>,
    gamma_r_21: Option<f64>,
    gamma_20: Option<f64>,
    gamma_n_20: Option<f64>,
    gamma_21: Option<f64>,
}

macro_rules! setter {
    ($($name:ident),*) => {
        $(
            pub fn $name(mut self, value: f64) -> Self {
                self.$name = Some(value);
                self
            }
        )*
    };
}

impl AtomParamsBuilder {
    setter!(omega_10, gamma_r_10, gamma_10, gamma_n_10, k_10, gamma_r_21, gamma_20, gamma_n_20, gamma_21);

    pub fn build(self) -> Result<AtomParams> {
        let omega_10 = self.omega_10.ok_or_else(|| Error::invalid("omega_10 is required"))?;
        if !(omega_10.is_finite() && omega_10 > 0.0) {
            return Err(Error::invalid(format!("omega_10 must be positive, got {omega_10}")));
        }

        let (gamma_r_10, gamma_10, gamma_n_10) =
            close_triple("10", self.gamma_r_10, self.gamma_10, self.gamma_n_10)?;

        let gamma_r_21 = self.gamma_r_21.unwrap_or(2.0 * gamma_r_10);
        let (gamma_r_21, gamma_20, gamma_n_20) = match (self.gamma_20, self.gamma_n_20) {
            (None, None) => (gamma_r_21, gamma_r_21 / 2.0, 0.0),
            (g20, gn20) => close_triple("20", Some(gamma_r_21), g20, gn20)?,
        };
        let gamma_21 = self.gamma_21.unwrap_or((gamma_r_10 + gamma_r_21) / 2.0);
        let k_10 = self.k_10.unwrap_or(0.0);

        let all = [
            ("gamma_r_10", gamma_r_10),
            ("gamma_10", gamma_10),
            ("gamma_n_10", gamma_n_10),
            ("k_10", k_10),
            ("gamma_r_21", gamma_r_21),
            ("gamma_20", gamma_20),
            ("gamma_n_20", gamma_n_20),
            ("gamma_21", gamma_21),
        ];
        for (name, v) in all {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }

        Ok(AtomParams {
            omega_10,
            gamma_r_10,
            gamma_10,
            gamma_n_10,
            k_10,
            gamma_r_21,
            gamma_20,
            gamma_n_20,
            gamma_21,
        })
    }
}

/// Closes `γ = Γ/2 + Γⁿ` from any two of the three.
fn close_triple(
    label: &str,
    radiative: Option<f64>,
    total: Option<f64>,
    nonradiative: Option<f64>,
) -> Result<(f64, f64, f64)> {
    match (radiative, total, nonradiative) {
        (Some(r), Some(t), None) => Ok((r, t, t - r / 2.0)),
        (Some(r), None, Some(n)) => Ok((r, r / 2.0 + n, n)),
        (None, Some(t), Some(n)) => Ok((2.0 * (t - n), t, n)),
        (Some(r), Some(t), Some(n)) => {
            let scale = r.abs().max(t.abs()).max(n.abs());
            if (t - r / 2.0 - n).abs() > CLOSURE_RTOL * scale {
                return Err(Error::invalid(format!(
                    "inconsistent rates for {label}: total {t} != radiative/2 {} + non-radiative {n}",
                    r / 2.0
                )));
            }
            Ok((r, r / 2.0 + n, n))
        }
        _ => Err(Error::invalid(format!(
            "need two of (radiative, decoherence, non-radiative) rates for transition {label}"
        ))),
    }
}

/// Rates of the effective two-level atom seen by a weak probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveRates {
    pub gamma_r: f64,
    pub gamma: f64,
    pub gamma_n: f64,
}

impl EffectiveRates {
    pub fn new(gamma_r: f64, gamma: f64) -> Self {
        EffectiveRates { gamma_r, gamma, gamma_n: gamma - gamma_r / 2.0 }
    }
}

impl From<&AtomParams> for EffectiveRates {
    fn from(atom: &AtomParams) -> Self {
        EffectiveRates::new(atom.gamma_r_10, atom.gamma_10)
    }
}

/// Dress the |0⟩↔|1⟩ rates with a resonant control tone on |1⟩↔|2⟩.
///
/// Only meaningful below the Autler–Townes threshold `Ω_c < 2γ₂₀`.
pub fn effective_rates(atom: &AtomParams, omega_c: f64) -> Result<EffectiveRates> {
    if !(omega_c >= 0.0) {
        return Err(Error::invalid(format!("control Rabi frequency must be >= 0, got {omega_c}")));
    }
    if omega_c == 0.0 {
        return Ok(EffectiveRates::from(atom));
    }
    let threshold = ats_threshold_rabi(atom);
    if omega_c >= threshold {
        return Err(Error::Domain(format!(
            "control Rabi {omega_c:.6e} rad/s at or above the Autler-Townes threshold 2*gamma_20 = {threshold:.6e} rad/s"
        )));
    }
    let denom = 1.0 - (omega_c / threshold).powi(2);
    let gamma_r = atom.gamma_r_10 / denom;
    let gamma = atom.gamma_10 * (1.0 + omega_c * omega_c / (4.0 * atom.gamma_10 * atom.gamma_20)) / denom;
    Ok(EffectiveRates::new(gamma_r, gamma))
}

/// Control Rabi frequency at which `Γ/2 = Γⁿ`, i.e. the resonant reflection vanishes.
pub fn singular_control_rabi(atom: &AtomParams) -> Result<f64> {
    let excess = atom.gamma_r_10 - atom.gamma_10;
    if excess <= 0.0 {
        return Err(Error::NoSolution(format!(
            "gamma_r_10 ({:.6e}) must exceed gamma_10 ({:.6e}) for a singular control drive",
            atom.gamma_r_10, atom.gamma_10
        )));
    }
    Ok(2.0 * (atom.gamma_20 * excess).sqrt())
}

/// `Ω_c = 2γ₂₀`, where the dressed states separate and the two-level picture fails.
pub fn ats_threshold_rabi(atom: &AtomParams) -> f64 {
    2.0 * atom.gamma_20
}

/// Probe Rabi frequency that saturates the atom to `r = 0` on resonance:
/// `Ω_p² = Γ₁₀(Γ₁₀ − γ₁₀)`.
pub fn singular_probe_rabi(atom: &AtomParams) -> Result<f64> {
    let excess = atom.gamma_r_10 - atom.gamma_10;
    if excess <= 0.0 {
        return Err(Error::NoSolution(
            "resonant reflection never vanishes under probe saturation when gamma_r_10 <= gamma_10".into(),
        ));
    }
    Ok((atom.gamma_r_10 * excess).sqrt())
}

/// Gaussian time envelope `exp(−(t−t0)²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianEnvelope {
    pub sigma: f64,
    pub t0: f64,
}

impl GaussianEnvelope {
    pub fn at(&self, t: f64) -> f64 {
        let x = (t - self.t0) / self.sigma;
        (-0.5 * x * x).exp()
    }
}

/// A probe or control tone in the frame rotating at its carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveSpec {
    /// Peak angular Rabi frequency.
    pub rabi: f64,
    /// Carrier detuning from the addressed transition.
    pub detuning: f64,
    pub envelope: Option<GaussianEnvelope>,
}

impl DriveSpec {
    pub fn cw(rabi: f64, detuning: f64) -> Result<Self> {
        DriveSpec { rabi, detuning, envelope: None }.validated()
    }

    pub fn off() -> Self {
        DriveSpec { rabi: 0.0, detuning: 0.0, envelope: None }
    }

    pub fn pulsed(rabi: f64, detuning: f64, sigma: f64, t0: f64) -> Result<Self> {
        DriveSpec { rabi, detuning, envelope: Some(GaussianEnvelope { sigma, t0 }) }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.rabi.is_finite() && self.rabi >= 0.0) {
            return Err(Error::invalid(format!("Rabi frequency must be finite and >= 0, got {}", self.rabi)));
        }
        if !self.detuning.is_finite() {
            return Err(Error::invalid("detuning must be finite"));
        }
        if let Some(env) = self.envelope {
            if !(env.sigma.is_finite() && env.sigma > 0.0) {
                return Err(Error::invalid(format!("envelope sigma must be > 0, got {}", env.sigma)));
            }
        }
        Ok(self)
    }

    /// Instantaneous Rabi frequency.
    pub fn rabi_at(&self, t: f64) -> f64 {
        match self.envelope {
            Some(env) => self.rabi * env.at(t),
            None => self.rabi,
        }
    }
}

/// Effective attenuation and gain of one measurement chain, in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineCalibration {
    pub attenuation_db: f64,
    pub gain_db: f64,
}

impl LineCalibration {
    pub const FREQUENCY_DOMAIN: LineCalibration = LineCalibration { attenuation_db: 132.3, gain_db: 60.6 };
    pub const TIME_DOMAIN: LineCalibration = LineCalibration { attenuation_db: 143.7, gain_db: 101.4 };

    pub fn new(attenuation_db: f64, gain_db: f64) -> Result<Self> {
        if !attenuation_db.is_finite() || !gain_db.is_finite() {
            return Err(Error::invalid("line calibration must be finite"));
        }
        Ok(LineCalibration { attenuation_db, gain_db })
    }
}
