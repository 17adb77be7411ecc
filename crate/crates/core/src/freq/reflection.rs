use num_complex::Complex64;

use crate::params::{AtomParams, EffectiveRates};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Weak-probe reflection of an effective two-level atom, `1 − Γ/(γ + iδ)`.
pub fn reflection_two_level(rates: &EffectiveRates, delta: f64) -> Complex64 {
    if rates.gamma_r == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    1.0 - rates.gamma_r / Complex64::new(rates.gamma, delta)
}

/// Weak-probe reflection of the bare |0⟩↔|1⟩ transition.
pub fn reflection_weak(atom: &AtomParams, delta: f64) -> Complex64 {
    reflection_two_level(&EffectiveRates::from(atom), delta)
}

/// Reflection including probe saturation at Rabi frequency `omega_p`.
pub fn reflection_powered(atom: &AtomParams, delta: f64, omega_p: f64) -> Complex64 {
    let g = atom.gamma_r_10();
    let gamma = atom.gamma_10();
    if g == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // Γ²(γ − iδ) / (Γ(γ² + δ²) + γΩ²), the saturated form cleared of fractions.
    let num = g * g * Complex64::new(gamma, -delta);
    let den = g * (gamma * gamma + delta * delta) + gamma * omega_p * omega_p;
    1.0 - num / den
}

/// Envelope transfer function `T(iω_e)` of the probe with a CW control tone.
///
/// `omega_e` is the offset of an envelope spectral component from the
/// probe carrier. `T(0)` is the two-tone reflection coefficient.
pub fn transfer_function(
    atom: &AtomParams,
    delta_p: f64,
    omega_c: f64,
    delta_c: f64,
    omega_e: f64,
) -> Complex64 {
    three_level_response(atom.gamma_r_10(), atom.gamma_10(), atom.gamma_20(), delta_p, omega_c, delta_c, omega_e)
}

/// [`transfer_function`] with the rates passed explicitly, so fits can probe
/// values outside the physically closed parameter set.
pub(crate) fn three_level_response(
    gamma_r_10: f64,
    gamma_10: f64,
    gamma_20: f64,
    delta_p: f64,
    omega_c: f64,
    delta_c: f64,
    omega_e: f64,
) -> Complex64 {
    if gamma_r_10 == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let s = I * omega_e;
    let mut den = s + I * delta_p + gamma_10;
    if omega_c != 0.0 {
        den += omega_c * omega_c / (4.0 * (s + I * (delta_p + delta_c) + gamma_20));
    }
    1.0 - gamma_r_10 / den
}

/// Weak-probe reflection with a control tone of Rabi frequency `omega_c`
/// detuned by `delta_c` from the |1⟩↔|2⟩ transition.
pub fn reflection_two_tone(atom: &AtomParams, delta_p: f64, omega_c: f64, delta_c: f64) -> Complex64 {
    transfer_function(atom, delta_p, omega_c, delta_c, 0.0)
}
