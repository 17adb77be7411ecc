//! Unit conversions at the library boundary.
//!
//! Everything inside the crate is angular (rad/s) and SI (s, W). Users
//! talk in cyclic MHz, dBm and ns; convert here and nowhere else.

use std::f64::consts::{PI, SQRT_2};

pub const TWO_PI: f64 = 2.0 * PI;

/// Ratio of the |1⟩↔|2⟩ to |0⟩↔|1⟩ coupling constants for a transmon,
/// which follows from Γ₂₁ ≈ 2Γ₁₀ and k ∝ √Γ.
pub const K21_OVER_K10: f64 = SQRT_2;

#[inline]
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TWO_PI * f_mhz * 1e6
}

#[inline]
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / (TWO_PI * 1e6)
}

#[inline]
pub fn ns_to_s(t_ns: f64) -> f64 {
    t_ns * 1e-9
}

#[inline]
pub fn s_to_ns(t: f64) -> f64 {
    t * 1e9
}

#[inline]
pub fn dbm_to_watts(p_dbm: f64) -> f64 {
    10f64.powf((p_dbm - 30.0) / 10.0)
}

#[inline]
pub fn watts_to_dbm(p: f64) -> f64 {
    10.0 * p.log10() + 30.0
}

/// Line power in dBm to an angular Rabi frequency.
///
/// The chip-level power is `p_dbm - attenuation_db`; `k·√P` is a cyclic
/// frequency in Hz, so the result carries the 2π.
pub fn dbm_to_rabi(p_dbm: f64, k: f64, attenuation_db: f64) -> f64 {
    let chip = dbm_to_watts(p_dbm - attenuation_db);
    TWO_PI * k * chip.sqrt()
}

/// Inverse of [`dbm_to_rabi`]. Zero Rabi frequency maps to `-inf` dBm.
pub fn rabi_to_dbm(rabi: f64, k: f64, attenuation_db: f64) -> f64 {
    let chip = (rabi / (TWO_PI * k)).powi(2);
    watts_to_dbm(chip) + attenuation_db
}

/// Control-tone power to Rabi frequency using `k21 = √2·k10`.
pub fn control_dbm_to_rabi(p_dbm: f64, k_10: f64, attenuation_db: f64) -> f64 {
    dbm_to_rabi(p_dbm, K21_OVER_K10 * k_10, attenuation_db)
}

pub fn control_rabi_to_dbm(rabi: f64, k_10: f64, attenuation_db: f64) -> f64 {
    rabi_to_dbm(rabi, K21_OVER_K10 * k_10, attenuation_db)
}
