use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::result::{param, FitResult};
use crate::freq::three_level_response;
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::params::AtomParams;
use crate::units::{control_dbm_to_rabi, control_rabi_to_dbm};

/// Weak-probe reflection over a (control power, probe detuning) grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoToneMap {
    /// Line-referred control power per row, dBm.
    pub control_dbm: Vec<f64>,
    pub detunings: Vec<f64>,
    /// Row-major, `values[row * detunings.len() + col]`.
    pub values: Vec<Complex64>,
    pub delta_c: f64,
}

impl TwoToneMap {
    pub fn new(control_dbm: Vec<f64>, detunings: Vec<f64>, values: Vec<Complex64>, delta_c: f64) -> Result<Self> {
        let expected = control_dbm.len() * detunings.len();
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, got: values.len() });
        }
        if control_dbm.iter().any(|p| p.is_nan()) || detunings.iter().any(|d| !d.is_finite()) || !delta_c.is_finite() {
            return Err(Error::invalid("two-tone grid must be finite"));
        }
        Ok(TwoToneMap { control_dbm, detunings, values, delta_c })
    }
}

/// Fit the dephasing rate `γ₂₀` of |2⟩ from a two-tone map, with the
/// |0⟩↔|1⟩ rates and `k_10` taken from `atom`.
///
/// Also reports `singular_control_dbm`, the predicted control power where
/// the resonant reflection vanishes.
pub fn fit_two_tone(map: &TwoToneMap, atom: &AtomParams, attenuation_db: f64) -> Result<FitResult> {
    if atom.k_10() <= 0.0 {
        return Err(Error::invalid("two-tone fit needs k_10 > 0 to convert control power"));
    }
    let omegas: Vec<f64> =
        map.control_dbm.iter().map(|p| control_dbm_to_rabi(*p, atom.k_10(), attenuation_db)).collect();
    if omegas.iter().all(|o| *o == 0.0) {
        return Err(Error::Underdetermined("no control drive in the map; gamma_20 does not enter".into()));
    }
    let (g, gm) = (atom.gamma_r_10(), atom.gamma_10());
    let nd = map.detunings.len();
    let residuals = |p: &[f64]| {
        let g20 = p[0].abs() * gm;
        let mut out = Vec::with_capacity(2 * map.values.len());
        for (row, &oc) in omegas.iter().enumerate() {
            for (col, &dp) in map.detunings.iter().enumerate() {
                let d = three_level_response(g, gm, g20, dp, oc, map.delta_c, 0.0) - map.values[row * nd + col];
                out.push(d.re);
                out.push(d.im);
            }
        }
        out
    };
    let cost = |x: f64| residuals(&[x]).iter().map(|v| v * v).sum::<f64>();
    let x0 = (0..=80)
        .map(|i| 0.05 * 1000f64.powf(i as f64 / 80.0))
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap();
    let rep = levenberg_marquardt(residuals, &[x0], &LmOptions::default())?;
    if !rep.converged {
        return Err(Error::NotConverged(rep.n_iter));
    }
    let g20 = rep.x[0].abs() * gm;
    let g20_err = rep.stderr[0] * gm;
    let mut params = vec![param("gamma_20", g20, g20_err)];
    if g > gm {
        let oc = 2.0 * (g20 * (g - gm)).sqrt();
        // P ∝ Ω² ∝ γ₂₀
        let err_db = 10.0 / std::f64::consts::LN_10 * g20_err / g20;
        params.push(param("singular_control_dbm", control_rabi_to_dbm(oc, atom.k_10(), attenuation_db), err_db));
    }
    Ok(FitResult::from_report(&rep, params))
}
