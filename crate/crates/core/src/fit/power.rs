use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::result::{param, FitResult};
use crate::optim::{levenberg_marquardt, LmOptions};
use crate::units::{dbm_to_watts, TWO_PI};

/// One calibration quantity must be known: `k₁₀` and the line attenuation
/// only enter through `k₁₀·10^(−A/20)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerPin {
    Attenuation(f64),
    Coupling(f64),
}

impl PowerPin {
    /// Build from two optional values; exactly one must be present.
    pub fn from_options(k_10: Option<f64>, attenuation_db: Option<f64>) -> Result<Self> {
        match (k_10, attenuation_db) {
            (None, Some(a)) => Ok(PowerPin::Attenuation(a)),
            (Some(k), None) => Ok(PowerPin::Coupling(k)),
            (None, None) => Err(Error::Underdetermined(
                "k_10 and attenuation are only identifiable as a product; pin one of them".into(),
            )),
            (Some(_), Some(_)) => Err(Error::invalid("both k_10 and attenuation pinned: nothing to fit")),
        }
    }
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    Some(v[v.len() / 2])
}

/// Fit resonant reflection versus line power to the saturated two-level
/// response, recovering `k_10` or the attenuation, whichever is not pinned.
///
/// Also reports `singular_power_dbm`, the line power where the resonant
/// reflection vanishes, when `Γ₁₀ > γ₁₀`.
pub fn fit_power_dependence(points: &[(f64, Complex64)], gamma_r_10: f64, gamma_10: f64, pin: PowerPin) -> Result<FitResult> {
    if points.len() < 6 {
        return Err(Error::InsufficientSamples { needed: 6, got: points.len() });
    }
    if !(gamma_r_10 > 0.0 && gamma_10 > 0.0) {
        return Err(Error::invalid("power fit needs positive gamma_r_10 and gamma_10"));
    }
    if points.iter().any(|(p, r)| !p.is_finite() || !r.re.is_finite() || !r.im.is_finite()) {
        return Err(Error::invalid("power points must be finite"));
    }
    let (g, gm) = (gamma_r_10, gamma_10);
    // r = 1 − (Γ/γ)/(1 + s) with saturation s = Ω²/(Γγ)
    let saturation = |r: Complex64| (g / gm) / (1.0 - r.re) - 1.0;
    let model = |omega2: f64| 1.0 - g * g / (g * gm + omega2);
    let watts: Vec<f64> = points.iter().map(|(p, _)| dbm_to_watts(*p)).collect();

    match pin {
        PowerPin::Attenuation(att) => {
            let chip: Vec<f64> = watts.iter().map(|w| w * 10f64.powf(-att / 10.0)).collect();
            let guesses = |lo: f64, hi: f64| -> Vec<f64> {
                points
                    .iter()
                    .zip(&chip)
                    .filter_map(|((_, r), &pw)| {
                        let s = saturation(*r);
                        (s.is_finite() && s > lo && s < hi).then(|| (s * g * gm).sqrt() / (TWO_PI * pw.sqrt()))
                    })
                    .collect()
            };
            let pmax = chip.iter().cloned().fold(0.0, f64::max);
            let k0 = median(guesses(0.05, 50.0))
                .or_else(|| median(guesses(0.0, f64::INFINITY)))
                .unwrap_or(0.1 * (g * gm).sqrt() / (TWO_PI * pmax.sqrt()));
            let residuals = |p: &[f64]| {
                let k = p[0] * k0;
                let mut out = Vec::with_capacity(2 * points.len());
                for ((_, r), &pw) in points.iter().zip(&chip) {
                    let d = model((TWO_PI * k).powi(2) * pw) - r;
                    out.push(d.re);
                    out.push(d.im);
                }
                out
            };
            let rep = levenberg_marquardt(residuals, &[1.0], &LmOptions::default())?;
            if !rep.converged {
                return Err(Error::NotConverged(rep.n_iter));
            }
            let k = rep.x[0].abs() * k0;
            let k_err = rep.stderr[0] * k0;
            let mut params = vec![param("k_10", k, k_err), param("attenuation_db", att, 0.0)];
            if g > gm {
                let omega = (g * (g - gm)).sqrt();
                let p = crate::units::rabi_to_dbm(omega, k, att);
                params.push(param("singular_power_dbm", p, 20.0 / std::f64::consts::LN_10 * k_err / k));
            }
            Ok(FitResult::from_report(&rep, params))
        }
        PowerPin::Coupling(k) => {
            if !(k > 0.0) {
                return Err(Error::invalid("pinned k_10 must be positive"));
            }
            // A = p − 30 − 10·log10(Ω²/(2πk)²)
            let guesses: Vec<f64> = points
                .iter()
                .filter_map(|(p, r)| {
                    let s = saturation(*r);
                    (s.is_finite() && s > 0.0).then(|| p - 30.0 - 10.0 * (s * g * gm / (TWO_PI * k).powi(2)).log10())
                })
                .collect();
            let a0 = median(guesses).unwrap_or(0.0);
            let residuals = |p: &[f64]| {
                let att = p[0] * 10.0 + a0;
                let mut out = Vec::with_capacity(2 * points.len());
                for ((_, r), &w) in points.iter().zip(&watts) {
                    let d = model((TWO_PI * k).powi(2) * w * 10f64.powf(-att / 10.0)) - r;
                    out.push(d.re);
                    out.push(d.im);
                }
                out
            };
            let rep = levenberg_marquardt(residuals, &[0.0], &LmOptions::default())?;
            if !rep.converged {
                return Err(Error::NotConverged(rep.n_iter));
            }
            let att = rep.x[0] * 10.0 + a0;
            let a_err = rep.stderr[0] * 10.0;
            let mut params = vec![param("k_10", k, 0.0), param("attenuation_db", att, a_err)];
            if g > gm {
                let p = crate::units::rabi_to_dbm((g * (g - gm)).sqrt(), k, att);
                params.push(param("singular_power_dbm", p, a_err));
            }
            Ok(FitResult::from_report(&rep, params))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices;
    use crate::freq::reflection_powered;
    use crate::units::dbm_to_rabi;

    fn sweep(dbm: impl Iterator<Item = f64>, att: f64) -> Vec<(f64, Complex64)> {
        let atom = devices::device2();
        dbm.map(|p| (p, reflection_powered(&atom, 0.0, dbm_to_rabi(p, atom.k_10(), att)))).collect()
    }

    #[test]
    fn pin_contract() {
        assert!(matches!(PowerPin::from_options(None, None), Err(Error::Underdetermined(_))));
        assert!(PowerPin::from_options(Some(1.0), Some(2.0)).is_err());
        assert_eq!(PowerPin::from_options(None, Some(132.3)).unwrap(), PowerPin::Attenuation(132.3));
    }

    #[test]
    fn recovers_coupling_with_pinned_attenuation() {
        let atom = devices::device2();
        let pts = sweep((0..25).map(|i| -30.0 + i as f64), 132.3);
        let f = fit_power_dependence(&pts, atom.gamma_r_10(), atom.gamma_10(), PowerPin::Attenuation(132.3)).unwrap();
        let k = f.value("k_10").unwrap();
        assert!((k / 6.8363e14 - 1.0).abs() < 1e-6);
        // line-referred singular power; chip level is −142.48 dBm
        assert!((f.value("singular_power_dbm").unwrap() - 132.3 + 142.5).abs() < 0.3);
    }

    #[test]
    fn recovers_attenuation_with_pinned_coupling() {
        let atom = devices::device2();
        let pts = sweep((0..25).map(|i| -30.0 + i as f64), 132.3);
        let f = fit_power_dependence(&pts, atom.gamma_r_10(), atom.gamma_10(), PowerPin::Coupling(6.8363e14)).unwrap();
        assert!((f.value("attenuation_db").unwrap() - 132.3).abs() < 1e-6);
    }

    #[test]
    fn powers_below_the_knee_leave_k_unconstrained() {
        let atom = devices::device2();
        let mut pts = sweep((0..8).map(|i| -70.0 + i as f64), 132.3);
        // tiny deterministic perturbation so the residual is not exactly zero
        for (i, (_, r)) in pts.iter_mut().enumerate() {
            *r += Complex64::new(1e-4 * ((i * 7 % 5) as f64 - 2.0), 1e-4 * ((i * 3 % 5) as f64 - 2.0));
        }
        let f = fit_power_dependence(&pts, atom.gamma_r_10(), atom.gamma_10(), PowerPin::Attenuation(132.3)).unwrap();
        let rel = f.stderr("k_10").unwrap() / f.value("k_10").unwrap();
        assert!(rel > 0.5 || !rel.is_finite(), "relative stderr {rel}");
    }
}
