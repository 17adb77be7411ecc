use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::result::{param, FitResult};
use crate::freq::ComplexSpectrum;
use crate::optim::{levenberg_marquardt, LmOptions};

/// Lorentzian fit `r = 1 − Γ₁₀/(γ₁₀ + i(x − ω₁₀))` to a weak-probe spectrum.
///
/// `omega_10` is reported on the spectrum's own axis: the resonance offset
/// for detuning axes, the transition frequency for absolute axes. The
/// derived `gamma_n_10 = γ₁₀ − Γ₁₀/2` is included with propagated error.
pub fn fit_weak_spectrum(spectrum: &ComplexSpectrum) -> Result<FitResult> {
    fit_weak_spectrum_with(spectrum, &LmOptions::default())
}

pub fn fit_weak_spectrum_with(spectrum: &ComplexSpectrum, opts: &LmOptions) -> Result<FitResult> {
    let x = spectrum.detunings();
    let r = spectrum.values();
    if x.len() < 4 {
        return Err(Error::InsufficientSamples { needed: 4, got: x.len() });
    }
    let dev: Vec<f64> = r.iter().map(|z| (1.0 - z).norm()).collect();
    let imax = (0..dev.len()).fold(0, |b, i| if dev[i] > dev[b] { i } else { b });
    let peak = dev[imax];
    if !(peak > 1e-9) {
        return Err(Error::Degenerate("spectrum shows no resonance (r = 1 everywhere)".into()));
    }

    // |1 − r|² is a Lorentzian of half width γ around the resonance
    let half = peak * std::f64::consts::FRAC_1_SQRT_2;
    let lo = (0..imax).rev().find(|&i| dev[i] < half).map(|i| x[i]);
    let hi = (imax + 1..x.len()).find(|&i| dev[i] < half).map(|i| x[i]);
    let span = x[x.len() - 1] - x[0];
    let gamma0 = match (lo, hi) {
        (Some(l), Some(h)) => 0.5 * (h - l),
        (Some(l), None) => x[imax] - l,
        (None, Some(h)) => h - x[imax],
        (None, None) => 0.1 * span,
    };
    let xc = x[imax];
    let s = gamma0;

    let residuals = |p: &[f64]| {
        let mut out = Vec::with_capacity(2 * x.len());
        for (&xi, &ri) in x.iter().zip(r) {
            let m = 1.0 - p[1] / Complex64::new(p[2], (xi - xc) / s - p[0]);
            let d = m - ri;
            out.push(d.re);
            out.push(d.im);
        }
        out
    };
    let rep = levenberg_marquardt(residuals, &[0.0, peak, 1.0], opts)?;
    if !rep.converged {
        return Err(Error::NotConverged(rep.n_iter));
    }
    let omega = xc + rep.x[0] * s;
    let g_r = rep.x[1] * s;
    let gamma = rep.x[2].abs() * s;
    if !(g_r.abs() > 0.0) {
        return Err(Error::Degenerate("fitted radiative rate vanishes".into()));
    }
    if span < 4.0 * gamma {
        return Err(Error::Degenerate(format!(
            "spectrum spans {span:.4e} rad/s, less than 4 linewidths ({:.4e} rad/s)",
            4.0 * gamma
        )));
    }
    let var_n = rep
        .covariance
        .as_ref()
        .map(|c| (c[(2, 2)] + 0.25 * c[(1, 1)] - c[(1, 2)]).max(0.0) * s * s)
        .unwrap_or(f64::INFINITY);
    Ok(FitResult::from_report(
        &rep,
        vec![
            param("omega_10", omega, rep.stderr[0] * s),
            param("gamma_r_10", g_r, rep.stderr[1] * s),
            param("gamma_10", gamma, rep.stderr[2] * s),
            param("gamma_n_10", gamma - 0.5 * g_r, var_n.sqrt()),
        ],
    ))
}
