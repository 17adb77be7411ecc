//! Levenberg–Marquardt on real residual vectors with central-difference Jacobians.
//!
//! Callers are expected to pass parameters scaled to order unity; the finite
//! difference step is relative to the parameter magnitude.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmOptions {
    pub max_iter: usize,
    /// Stop when an accepted step reduces the cost by less than this fraction.
    pub ftol: f64,
    /// Stop when the step is this small relative to the parameters.
    pub xtol: f64,
    /// Stop when the scaled gradient is this small.
    pub gtol: f64,
    pub fd_step: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        LmOptions { max_iter: 200, ftol: 1e-15, xtol: 1e-13, gtol: 1e-15, fd_step: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LmReport {
    pub x: Vec<f64>,
    /// Euclidean norm of the residual vector at `x`.
    pub residual_norm: f64,
    /// Linearised standard errors, `sqrt(diag(s²(JᵀJ)⁻¹))`; infinite when
    /// `JᵀJ` is singular.
    pub stderr: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub n_iter: usize,
    pub converged: bool,
    pub n_residuals: usize,
}

fn jacobian<F>(f: &F, x: &[f64], r0: &[f64], step: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let m = r0.len();
    let n = x.len();
    let mut j = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for c in 0..n {
        let h = step * x[c].abs().max(1e-3);
        xp[c] = x[c] + h;
        let fp = f(&xp);
        xp[c] = x[c] - h;
        let fm = f(&xp);
        xp[c] = x[c];
        if fp.len() != m || fm.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: fp.len().min(fm.len()) });
        }
        for r in 0..m {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    if j.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite Jacobian".into()));
    }
    Ok(j)
}

fn half_sq(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

/// Minimise `½‖f(x)‖²` starting from `x0`.
///
/// Returns `Ok` with `converged = false` when the iteration budget runs out;
/// non-finite residuals are a hard error.
pub fn levenberg_marquardt<F>(f: F, x0: &[f64], opts: &LmOptions) -> Result<LmReport>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut r = f(&x);
    let m = r.len();
    if m < n {
        return Err(Error::Underdetermined(format!("{m} residuals for {n} parameters")));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged("non-finite residuals at the starting point".into()));
    }
    let mut cost = half_sq(&r);
    let mut jac = jacobian(&f, &x, &r, opts.fd_step)?;
    let mut jtj = jac.transpose() * &jac;
    let mut g = jac.transpose() * DVector::from_column_slice(&r);
    let mut lambda = 1e-3 * jtj.diagonal().max().max(f64::MIN_POSITIVE);
    let mut nu = 2.0;
    let mut converged = cost == 0.0;
    let mut iter = 0;

    while !converged && iter < opts.max_iter {
        iter += 1;
        let gmax = g.amax();
        if gmax <= opts.gtol * (1.0 + cost) {
            converged = true;
            break;
        }
        let mut a = jtj.clone();
        let dmax = jtj.diagonal().max().max(f64::MIN_POSITIVE);
        for i in 0..n {
            a[(i, i)] += lambda * jtj[(i, i)].max(1e-12 * dmax);
        }
        let Some(chol) = a.clone().cholesky() else {
            lambda *= nu;
            nu *= 2.0;
            continue;
        };
        let delta = chol.solve(&(-&g));
        let xnorm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if delta.norm() <= opts.xtol * (xnorm + opts.xtol) {
            converged = true;
            break;
        }
        let x_new: Vec<f64> = x.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
        let r_new = f(&x_new);
        let cost_new = if r_new.iter().all(|v| v.is_finite()) { half_sq(&r_new) } else { f64::INFINITY };
        // predicted reduction of the linear model
        let predicted = 0.5 * delta.dot(&((&a - &jtj) * &delta - &g));
        let gain = (cost - cost_new) / predicted.max(f64::MIN_POSITIVE);
        if cost_new < cost && gain > 0.0 {
            let improvement = cost - cost_new;
            x = x_new;
            r = r_new;
            cost = cost_new;
            jac = jacobian(&f, &x, &r, opts.fd_step)?;
            jtj = jac.transpose() * &jac;
            g = jac.transpose() * DVector::from_column_slice(&r);
            lambda *= (1.0f64 / 3.0).max(1.0 - (2.0 * gain - 1.0).powi(3));
            nu = 2.0;
            if cost == 0.0 || improvement <= opts.ftol * (cost + improvement) {
                converged = true;
            }
        } else {
            lambda *= nu;
            nu *= 2.0;
            if !lambda.is_finite() {
                // no descent direction left: we are at a (numerical) minimum
                converged = true;
            }
        }
    }

    let residual_norm = (2.0 * cost).sqrt();
    let dof = (m - n).max(1) as f64;
    let s2 = 2.0 * cost / dof;
    let covariance = jtj.clone().try_inverse().filter(|c| c.iter().all(|v| v.is_finite())).map(|c| c * s2);
    let stderr = match &covariance {
        Some(c) => (0..n).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; n],
    };
    Ok(LmReport { x, residual_norm, stderr, covariance, n_iter: iter, converged, n_residuals: m })
}
