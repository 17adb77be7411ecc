//! Dormand–Prince 5(4) integrator with output on a fixed sampling grid.
//!
//! Between accepted steps the solution is reconstructed by cubic Hermite
//! interpolation from the step endpoints and their derivatives (FSAL).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest step the controller may take.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-9, atol: 1e-12, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// fifth-order solution minus embedded fourth-order solution
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn hermite<const N: usize>(y0: &[f64; N], f0: &[f64; N], y1: &[f64; N], f1: &[f64; N], h: f64, theta: f64) -> [f64; N] {
    let t2 = theta * theta;
    let t3 = t2 * theta;
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + theta;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i];
    }
    out
}

/// Integrate `dy/dt = f(t, y)` from `grid[0]` and return `y` at every grid time.
///
/// `grid` must be non-decreasing. `check` is called after each accepted
/// step and may abort the integration.
pub fn integrate_on_grid<const N: usize, F, C>(
    mut f: F,
    y0: [f64; N],
    grid: &[f64],
    opts: &OdeOptions,
    mut check: C,
) -> Result<Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    C: FnMut(f64, &[f64; N]) -> Result<()>,
{
    let mut out = Vec::with_capacity(grid.len());
    let Some(&t_start) = grid.first() else {
        return Ok(out);
    };
    let t_end = *grid.last().unwrap();
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::BadGrid("output grid must be non-decreasing".into()));
    }

    let mut t = t_start;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut next = 0;
    while next < grid.len() && grid[next] <= t {
        out.push(y);
        next += 1;
    }
    if next == grid.len() {
        return Ok(out);
    }

    let span = t_end - t_start;
    let mut h = (1e-3 * span).min(opts.h_max);
    let mut steps = 0usize;

    while next < grid.len() {
        if steps >= opts.max_steps {
            return Err(Error::ToleranceNotMet(format!("exceeded {} steps at t = {t:.6e}", opts.max_steps)));
        }
        steps += 1;
        h = h.min(t_end - t).min(opts.h_max);
        if h <= 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::ToleranceNotMet(format!("step size underflow at t = {t:.6e}")));
        }

        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + h, &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y_new);

        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            return Err(Error::ToleranceNotMet(format!("non-finite error estimate at t = {t:.6e}")));
        }

        if err <= 1.0 {
            let t_new = if t + h >= t_end { t_end } else { t + h };
            while next < grid.len() && grid[next] <= t_new {
                let theta = (grid[next] - t) / (t_new - t);
                out.push(if theta >= 1.0 { y_new } else { hermite(&y, &k1, &y_new, &k7, t_new - t, theta) });
                next += 1;
            }
            check(t_new, &y_new)?;
            t = t_new;
            y = y_new;
            k1 = k7;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    }
    Ok(out)
}
