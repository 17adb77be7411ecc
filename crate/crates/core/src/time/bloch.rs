use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{integrate_on_grid, OdeOptions};
use crate::params::{AtomParams, DriveSpec};
use crate::time::trace::PulseTrace;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Lower triangle of the three-level density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    pub rho_00: f64,
    pub rho_11: f64,
    pub rho_22: f64,
    pub rho_10: Complex64,
    pub rho_20: Complex64,
    pub rho_21: Complex64,
}

impl BlochState {
    pub const GROUND: BlochState = BlochState {
        rho_00: 1.0,
        rho_11: 0.0,
        rho_22: 0.0,
        rho_10: Complex64::new(0.0, 0.0),
        rho_20: Complex64::new(0.0, 0.0),
        rho_21: Complex64::new(0.0, 0.0),
    };

    pub fn trace(&self) -> f64 {
        self.rho_00 + self.rho_11 + self.rho_22
    }

    fn matrix(&self) -> Matrix3<Complex64> {
        let re = |x: f64| Complex64::new(x, 0.0);
        Matrix3::new(
            re(self.rho_00), self.rho_10.conj(), self.rho_20.conj(),
            self.rho_10, re(self.rho_11), self.rho_21.conj(),
            self.rho_20, self.rho_21, re(self.rho_22),
        )
    }

    fn to_full(self) -> [f64; 9] {
        [
            self.rho_00, self.rho_11, self.rho_22,
            self.rho_10.re, self.rho_10.im, self.rho_20.re, self.rho_20.im, self.rho_21.re, self.rho_21.im,
        ]
    }

    fn from_full(y: &[f64; 9]) -> Self {
        BlochState {
            rho_00: y[0],
            rho_11: y[1],
            rho_22: y[2],
            rho_10: Complex64::new(y[3], y[4]),
            rho_20: Complex64::new(y[5], y[6]),
            rho_21: Complex64::new(y[7], y[8]),
        }
    }

    fn from_reduced(y: &[f64; 6]) -> Self {
        BlochState {
            rho_10: Complex64::new(y[0], y[1]),
            rho_20: Complex64::new(y[2], y[3]),
            rho_21: Complex64::new(y[4], y[5]),
            ..BlochState::GROUND
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlochModel {
    /// Lindblad master equation with population dynamics.
    #[default]
    Full,
    /// Coherence equations with the atom pinned to its ground state; valid
    /// for weak probes only.
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochOptions {
    pub model: BlochModel,
    /// Relative tolerance of the step controller; also bounds how far a
    /// population may leave `[0, 1]`.
    pub tol: f64,
    pub atol: f64,
    /// Maximum step as a multiple of the probe sampling interval, so that the
    /// controller cannot step over a pulse arriving after a quiet stretch.
    pub max_step_samples: f64,
}

impl Default for BlochOptions {
    fn default() -> Self {
        BlochOptions { model: BlochModel::Full, tol: 1e-9, atol: 1e-12, max_step_samples: 10.0 }
    }
}

fn rhs_full(atom: &AtomParams, op: Complex64, oc: f64, dp: f64, dc: f64, s: &BlochState) -> [f64; 9] {
    let z = Complex64::new(0.0, 0.0);
    let h = Matrix3::new(
        z, op.conj() * 0.5, z,
        op * 0.5, Complex64::new(-dp, 0.0), Complex64::new(0.5 * oc, 0.0),
        z, Complex64::new(0.5 * oc, 0.0), Complex64::new(-(dp + dc), 0.0),
    );
    let rho = s.matrix();
    let d = (h * rho - rho * h) * I;
    let (g10, g21) = (atom.gamma_r_10(), atom.gamma_r_21());
    let d10 = d[(1, 0)] - atom.gamma_10() * s.rho_10;
    let d20 = d[(2, 0)] - atom.gamma_20() * s.rho_20;
    let d21 = d[(2, 1)] - atom.gamma_21() * s.rho_21;
    [
        d[(0, 0)].re + g10 * s.rho_11,
        d[(1, 1)].re + g21 * s.rho_22 - g10 * s.rho_11,
        d[(2, 2)].re - g21 * s.rho_22,
        d10.re, d10.im, d20.re, d20.im, d21.re, d21.im,
    ]
}

fn rhs_reduced(atom: &AtomParams, op: Complex64, oc: f64, dp: f64, dc: f64, y: &[f64; 6]) -> [f64; 6] {
    let r10 = Complex64::new(y[0], y[1]);
    let r20 = Complex64::new(y[2], y[3]);
    let r21 = Complex64::new(y[4], y[5]);
    let d10 = -(I * dp + atom.gamma_10()) * r10 + I * 0.5 * oc * r20 + I * 0.5 * op;
    let d20 = I * 0.5 * oc * r10 - (I * (dp + dc) + atom.gamma_20()) * r20 - I * 0.5 * op * r21;
    let d21 = -I * 0.5 * op.conj() * r20 - (I * dc + atom.gamma_21()) * r21;
    [d10.re, d10.im, d20.re, d20.im, d21.re, d21.im]
}

/// Integrate the three-level Bloch equations from the ground state, sampled
/// on the probe grid.
///
/// The probe detuning is the trace's carrier detuning; the control detuning
/// and (optionally time-dependent) Rabi frequency come from `control`.
pub fn integrate_bloch(
    atom: &AtomParams,
    probe: &PulseTrace,
    control: &DriveSpec,
    opts: &BlochOptions,
) -> Result<Vec<BlochState>> {
    let control = control.validated()?;
    if !(opts.tol > 0.0 && opts.atol > 0.0 && opts.max_step_samples > 0.0) {
        return Err(Error::invalid("integrator tolerances and step bound must be positive"));
    }
    let grid = probe.times();
    let ode = OdeOptions { rtol: opts.tol, atol: opts.atol, h_max: opts.max_step_samples * probe.dt(), ..Default::default() };
    let dp = probe.carrier_detuning();
    let dc = control.detuning;
    match opts.model {
        BlochModel::Full => {
            let bound = opts.tol;
            let f = |t: f64, y: &[f64; 9]| {
                rhs_full(atom, probe.sample_at(t), control.rabi_at(t), dp, dc, &BlochState::from_full(y))
            };
            let check = |t: f64, y: &[f64; 9]| {
                for (k, p) in y[..3].iter().enumerate() {
                    if !(*p >= -bound && *p <= 1.0 + bound) {
                        return Err(Error::InvalidState(format!("rho_{k}{k} = {p:e} at t = {t:e} s")));
                    }
                }
                Ok(())
            };
            let ys = integrate_on_grid(f, BlochState::GROUND.to_full(), &grid, &ode, check)?;
            Ok(ys.iter().map(BlochState::from_full).collect())
        }
        BlochModel::Reduced => {
            let f = |t: f64, y: &[f64; 6]| rhs_reduced(atom, probe.sample_at(t), control.rabi_at(t), dp, dc, y);
            let ys = integrate_on_grid(f, [0.0; 6], &grid, &ode, |_, _| Ok(()))?;
            Ok(ys.iter().map(BlochState::from_reduced).collect())
        }
    }
}

/// Coherent output field `Ω_out = Ω_p + 2iΓ₁₀ρ₁₀`, pointwise on the probe grid.
pub fn input_output(atom: &AtomParams, probe: &PulseTrace, rho_10: &[Complex64]) -> Result<PulseTrace> {
    if rho_10.len() != probe.len() {
        return Err(Error::LengthMismatch { expected: probe.len(), got: rho_10.len() });
    }
    let g = atom.gamma_r_10();
    let out = probe.samples().iter().zip(rho_10).map(|(p, r)| p + I * 2.0 * g * r).collect();
    probe.with_samples(out)
}

/// Integrate and apply the input-output relation in one call.
pub fn simulate_output(
    atom: &AtomParams,
    probe: &PulseTrace,
    control: &DriveSpec,
    opts: &BlochOptions,
) -> Result<PulseTrace> {
    let states = integrate_bloch(atom, probe, control, opts)?;
    let rho: Vec<Complex64> = states.iter().map(|s| s.rho_10).collect();
    input_output(atom, probe, &rho)
}
