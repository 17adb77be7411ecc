use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freq::delay::{group_delay_numeric_with, DelayOptions};
use crate::freq::reflection::{reflection_two_tone, reflection_weak};
use crate::freq::spectrum::ComplexSpectrum;
use crate::params::AtomParams;
use crate::units::control_dbm_to_rabi;

/// One row of a user-supplied table of measured two-level rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRow {
    pub omega_10: f64,
    pub gamma_r_10: f64,
    pub gamma_10: f64,
}

/// Slow axis of a 2D reflection map.
#[derive(Debug, Clone, PartialEq)]
pub enum SweepAxis {
    /// Control-tone line power in dBm, with `k21 = √2·k10`.
    ControlPower { dbm: Vec<f64>, attenuation_db: f64, delta_c: f64 },
    /// Atom transition tuned through a table of rates; detunings are relative
    /// to each row's own transition.
    Transition(Vec<TransitionRow>),
}

impl SweepAxis {
    pub fn len(&self) -> usize {
        match self {
            SweepAxis::ControlPower { dbm, .. } => dbm.len(),
            SweepAxis::Transition(rows) => rows.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn values(&self) -> Vec<f64> {
        match self {
            SweepAxis::ControlPower { dbm, .. } => dbm.clone(),
            SweepAxis::Transition(rows) => rows.iter().map(|r| r.omega_10).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepCell {
    pub r: Complex64,
    /// Unwrapped along the detuning axis of the row.
    pub phase: f64,
    pub tau_d: f64,
    pub singular: bool,
}

/// Row-major grid: `cells[row * detunings.len() + col]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMap {
    /// dBm for control-power sweeps, rad/s for transition sweeps.
    pub axis1: Vec<f64>,
    pub detunings: Vec<f64>,
    pub cells: Vec<SweepCell>,
}

impl SweepMap {
    pub fn cell(&self, row: usize, col: usize) -> &SweepCell {
        &self.cells[row * self.detunings.len() + col]
    }

    pub fn row(&self, row: usize) -> &[SweepCell] {
        let n = self.detunings.len();
        &self.cells[row * n..(row + 1) * n]
    }
}

fn strictly_monotone(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0]) || v.windows(2).all(|w| w[1] < w[0])
}

/// Reflection and numerically differentiated group delay over a 2D grid.
///
/// Rows are independent and evaluated in parallel; the result does not
/// depend on the thread count. Cells where the delay is undefined are
/// flagged rather than aborting the sweep.
pub fn sweep_map(atom: &AtomParams, axis: &SweepAxis, detunings: &[f64]) -> Result<SweepMap> {
    if axis.is_empty() {
        return Err(Error::invalid("sweep axis is empty"));
    }
    let axis1 = axis.values();
    if axis1.iter().any(|v| v.is_nan()) || !strictly_monotone(&axis1) {
        return Err(Error::invalid("sweep axis must be strictly monotone"));
    }
    if let SweepAxis::ControlPower { dbm, .. } = axis {
        if atom.k_10() <= 0.0 && dbm.iter().any(|p| *p > f64::NEG_INFINITY) {
            return Err(Error::invalid("control-power sweep needs k_10 > 0"));
        }
    }
    // validate the detuning axis once
    ComplexSpectrum::from_fn(detunings.to_vec(), |_| Complex64::new(1.0, 0.0))?;
    if detunings.len() < 3 {
        return Err(Error::InsufficientSamples { needed: 3, got: detunings.len() });
    }

    let rows: Vec<Result<Vec<SweepCell>>> = (0..axis.len())
        .into_par_iter()
        .map(|i| {
            let spectrum = match axis {
                SweepAxis::ControlPower { dbm, attenuation_db, delta_c } => {
                    let oc = control_dbm_to_rabi(dbm[i], atom.k_10(), *attenuation_db);
                    ComplexSpectrum::from_fn(detunings.to_vec(), |d| reflection_two_tone(atom, d, oc, *delta_c))?
                }
                SweepAxis::Transition(rows) => {
                    let row = rows[i];
                    let a = atom.with_transition(row.omega_10, row.gamma_r_10, row.gamma_10)?;
                    ComplexSpectrum::from_fn(detunings.to_vec(), |d| reflection_weak(&a, d))?
                }
            };
            let profile = group_delay_numeric_with(&spectrum, &DelayOptions::permissive())?;
            Ok((0..spectrum.len())
                .map(|j| SweepCell {
                    r: spectrum.values()[j],
                    phase: spectrum.phase_unwrapped()[j],
                    tau_d: profile.tau_d[j],
                    singular: profile.singular_mask[j],
                })
                .collect())
        })
        .collect();

    let mut cells = Vec::with_capacity(axis.len() * detunings.len());
    for row in rows {
        cells.extend(row?);
    }
    Ok(SweepMap { axis1, detunings: detunings.to_vec(), cells })
}
