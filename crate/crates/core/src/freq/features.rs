use serde::Serialize;

use crate::freq::delay::{group_delay_analytic, zero_delay_boundary};
use crate::params::{ats_threshold_rabi, singular_control_rabi, singular_probe_rabi, AtomParams, EffectiveRates};
use crate::units::{control_rabi_to_dbm, rabi_to_dbm};

/// Landmarks of a device's delay landscape, in internal units (rad/s, s, dBm).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Features {
    pub resonant_delay: Option<f64>,
    pub singular_control_rabi: Option<f64>,
    pub singular_control_dbm: Option<f64>,
    pub ats_threshold_rabi: f64,
    pub ats_threshold_dbm: Option<f64>,
    pub singular_probe_rabi: Option<f64>,
    pub singular_probe_dbm: Option<f64>,
    pub zero_delay_boundary: Option<(f64, f64)>,
}

/// Powers are referred to the line input through `attenuation_db`.
pub fn features(atom: &AtomParams, attenuation_db: f64) -> Features {
    let rates = EffectiveRates::from(atom);
    let has_k = atom.k_10() > 0.0;
    let sc = singular_control_rabi(atom).ok();
    let sp = singular_probe_rabi(atom).ok();
    let ats = ats_threshold_rabi(atom);
    Features {
        resonant_delay: group_delay_analytic(&rates, 0.0).ok(),
        singular_control_rabi: sc,
        singular_control_dbm: sc.filter(|_| has_k).map(|o| control_rabi_to_dbm(o, atom.k_10(), attenuation_db)),
        ats_threshold_rabi: ats,
        ats_threshold_dbm: has_k.then(|| control_rabi_to_dbm(ats, atom.k_10(), attenuation_db)),
        singular_probe_rabi: sp,
        singular_probe_dbm: sp.filter(|_| has_k).map(|o| rabi_to_dbm(o, atom.k_10(), attenuation_db)),
        zero_delay_boundary: zero_delay_boundary(&rates),
    }
}
