//! Bundled parameter sets of the measured devices.

use crate::config::parse_device;
use crate::params::AtomParams;

pub const DEVICE1A_CFG: &str = include_str!("../devices/device1a.cfg");
pub const DEVICE1B_CFG: &str = include_str!("../devices/device1b.cfg");
pub const DEVICE2_CFG: &str = include_str!("../devices/device2.cfg");
pub const DECOUPLED_CFG: &str = include_str!("../devices/decoupled.cfg");

/// Two-level atom near a node of the mirror standing wave (`Γ₁₀/2 < Γⁿ₁₀`).
pub fn device1a() -> AtomParams {
    parse_device(DEVICE1A_CFG).expect("bundled device1a.cfg is valid")
}

/// Two-level atom near an antinode (`Γ₁₀/2 > Γⁿ₁₀`).
pub fn device1b() -> AtomParams {
    parse_device(DEVICE1B_CFG).expect("bundled device1b.cfg is valid")
}

/// Three-level atom at the mirror, strongly coupled with a narrow line.
pub fn device2() -> AtomParams {
    parse_device(DEVICE2_CFG).expect("bundled device2.cfg is valid")
}

/// `Γ₁₀ = 0`: the atom is invisible to the waveguide.
pub fn decoupled() -> AtomParams {
    parse_device(DECOUPLED_CFG).expect("bundled decoupled.cfg is valid")
}

pub fn by_name(name: &str) -> Option<AtomParams> {
    match name {
        "device1a" => Some(device1a()),
        "device1b" => Some(device1b()),
        "device2" => Some(device2()),
        "decoupled" => Some(decoupled()),
        _ => None,
    }
}
