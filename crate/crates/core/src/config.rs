//! Flat `key = value` device parameter files.
//!
//! Rates are given in cyclic MHz and converted to rad/s on load. Lines
//! starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::AtomParams;
use crate::units::{angular_to_mhz, mhz_to_angular};

const KEYS: &[&str] = &[
    "omega_10_mhz",
    "gamma_r_10_mhz",
    "gamma_10_mhz",
    "gamma_n_10_mhz",
    "k_10",
    "gamma_r_21_mhz",
    "gamma_20_mhz",
    "gamma_n_20_mhz",
    "gamma_21_mhz",
];

pub fn parse_device(text: &str) -> Result<AtomParams> {
    let mut b = AtomParams::builder();
    let mut seen: Vec<&str> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            msg: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::Parse { line: line_no, msg: format!("unknown key `{key}`") });
        };
        if seen.contains(&known) {
            return Err(Error::Parse { line: line_no, msg: format!("duplicate key `{key}`") });
        }
        seen.push(known);
        let v: f64 = value.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            msg: format!("`{}` is not a number", value.trim()),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse { line: line_no, msg: format!("`{key}` must be finite") });
        }
        b = match known {
            "omega_10_mhz" => b.omega_10(mhz_to_angular(v)),
            "gamma_r_10_mhz" => b.gamma_r_10(mhz_to_angular(v)),
            "gamma_10_mhz" => b.gamma_10(mhz_to_angular(v)),
            "gamma_n_10_mhz" => b.gamma_n_10(mhz_to_angular(v)),
            "k_10" => b.k_10(v),
            "gamma_r_21_mhz" => b.gamma_r_21(mhz_to_angular(v)),
            "gamma_20_mhz" => b.gamma_20(mhz_to_angular(v)),
            "gamma_n_20_mhz" => b.gamma_n_20(mhz_to_angular(v)),
            "gamma_21_mhz" => b.gamma_21(mhz_to_angular(v)),
            _ => unreachable!(),
        };
    }
    b.build()
}

pub fn read_device(path: impl AsRef<Path>) -> Result<AtomParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse { line: 0, msg: format!("{}: {e}", path.display()) })?;
    parse_device(&text)
}

/// Resolved parameters as `key = value` lines, each prefixed with `prefix`.
///
/// The output parses back with [`parse_device`] when `prefix` is empty.
pub fn format_device(atom: &AtomParams, prefix: &str) -> String {
    let mut s = String::new();
    let rows = [
        ("omega_10_mhz", angular_to_mhz(atom.omega_10())),
        ("gamma_r_10_mhz", angular_to_mhz(atom.gamma_r_10())),
        ("gamma_10_mhz", angular_to_mhz(atom.gamma_10())),
        ("k_10", atom.k_10()),
        ("gamma_r_21_mhz", angular_to_mhz(atom.gamma_r_21())),
        ("gamma_20_mhz", angular_to_mhz(atom.gamma_20())),
        ("gamma_21_mhz", angular_to_mhz(atom.gamma_21())),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "{prefix}{k} = {v:.9e}");
    }
    let _ = writeln!(s, "{prefix}# gamma_n_10_mhz = {:.9e}", angular_to_mhz(atom.gamma_n_10()));
    s
}
