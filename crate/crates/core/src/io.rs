//! CSV import and export at the cyclic-MHz / dBm / ns boundary.
//!
//! Numbers are written with nine significant digits so output is
//! byte-identical across runs and thread counts.

use std::io::Write;

use csv::{ReaderBuilder, StringRecord, Trim};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fit::TwoToneMap;
use crate::freq::{ComplexSpectrum, SweepMap, TransitionRow};
use crate::time::PulseTrace;
use crate::units::{angular_to_mhz, mhz_to_angular, s_to_ns};

pub const SWEEP_COLUMNS: &str = "axis1,delta_p_mhz,re_r,im_r,abs_r,phase_rad,tau_d_ns,singular";
pub const TRACE_COLUMNS: &str = "t_ns,re_in,im_in,re_out,im_out,abs_in,abs_out";
pub const SUMMARY_COLUMNS: &str = "param,tau_d_ns,confidence,residual_ratio";

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // normalise −0
        format!("{:.8e}", if x == 0.0 { 0.0 } else { x })
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::invalid(format!("write failed: {e}"))
}

fn write_header<W: Write>(w: &mut W, header: &[(String, String)]) -> Result<()> {
    for (k, v) in header {
        writeln!(w, "# {k}: {v}").map_err(io_err)?;
    }
    Ok(())
}

/// One row per (axis1, detuning) cell. `axis1` is written as given, so the
/// caller chooses its unit.
pub fn write_sweep_csv<W: Write>(w: &mut W, header: &[(String, String)], axis1: &[f64], map: &SweepMap) -> Result<()> {
    if axis1.len() != map.axis1.len() {
        return Err(Error::LengthMismatch { expected: map.axis1.len(), got: axis1.len() });
    }
    write_header(w, header)?;
    writeln!(w, "{SWEEP_COLUMNS}").map_err(io_err)?;
    for (row, a) in axis1.iter().enumerate() {
        for (col, d) in map.detunings.iter().enumerate() {
            let c = map.cell(row, col);
            let tau = if c.singular { f64::NAN } else { s_to_ns(c.tau_d) };
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                fmt_num(*a),
                fmt_num(angular_to_mhz(*d)),
                fmt_num(c.r.re),
                fmt_num(c.r.im),
                fmt_num(c.r.norm()),
                fmt_num(c.phase),
                fmt_num(tau),
                u8::from(c.singular)
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}

/// Envelopes are written in cyclic MHz (Rabi frequency / 2π).
pub fn write_trace_csv<W: Write>(w: &mut W, header: &[(String, String)], input: &PulseTrace, output: &PulseTrace) -> Result<()> {
    if input.len() != output.len() {
        return Err(Error::LengthMismatch { expected: input.len(), got: output.len() });
    }
    write_header(w, header)?;
    writeln!(w, "{TRACE_COLUMNS}").map_err(io_err)?;
    for (i, (a, b)) in input.samples().iter().zip(output.samples()).enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            fmt_num(s_to_ns(input.time(i))),
            fmt_num(angular_to_mhz(a.re)),
            fmt_num(angular_to_mhz(a.im)),
            fmt_num(angular_to_mhz(b.re)),
            fmt_num(angular_to_mhz(b.im)),
            fmt_num(angular_to_mhz(a.norm())),
            fmt_num(angular_to_mhz(b.norm()))
        )
        .map_err(io_err)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub param: f64,
    /// `None` when extraction failed.
    pub tau_d: Option<f64>,
    pub confidence: String,
    pub residual_ratio: Option<f64>,
}

pub fn write_summary_csv<W: Write>(w: &mut W, header: &[(String, String)], rows: &[SummaryRow]) -> Result<()> {
    write_header(w, header)?;
    writeln!(w, "{SUMMARY_COLUMNS}").map_err(io_err)?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            fmt_num(r.param),
            fmt_num(r.tau_d.map(s_to_ns).unwrap_or(f64::NAN)),
            r.confidence,
            fmt_num(r.residual_ratio.unwrap_or(f64::NAN))
        )
        .map_err(io_err)?;
    }
    Ok(())
}

/// Parsed CSV table with the source line of every record.
struct Table {
    headers: Vec<String>,
    rows: Vec<(usize, StringRecord)>,
}

impl Table {
    fn parse(text: &str) -> Result<Self> {
        let mut rdr = ReaderBuilder::new().comment(Some(b'#')).trim(Trim::All).from_reader(text.as_bytes());
        let csv_err = |e: csv::Error| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse { line, msg: e.to_string() }
        };
        let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|h| h.to_ascii_lowercase()).collect();
        if headers.iter().all(|h| h.is_empty()) {
            return Err(Error::Parse { line: 1, msg: "missing header row".into() });
        }
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            rows.push((line, rec));
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 0, msg: "no data rows".into() });
        }
        Ok(Table { headers, rows })
    }

    fn col(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Index of the first present column among `names`, and which name matched.
    fn first_col(&self, names: &[&str]) -> Result<(usize, usize)> {
        names
            .iter()
            .enumerate()
            .find_map(|(k, n)| self.col(n).map(|i| (i, k)))
            .ok_or_else(|| Error::Parse { line: 1, msg: format!("missing column, expected one of {}", names.join(" / ")) })
    }

    fn num(line: usize, rec: &StringRecord, i: usize) -> Result<f64> {
        let field = rec.get(i).unwrap_or("");
        field
            .parse::<f64>()
            .map_err(|_| Error::Parse { line, msg: format!("field {} is not a number: {field:?}", i + 1) })
    }

    fn complex_reader(&self) -> Result<impl Fn(usize, &StringRecord) -> Result<Complex64>> {
        let cart = (self.col("re_r"), self.col("im_r"));
        let polar = (self.col("abs_r"), self.col("phase_rad"));
        let (a, b, is_polar) = match (cart, polar) {
            ((Some(a), Some(b)), _) => (a, b, false),
            (_, (Some(a), Some(b))) => (a, b, true),
            _ => {
                return Err(Error::Parse { line: 1, msg: "expected columns re_r,im_r or abs_r,phase_rad".into() });
            }
        };
        Ok(move |line: usize, rec: &StringRecord| {
            let x = Table::num(line, rec, a)?;
            let y = Table::num(line, rec, b)?;
            Ok(if is_polar { Complex64::from_polar(x, y) } else { Complex64::new(x, y) })
        })
    }
}

/// Which axis column an imported spectrum carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumAxis {
    /// `freq_mhz`: absolute probe frequency.
    Frequency,
    /// `delta_p_mhz`: probe detuning.
    Detuning,
}

/// Measured or synthetic spectrum; the axis is converted to rad/s.
pub fn read_spectrum_csv(text: &str) -> Result<(ComplexSpectrum, SpectrumAxis)> {
    let t = Table::parse(text)?;
    let (ax, which) = t.first_col(&["freq_mhz", "delta_p_mhz"])?;
    let kind = if which == 0 { SpectrumAxis::Frequency } else { SpectrumAxis::Detuning };
    let value = t.complex_reader()?;
    let mut axis = Vec::with_capacity(t.rows.len());
    let mut values = Vec::with_capacity(t.rows.len());
    for (line, rec) in &t.rows {
        let x = mhz_to_angular(Table::num(*line, rec, ax)?);
        if let Some(prev) = axis.last() {
            if x <= *prev {
                return Err(Error::Parse { line: *line, msg: "axis must be strictly increasing".into() });
            }
        }
        axis.push(x);
        values.push(value(*line, rec)?);
    }
    Ok((ComplexSpectrum::new(axis, values)?, kind))
}

/// Resonant reflection versus line power: `p_dbm` plus a complex pair.
pub fn read_power_csv(text: &str) -> Result<Vec<(f64, Complex64)>> {
    let t = Table::parse(text)?;
    let (pc, _) = t.first_col(&["p_dbm", "pp_dbm"])?;
    let value = t.complex_reader()?;
    t.rows.iter().map(|(line, rec)| Ok((Table::num(*line, rec, pc)?, value(*line, rec)?))).collect()
}

/// Rectangular two-tone grid: rows grouped by control power in file order.
pub fn read_two_tone_csv(text: &str, delta_c: f64) -> Result<TwoToneMap> {
    let t = Table::parse(text)?;
    let (pc, _) = t.first_col(&["pc_dbm", "axis1"])?;
    let (dc, _) = t.first_col(&["delta_p_mhz"])?;
    let value = t.complex_reader()?;
    let mut powers: Vec<f64> = Vec::new();
    let mut detunings: Vec<f64> = Vec::new();
    let mut values = Vec::with_capacity(t.rows.len());
    let mut col = 0;
    for (line, rec) in &t.rows {
        let p = Table::num(*line, rec, pc)?;
        let d = mhz_to_angular(Table::num(*line, rec, dc)?);
        if powers.last().is_none_or(|last| last.to_bits() != p.to_bits()) {
            if !powers.is_empty() && col != detunings.len() {
                return Err(Error::Parse { line: *line, msg: "rows per control power differ".into() });
            }
            powers.push(p);
            col = 0;
        }
        if powers.len() == 1 {
            detunings.push(d);
        } else if col >= detunings.len() || (detunings[col] - d).abs() > 1e-9 * d.abs().max(1.0) {
            return Err(Error::Parse { line: *line, msg: "detuning grid differs between control powers".into() });
        }
        col += 1;
        values.push(value(*line, rec)?);
    }
    if col != detunings.len() {
        return Err(Error::Parse { line: t.rows.last().map_or(0, |r| r.0), msg: "incomplete last row".into() });
    }
    TwoToneMap::new(powers, detunings, values, delta_c)
}

/// Table of `omega_10_mhz,gamma_r_10_mhz,gamma_10_mhz`.
pub fn read_transition_table(text: &str) -> Result<Vec<TransitionRow>> {
    let t = Table::parse(text)?;
    let (a, _) = t.first_col(&["omega_10_mhz"])?;
    let (b, _) = t.first_col(&["gamma_r_10_mhz"])?;
    let (c, _) = t.first_col(&["gamma_10_mhz"])?;
    t.rows
        .iter()
        .map(|(line, rec)| {
            Ok(TransitionRow {
                omega_10: mhz_to_angular(Table::num(*line, rec, a)?),
                gamma_r_10: mhz_to_angular(Table::num(*line, rec, b)?),
                gamma_10: mhz_to_angular(Table::num(*line, rec, c)?),
            })
        })
        .collect()
}
