use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use qdelay_core::config::{format_device, read_device};
use qdelay_core::fit::{circle_fit, fit_power_dependence, fit_two_tone as core_fit_two_tone, fit_weak_spectrum, PowerPin};
use qdelay_core::freq::{features as core_features, linspace, sweep_map, ComplexSpectrum, SweepAxis, SweepMap};
use qdelay_core::io::{
    read_power_csv, read_spectrum_csv, read_transition_table, read_two_tone_csv, write_summary_csv, write_sweep_csv,
    write_trace_csv, SpectrumAxis, SummaryRow,
};
use qdelay_core::time::{
    extract_delay, gaussian_probe, narrowband_output, simulate_output, BlochModel, BlochOptions, DelayEstimate, PulseTrace,
};
use qdelay_core::units::{
    angular_to_mhz, control_dbm_to_rabi, dbm_to_rabi, mhz_to_angular, ns_to_s, rabi_to_dbm, s_to_ns,
};
use qdelay_core::{devices, AtomParams, DriveSpec, Error, LineCalibration};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::{fit_report, num, opt};
use crate::{Common, DetuningGrid, Model, PulseArgs, SweepParam};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_EXTRACTION: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn config(msg: impl Display) -> Self {
        CliError { code: EXIT_CONFIG, message: msg.to_string() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::Singular(_) | Error::NoSolution(_) => EXIT_DOMAIN,
            Error::FitDiverged(_)
            | Error::NotConverged(_)
            | Error::Degenerate(_)
            | Error::Underdetermined(_)
            | Error::ToleranceNotMet(_)
            | Error::InvalidState(_) => EXIT_EXTRACTION,
            _ => EXIT_CONFIG,
        };
        CliError { code, message: e.to_string() }
    }
}

type CmdResult = Result<u8, CliError>;
type Header = Vec<(String, String)>;

fn kv(k: &str, v: impl Display) -> (String, String) {
    (k.to_string(), v.to_string())
}

fn load_device(name: &str) -> Result<AtomParams, CliError> {
    match devices::by_name(name) {
        Some(a) => Ok(a),
        None => read_device(name).map_err(|e| CliError::config(format!("device {name:?}: {e}"))),
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn parse_input<T>(path: &Path, parsed: qdelay_core::Result<T>) -> Result<T, CliError> {
    parsed.map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn emit(common: &Common, content: &[u8]) -> Result<(), CliError> {
    match &common.output {
        Some(p) => std::fs::write(p, content).map_err(|e| CliError::config(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content).and_then(|_| out.flush()).map_err(CliError::config)
        }
    }
}

fn emit_json(common: &Common, v: &Value) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(CliError::config)?;
    s.push('\n');
    emit(common, s.as_bytes())
}

fn device_header(common: &Common, atom: &AtomParams) -> Header {
    vec![
        kv("device", &common.device),
        kv("omega_10_rad_s", format!("{:.9e}", atom.omega_10())),
        kv("gamma_r_10_rad_s", format!("{:.9e}", atom.gamma_r_10())),
        kv("gamma_10_rad_s", format!("{:.9e}", atom.gamma_10())),
        kv("gamma_n_10_rad_s", format!("{:.9e}", atom.gamma_n_10())),
        kv("gamma_r_21_rad_s", format!("{:.9e}", atom.gamma_r_21())),
        kv("gamma_20_rad_s", format!("{:.9e}", atom.gamma_20())),
        kv("gamma_21_rad_s", format!("{:.9e}", atom.gamma_21())),
        kv("k_10", format!("{:.9e}", atom.k_10())),
        kv("attenuation_db", common.attenuation_db),
    ]
}

fn dry_run(header: &Header) -> CmdResult {
    let mut out = std::io::stdout().lock();
    for (k, v) in header {
        writeln!(out, "{k} = {v}").map_err(CliError::config)?;
    }
    Ok(EXIT_OK)
}

fn detuning_axis(grid: &DetuningGrid) -> Result<Vec<f64>, CliError> {
    if !(grid.span_mhz.is_finite() && grid.span_mhz > 0.0) {
        return Err(CliError::config("--span-mhz must be positive"));
    }
    if grid.points < 3 {
        return Err(CliError::config("--points must be at least 3"));
    }
    let s = mhz_to_angular(grid.span_mhz);
    Ok(linspace(-s, s, grid.points))
}

fn control_rabi(atom: &AtomParams, common: &Common, pc_dbm: f64) -> Result<f64, CliError> {
    if pc_dbm.is_nan() {
        return Err(CliError::config("control power is NaN"));
    }
    if pc_dbm > f64::NEG_INFINITY && atom.k_10() <= 0.0 {
        return Err(CliError::config("device has k_10 = 0; control power cannot be converted"));
    }
    Ok(control_dbm_to_rabi(pc_dbm, atom.k_10(), common.attenuation_db))
}

fn write_map(common: &Common, header: &Header, axis1: &[f64], map: &SweepMap) -> CmdResult {
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, header, axis1, map)?;
    emit(common, &buf)?;
    if map.cells.iter().all(|c| c.singular) {
        eprintln!("error: group delay is singular at every grid point");
        return Ok(EXIT_DOMAIN);
    }
    Ok(EXIT_OK)
}

pub fn spectrum(common: &Common, grid: &DetuningGrid, pc_dbm: f64, delta_c_mhz: f64) -> CmdResult {
    let atom = load_device(&common.device)?;
    let d = detuning_axis(grid)?;
    let oc = control_rabi(&atom, common, pc_dbm)?;
    let mut header = device_header(common, &atom);
    header.extend([
        kv("pc_dbm", pc_dbm),
        kv("pc_chip_dbm", pc_dbm - common.attenuation_db),
        kv("omega_c_rad_s", format!("{oc:.9e}")),
        kv("delta_c_rad_s", format!("{:.9e}", mhz_to_angular(delta_c_mhz))),
        kv("delta_p_rad_s", format!("[{:.9e}, {:.9e}] x {}", d[0], d[d.len() - 1], d.len())),
        kv("axis1", "pc_dbm"),
    ]);
    if common.dry_run {
        return dry_run(&header);
    }
    let axis = SweepAxis::ControlPower {
        dbm: vec![pc_dbm],
        attenuation_db: common.attenuation_db,
        delta_c: mhz_to_angular(delta_c_mhz),
    };
    let map = sweep_map(&atom, &axis, &d)?;
    write_map(common, &header, &[pc_dbm], &map)
}

pub fn delay_map(
    common: &Common,
    grid: &DetuningGrid,
    pc_min_dbm: f64,
    pc_max_dbm: f64,
    pc_steps: usize,
    delta_c_mhz: f64,
    transition_table: Option<&Path>,
) -> CmdResult {
    let atom = load_device(&common.device)?;
    let d = detuning_axis(grid)?;
    let mut header = device_header(common, &atom);
    header.push(kv("delta_p_rad_s", format!("[{:.9e}, {:.9e}] x {}", d[0], d[d.len() - 1], d.len())));

    let (axis, axis1) = match transition_table {
        Some(path) => {
            let rows = parse_input(path, read_transition_table(&read_input(path)?))?;
            header.push(kv("axis1", "omega_10_mhz"));
            header.push(kv("transition_table", path.display()));
            let axis1: Vec<f64> = rows.iter().map(|r| angular_to_mhz(r.omega_10)).collect();
            (SweepAxis::Transition(rows), axis1)
        }
        None => {
            if pc_steps == 0 || !(pc_min_dbm.is_finite() && pc_max_dbm.is_finite()) {
                return Err(CliError::config("control power range must be finite and non-empty"));
            }
            if pc_steps > 1 && pc_max_dbm <= pc_min_dbm {
                return Err(CliError::config("--pc-max-dbm must exceed --pc-min-dbm"));
            }
            let dbm = linspace(pc_min_dbm, pc_max_dbm, pc_steps);
            let lo = control_rabi(&atom, common, pc_min_dbm)?;
            let hi = control_rabi(&atom, common, pc_max_dbm)?;
            header.extend([
                kv("axis1", "pc_dbm"),
                kv("pc_dbm", format!("[{pc_min_dbm}, {pc_max_dbm}] x {pc_steps}")),
                kv("pc_chip_dbm", format!("[{}, {}]", pc_min_dbm - common.attenuation_db, pc_max_dbm - common.attenuation_db)),
                kv("omega_c_rad_s", format!("[{lo:.9e}, {hi:.9e}]")),
                kv("delta_c_rad_s", format!("{:.9e}", mhz_to_angular(delta_c_mhz))),
            ]);
            let axis = SweepAxis::ControlPower {
                dbm: dbm.clone(),
                attenuation_db: common.attenuation_db,
                delta_c: mhz_to_angular(delta_c_mhz),
            };
            (axis, dbm)
        }
    };
    if common.dry_run {
        return dry_run(&header);
    }
    let map = sweep_map(&atom, &axis, &d)?;
    write_map(common, &header, &axis1, &map)
}

/// Everything needed to run one pulse, resolved to internal units.
struct PulsePlan {
    probe: PulseTrace,
    omega_c: f64,
    control: DriveSpec,
    opts: BlochOptions,
    narrowband: bool,
    header: Header,
}

fn plan_pulse(atom: &AtomParams, common: &Common, p: &PulseArgs) -> Result<PulsePlan, CliError> {
    let sigma = ns_to_s(p.sigma_ns);
    let t0 = ns_to_s(p.t0_ns.unwrap_or(6.0 * p.sigma_ns));
    let span = ns_to_s(p.span_ns.unwrap_or(p.t0_ns.unwrap_or(6.0 * p.sigma_ns) + 6.0 * p.sigma_ns + 1000.0));
    let dt = ns_to_s(p.dt_ns);
    let amplitude = match p.pp_dbm {
        Some(pp) if pp.is_nan() => return Err(CliError::config("probe power is NaN")),
        Some(pp) if pp == f64::NEG_INFINITY => 0.0,
        Some(pp) => {
            if atom.k_10() <= 0.0 {
                return Err(CliError::config("device has k_10 = 0; probe power cannot be converted"));
            }
            dbm_to_rabi(pp, atom.k_10(), common.attenuation_db)
        }
        None => mhz_to_angular(p.amplitude_mhz),
    };
    let delta_p = mhz_to_angular(p.delta_p_mhz);
    let delta_c = mhz_to_angular(p.delta_c_mhz);
    let probe = gaussian_probe(amplitude, sigma, t0, span, dt)
        .and_then(|t| t.with_carrier_detuning(delta_p))
        .map_err(CliError::config)?;
    let omega_c = control_rabi(atom, common, p.pc_dbm)?;
    let control = DriveSpec::cw(omega_c, delta_c).map_err(CliError::config)?;
    if !(p.tol > 0.0) {
        return Err(CliError::config("--tol must be positive"));
    }
    if p.narrowband && delta_c != 0.0 {
        return Err(CliError::config("--narrowband assumes a resonant control tone (--delta-c-mhz 0)"));
    }
    let model = match p.model {
        Model::Full => BlochModel::Full,
        Model::Reduced => BlochModel::Reduced,
    };
    let opts = BlochOptions { model, tol: p.tol, atol: (1e-3 * p.tol).min(1e-12), ..Default::default() };
    let mut header = device_header(common, atom);
    header.extend([
        kv("sigma_s", format!("{sigma:.9e}")),
        kv("t0_s", format!("{t0:.9e}")),
        kv("dt_s", format!("{dt:.9e}")),
        kv("span_s", format!("{span:.9e}")),
        kv("samples", probe.len()),
        kv("omega_p_rad_s", format!("{amplitude:.9e}")),
        kv("pp_chip_dbm", if amplitude > 0.0 && atom.k_10() > 0.0 { format!("{:.6}", rabi_to_dbm(amplitude, atom.k_10(), 0.0)) } else { "-inf".into() }),
        kv("delta_p_rad_s", format!("{delta_p:.9e}")),
        kv("omega_c_rad_s", format!("{omega_c:.9e}")),
        kv("pc_chip_dbm", p.pc_dbm - common.attenuation_db),
        kv("delta_c_rad_s", format!("{delta_c:.9e}")),
        kv("model", if p.narrowband { "narrowband" } else if model == BlochModel::Full { "full" } else { "reduced" }),
        kv("tol", p.tol),
    ]);
    Ok(PulsePlan { probe, omega_c, control, opts, narrowband: p.narrowband, header })
}

fn run_pulse(atom: &AtomParams, plan: &PulsePlan) -> Result<PulseTrace, CliError> {
    if plan.narrowband {
        Ok(narrowband_output(atom, &plan.probe, plan.omega_c)?.trace)
    } else {
        Ok(simulate_output(atom, &plan.probe, &plan.control, &plan.opts)?)
    }
}

fn delay_header(est: &Result<DelayEstimate, Error>) -> Header {
    match est {
        Ok(e) => vec![
            kv("tau_d_ns", format!("{:.6}", s_to_ns(e.tau_d))),
            kv("confidence", e.confidence.as_str()),
            kv("residual_ratio", format!("{:.6e}", e.residual_ratio)),
            kv("fit_delay_ns", format!("{:.6}", s_to_ns(e.fit_delay))),
            kv("peak_delay_ns", format!("{:.6}", s_to_ns(e.peak_delay))),
        ],
        Err(e) => vec![kv("tau_d_ns", "nan"), kv("extraction_error", e)],
    }
}

pub fn pulse(common: &Common, p: &PulseArgs) -> CmdResult {
    let atom = load_device(&common.device)?;
    let plan = plan_pulse(&atom, common, p)?;
    if common.dry_run {
        return dry_run(&plan.header);
    }
    let out = run_pulse(&atom, &plan)?;
    let est = extract_delay(&plan.probe, &out);
    let mut header = plan.header.clone();
    header.extend(delay_header(&est));
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &header, &plan.probe, &out)?;
    emit(common, &buf)?;
    match est {
        Ok(e) => {
            eprintln!("tau_d_ns = {:.3} ({})", s_to_ns(e.tau_d), e.confidence.as_str());
            Ok(EXIT_OK)
        }
        Err(e) => {
            eprintln!("error: delay extraction failed: {e}");
            Ok(EXIT_EXTRACTION)
        }
    }
}

pub fn pulse_sweep(common: &Common, p: &PulseArgs, param: SweepParam, values: &[f64]) -> CmdResult {
    let atom = load_device(&common.device)?;
    let plans: Vec<PulsePlan> = values
        .iter()
        .map(|&v| {
            let mut q = p.clone();
            match param {
                SweepParam::SigmaNs => q.sigma_ns = v,
                SweepParam::DeltaPMhz => q.delta_p_mhz = v,
                SweepParam::PcDbm => q.pc_dbm = v,
                SweepParam::PpDbm => q.pp_dbm = Some(v),
            }
            plan_pulse(&atom, common, &q)
        })
        .collect::<Result<_, _>>()?;
    let name = match param {
        SweepParam::SigmaNs => "sigma_ns",
        SweepParam::DeltaPMhz => "delta_p_mhz",
        SweepParam::PcDbm => "pc_dbm",
        SweepParam::PpDbm => "pp_dbm",
    };
    let mut header = device_header(common, &atom);
    let shared = header.len();
    header.push(kv("param", name));
    if common.dry_run {
        for (v, plan) in values.iter().zip(&plans) {
            header.push(kv("run", format!("{name} = {v}")));
            header.extend(plan.header.iter().skip(shared).cloned());
        }
        return dry_run(&header);
    }
    let rows: Vec<SummaryRow> = plans
        .par_iter()
        .zip(values.par_iter())
        .map(|(plan, &v)| {
            let est = run_pulse(&atom, plan).map_err(|e| e.message).and_then(|out| {
                extract_delay(&plan.probe, &out).map_err(|e| e.to_string())
            });
            match est {
                Ok(e) => SummaryRow {
                    param: v,
                    tau_d: Some(e.tau_d),
                    confidence: e.confidence.as_str().to_string(),
                    residual_ratio: Some(e.residual_ratio),
                },
                Err(msg) => {
                    eprintln!("warning: {name} = {v}: {msg}");
                    SummaryRow { param: v, tau_d: None, confidence: "failed".into(), residual_ratio: None }
                }
            }
        })
        .collect();
    let mut buf = Vec::new();
    write_summary_csv(&mut buf, &header, &rows)?;
    emit(common, &buf)?;
    if rows.iter().all(|r| r.tau_d.is_none()) {
        eprintln!("error: delay extraction failed for every run");
        return Ok(EXIT_EXTRACTION);
    }
    Ok(EXIT_OK)
}

fn load_spectrum(path: &Path, remove_delay_ns: Option<f64>) -> Result<(ComplexSpectrum, SpectrumAxis), CliError> {
    let (s, axis) = parse_input(path, read_spectrum_csv(&read_input(path)?))?;
    Ok(match remove_delay_ns {
        Some(tau) => (s.remove_linear_phase(ns_to_s(tau), s.detunings()[0]), axis),
        None => (s, axis),
    })
}

fn fit_header(common: &Common, atom: Option<&AtomParams>, input: &Path) -> Header {
    let mut h = match atom {
        Some(a) => device_header(common, a),
        None => vec![],
    };
    h.push(kv("input", input.display()));
    h
}

pub fn fit_circle(common: &Common, input: &Path, remove_delay_ns: Option<f64>) -> CmdResult {
    let mut header = fit_header(common, None, input);
    header.push(kv("remove_delay_ns", remove_delay_ns.map_or("none".to_string(), |t| t.to_string())));
    if common.dry_run {
        return dry_run(&header);
    }
    let (s, _) = load_spectrum(input, remove_delay_ns)?;
    let c = circle_fit(s.values())?;
    let extra = vec![
        ("center".to_string(), json!([num(c.center.re), num(c.center.im)])),
        ("diameter".to_string(), num(2.0 * c.radius)),
    ];
    emit_json(common, &fit_report("fit-circle", &common.device, &c.fit, &|_| None, extra))?;
    Ok(EXIT_OK)
}

pub fn fit_spectrum(common: &Common, input: &Path, remove_delay_ns: Option<f64>) -> CmdResult {
    let header = fit_header(common, None, input);
    if common.dry_run {
        return dry_run(&header);
    }
    let (s, axis) = load_spectrum(input, remove_delay_ns)?;
    let fit = fit_weak_spectrum(&s)?;
    let rename = |n: &str| match (n, axis) {
        ("omega_10", SpectrumAxis::Detuning) => Some("resonance_offset_mhz".to_string()),
        _ => None,
    };
    emit_json(common, &fit_report("fit-spectrum", &common.device, &fit, &rename, vec![]))?;
    Ok(EXIT_OK)
}

pub fn fit_power(common: &Common, input: &Path, k10: Option<f64>, pin_attenuation_db: Option<f64>) -> CmdResult {
    let atom = load_device(&common.device)?;
    let pin = match (k10, pin_attenuation_db) {
        (None, None) => PowerPin::Attenuation(LineCalibration::FREQUENCY_DOMAIN.attenuation_db),
        (k, a) => PowerPin::from_options(k, a).map_err(CliError::config)?,
    };
    let mut header = fit_header(common, Some(&atom), input);
    header.push(kv("pin", format!("{pin:?}")));
    if common.dry_run {
        return dry_run(&header);
    }
    let pts: Vec<(f64, Complex64)> = parse_input(input, read_power_csv(&read_input(input)?))?;
    let fit = fit_power_dependence(&pts, atom.gamma_r_10(), atom.gamma_10(), pin)?;
    emit_json(common, &fit_report("fit-power", &common.device, &fit, &|_| None, vec![]))?;
    Ok(EXIT_OK)
}

pub fn fit_two_tone(common: &Common, input: &Path, delta_c_mhz: f64) -> CmdResult {
    let atom = load_device(&common.device)?;
    let mut header = fit_header(common, Some(&atom), input);
    header.push(kv("delta_c_rad_s", format!("{:.9e}", mhz_to_angular(delta_c_mhz))));
    if common.dry_run {
        return dry_run(&header);
    }
    let map = parse_input(input, read_two_tone_csv(&read_input(input)?, mhz_to_angular(delta_c_mhz)))?;
    let fit = core_fit_two_tone(&map, &atom, common.attenuation_db)?;
    emit_json(common, &fit_report("fit-two-tone", &common.device, &fit, &|_| None, vec![]))?;
    Ok(EXIT_OK)
}

pub fn features(common: &Common) -> CmdResult {
    let atom = load_device(&common.device)?;
    if common.dry_run {
        let mut header = device_header(common, &atom);
        header.push(kv("resolved_device", format_device(&atom, "").trim_end().replace('\n', "; ")));
        return dry_run(&header);
    }
    let f = core_features(&atom, common.attenuation_db);
    let v = json!({
        "device": common.device,
        "attenuation_db": num(common.attenuation_db),
        "resonant_delay_ns": opt(f.resonant_delay.map(s_to_ns)),
        "singular_control_mhz": opt(f.singular_control_rabi.map(angular_to_mhz)),
        "singular_control_dbm": opt(f.singular_control_dbm),
        "ats_threshold_mhz": num(angular_to_mhz(f.ats_threshold_rabi)),
        "ats_threshold_dbm": opt(f.ats_threshold_dbm),
        "singular_probe_mhz": opt(f.singular_probe_rabi.map(angular_to_mhz)),
        "singular_probe_dbm": opt(f.singular_probe_dbm),
        "zero_delay_boundary_mhz": f.zero_delay_boundary.map_or(Value::Null, |(a, b)| json!([num(angular_to_mhz(a)), num(angular_to_mhz(b))])),
    });
    emit_json(common, &v)?;
    Ok(EXIT_OK)
}
