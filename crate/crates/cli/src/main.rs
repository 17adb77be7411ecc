use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

#[derive(Parser, Debug)]
#[command(name = "qdelay", version, about = "Reflection, group delay and pulse propagation for an atom in front of a mirror")]
pub struct Cli {
    /// Worker threads for sweeps (overrides QDELAY_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Bundled device name (device1a, device1b, device2, decoupled) or path to a device file.
    #[arg(long, default_value = "device2")]
    pub device: String,

    /// Line attenuation between the quoted powers and the atom, dB.
    #[arg(long, default_value_t = 0.0)]
    pub attenuation_db: f64,

    /// Write to this file instead of stdout.
    #[arg(short, long)]
    pub output: Option<PathBuf>,

    /// Print the resolved physical parameters and exit.
    #[arg(long)]
    pub dry_run: bool,
}

#[derive(Args, Debug, Clone)]
pub struct DetuningGrid {
    /// Probe detuning range is ±span around resonance.
    #[arg(long, default_value_t = 15.0)]
    pub span_mhz: f64,

    #[arg(long, default_value_t = 601)]
    pub points: usize,
}

#[derive(Args, Debug, Clone)]
pub struct PulseArgs {
    /// Gaussian envelope width.
    #[arg(long, default_value_t = 1040.0)]
    pub sigma_ns: f64,

    /// Pulse centre; defaults to 6σ.
    #[arg(long)]
    pub t0_ns: Option<f64>,

    #[arg(long, default_value_t = 1.0)]
    pub dt_ns: f64,

    /// Trace length; defaults to t0 + 6σ + 1 µs.
    #[arg(long)]
    pub span_ns: Option<f64>,

    /// Probe peak power (use `--pp-dbm=-inf` for no probe). Overrides --amplitude-mhz.
    #[arg(long)]
    pub pp_dbm: Option<f64>,

    /// Probe peak Rabi frequency / 2π.
    #[arg(long, default_value_t = 0.166)]
    pub amplitude_mhz: f64,

    /// Control power (CW); `-inf` turns the control off.
    #[arg(long, default_value_t = f64::NEG_INFINITY)]
    pub pc_dbm: f64,

    #[arg(long, default_value_t = 0.0)]
    pub delta_p_mhz: f64,

    #[arg(long, default_value_t = 0.0)]
    pub delta_c_mhz: f64,

    /// Relative tolerance of the integrator.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,

    #[arg(long, value_enum, default_value_t = Model::Full)]
    pub model: Model,

    /// Use the delayed-copy approximation instead of integrating.
    #[arg(long)]
    pub narrowband: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Full,
    Reduced,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    SigmaNs,
    DeltaPMhz,
    PcDbm,
    PpDbm,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reflection and group delay versus probe detuning.
    #[command(allow_negative_numbers = true)]
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: DetuningGrid,
        /// Control power; `-inf` turns the control off.
        #[arg(long, default_value_t = f64::NEG_INFINITY)]
        pc_dbm: f64,
        #[arg(long, default_value_t = 0.0)]
        delta_c_mhz: f64,
    },
    /// Reflection and group delay over control power (or a transition table) and probe detuning.
    #[command(allow_negative_numbers = true)]
    DelayMap {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: DetuningGrid,
        #[arg(long, default_value_t = -160.0)]
        pc_min_dbm: f64,
        #[arg(long, default_value_t = -110.0)]
        pc_max_dbm: f64,
        #[arg(long, default_value_t = 201)]
        pc_steps: usize,
        #[arg(long, default_value_t = 0.0)]
        delta_c_mhz: f64,
        /// CSV with omega_10_mhz,gamma_r_10_mhz,gamma_10_mhz; replaces the control-power axis.
        #[arg(long)]
        transition_table: Option<PathBuf>,
    },
    /// Simulate one probe pulse and extract its delay.
    #[command(allow_negative_numbers = true)]
    Pulse {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pulse: PulseArgs,
    },
    /// Repeat `pulse` over a list of values of one parameter.
    #[command(allow_negative_numbers = true)]
    PulseSweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pulse: PulseArgs,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
    },
    /// Circle fit of IQ points from a spectrum CSV.
    #[command(allow_negative_numbers = true)]
    FitCircle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Remove a cable delay (linear phase) before fitting.
        #[arg(long)]
        remove_delay_ns: Option<f64>,
    },
    /// Fit resonance frequency and rates to a weak-probe spectrum CSV.
    #[command(allow_negative_numbers = true)]
    FitSpectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        remove_delay_ns: Option<f64>,
    },
    /// Fit k_10 (or the attenuation) to resonant reflection versus probe power.
    #[command(allow_negative_numbers = true)]
    FitPower {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// Pin k_10 and fit the attenuation instead.
        #[arg(long)]
        k10: Option<f64>,
        /// Pin the attenuation (default: frequency-domain line calibration, 132.3 dB).
        #[arg(long)]
        pin_attenuation_db: Option<f64>,
    },
    /// Fit gamma_20 to a two-tone map CSV.
    #[command(allow_negative_numbers = true)]
    FitTwoTone {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        delta_c_mhz: f64,
    },
    /// Singular control and probe powers, ATS threshold, zero-delay boundary.
    #[command(allow_negative_numbers = true)]
    Features {
        #[command(flatten)]
        common: Common,
    },
}

fn thread_count(cli: Option<usize>) -> Result<Option<usize>, String> {
    if let Some(n) = cli {
        return Ok(Some(n));
    }
    match std::env::var("QDELAY_THREADS") {
        Ok(v) if !v.trim().is_empty() => {
            v.trim().parse::<usize>().map(Some).map_err(|_| format!("QDELAY_THREADS must be a positive integer, got {v:?}"))
        }
        _ => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match thread_count(cli.threads) {
        Ok(Some(0)) => {
            eprintln!("error: thread count must be at least 1");
            return ExitCode::from(commands::EXIT_CONFIG);
        }
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                return ExitCode::from(commands::EXIT_CONFIG);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(commands::EXIT_CONFIG);
        }
    }

    let result = match cli.command {
        Command::Spectrum { common, grid, pc_dbm, delta_c_mhz } => commands::spectrum(&common, &grid, pc_dbm, delta_c_mhz),
        Command::DelayMap { common, grid, pc_min_dbm, pc_max_dbm, pc_steps, delta_c_mhz, transition_table } => {
            commands::delay_map(&common, &grid, pc_min_dbm, pc_max_dbm, pc_steps, delta_c_mhz, transition_table.as_deref())
        }
        Command::Pulse { common, pulse } => commands::pulse(&common, &pulse),
        Command::PulseSweep { common, pulse, param, values } => commands::pulse_sweep(&common, &pulse, param, &values),
        Command::FitCircle { common, input, remove_delay_ns } => commands::fit_circle(&common, &input, remove_delay_ns),
        Command::FitSpectrum { common, input, remove_delay_ns } => commands::fit_spectrum(&common, &input, remove_delay_ns),
        Command::FitPower { common, input, k10, pin_attenuation_db } => {
            commands::fit_power(&common, &input, k10, pin_attenuation_db)
        }
        Command::FitTwoTone { common, input, delta_c_mhz } => commands::fit_two_tone(&common, &input, delta_c_mhz),
        Command::Features { common } => commands::features(&common),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
