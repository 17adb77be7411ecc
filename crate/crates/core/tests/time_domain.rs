use num_complex::Complex64;
use qdelay_core::devices;
use qdelay_core::time::{
    extract_delay, gaussian_probe, narrowband_output, simulate_output, BlochOptions, Confidence, PulseTrace,
};
use qdelay_core::units::{mhz_to_angular, s_to_ns};
use qdelay_core::{AtomParams, DriveSpec};

fn weak_probe(sigma_ns: f64, delta_mhz: f64) -> PulseTrace {
    let sigma = sigma_ns * 1e-9;
    let t0 = 6.0 * sigma;
    gaussian_probe(mhz_to_angular(0.166), sigma, t0, 12.0 * sigma + 1e-6, 1e-9)
        .unwrap()
        .with_carrier_detuning(mhz_to_angular(delta_mhz))
        .unwrap()
}

fn ode_delay(atom: &AtomParams, probe: &PulseTrace) -> (f64, Confidence) {
    let out = simulate_output(atom, probe, &DriveSpec::off(), &BlochOptions::default()).unwrap();
    let est = extract_delay(probe, &out).unwrap();
    (s_to_ns(est.tau_d), est.confidence)
}

#[test]
fn long_pulse_matches_narrowband_oracle() {
    let atom = devices::device2();
    for (sigma_ns, delta_mhz) in [(1040.0, 0.0), (1000.0, -1.0), (800.0, 0.8)] {
        let probe = weak_probe(sigma_ns, delta_mhz);
        let (ode, conf) = ode_delay(&atom, &probe);
        let oracle = s_to_ns(narrowband_output(&atom, &probe, 0.0).unwrap().tau_d);
        assert_eq!(conf, Confidence::Clean);
        assert!((ode - oracle).abs() <= (0.02 * oracle.abs()).max(2.0), "σ={sigma_ns} δ={delta_mhz}: {ode} vs {oracle}");
    }
}

#[test]
fn pulse_width_trend() {
    let atom = devices::device2();
    let (short, short_conf) = ode_delay(&atom, &weak_probe(105.0, 0.0));
    let (mid, _) = ode_delay(&atom, &weak_probe(728.0, 0.0));
    let (long, _) = ode_delay(&atom, &weak_probe(1040.0, 0.0));
    assert_eq!(short_conf, Confidence::LowConfidence);
    assert!(short < mid && mid < long, "{short} {mid} {long}");
}

#[test]
fn scattered_field_is_linear_in_weak_drive() {
    let atom = devices::device2();
    let base = weak_probe(300.0, 0.5);
    let scaled = |k: f64| base.with_samples(base.samples().iter().map(|z| z * k).collect()).unwrap();
    let amp = 1e-2 * atom.gamma_10() / mhz_to_angular(0.166);
    let p1 = scaled(amp);
    let p2 = scaled(2.0 * amp);
    let opts = BlochOptions::default();
    let o1 = simulate_output(&atom, &p1, &DriveSpec::off(), &opts).unwrap();
    let o2 = simulate_output(&atom, &p2, &DriveSpec::off(), &opts).unwrap();
    let s1: Vec<Complex64> = o1.samples().iter().zip(p1.samples()).map(|(o, p)| o - p).collect();
    let s2: Vec<Complex64> = o2.samples().iter().zip(p2.samples()).map(|(o, p)| o - p).collect();
    let peak = s1.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for (a, b) in s1.iter().zip(&s2) {
        assert!((b - a * 2.0).norm() <= 0.01 * 2.0 * peak);
    }
}

#[test]
fn time_shift_invariance() {
    let atom = devices::device2();
    let sigma = 200e-9;
    let k = 137;
    let a = gaussian_probe(mhz_to_angular(0.5), sigma, 1.2e-6, 3e-6, 1e-9).unwrap();
    let b = gaussian_probe(mhz_to_angular(0.5), sigma, 1.2e-6 + k as f64 * 1e-9, 3e-6, 1e-9).unwrap();
    let control = DriveSpec::cw(mhz_to_angular(1.5), 0.0).unwrap();
    let opts = BlochOptions::default();
    let oa = simulate_output(&atom, &a, &control, &opts).unwrap();
    let ob = simulate_output(&atom, &b, &control, &opts).unwrap();
    let peak = oa.abs().into_iter().fold(0.0, f64::max);
    for i in 0..a.len() - k {
        assert!((oa.samples()[i] - ob.samples()[i + k]).norm() < 1e-7 * peak);
    }
}
