use num_complex::Complex64;
use qdelay_core::devices;
use qdelay_core::fit::{circle_fit, fit_power_dependence, fit_two_tone, fit_weak_spectrum, PowerPin, TwoToneMap};
use qdelay_core::freq::{linspace, reflection_powered, reflection_two_tone, reflection_weak, ComplexSpectrum};
use qdelay_core::units::{control_dbm_to_rabi, dbm_to_rabi, mhz_to_angular};
use qdelay_core::AtomParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const NOISE_SEED: u64 = 0x5eed_2016;
const TRIALS: usize = 100;

fn noisy(values: &[Complex64], level: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = Normal::new(0.0, level).unwrap();
    values.iter().map(|z| z + Complex64::new(n.sample(rng), n.sample(rng))).collect()
}

struct Stats {
    coverage: f64,
    bias: f64,
    bias_limit: f64,
}

fn summarize(estimates: &[(f64, f64)], truth: f64) -> Stats {
    let n = estimates.len() as f64;
    let covered = estimates.iter().filter(|(v, s)| (v - truth).abs() <= 1.96 * s).count();
    let mean = estimates.iter().map(|(v, _)| v).sum::<f64>() / n;
    let mean_stderr = estimates.iter().map(|(_, s)| s).sum::<f64>() / n;
    Stats { coverage: covered as f64 / n, bias: (mean - truth).abs(), bias_limit: 3.0 * mean_stderr / n.sqrt() }
}

#[test]
fn weak_spectrum_noise_coverage_and_bias() {
    let atom = devices::device2();
    let axis = linspace(-6.0 * atom.gamma_10(), 6.0 * atom.gamma_10(), 241);
    let clean: Vec<Complex64> = axis.iter().map(|&d| reflection_weak(&atom, d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(NOISE_SEED);
    let mut g = Vec::new();
    let mut gamma = Vec::new();
    for _ in 0..TRIALS {
        let s = ComplexSpectrum::new(axis.clone(), noisy(&clean, 0.01, &mut rng)).unwrap();
        let f = fit_weak_spectrum(&s).unwrap();
        g.push((f.value("gamma_r_10").unwrap(), f.stderr("gamma_r_10").unwrap()));
        gamma.push((f.value("gamma_10").unwrap(), f.stderr("gamma_10").unwrap()));
    }
    for (name, est, truth) in [("gamma_r_10", &g, atom.gamma_r_10()), ("gamma_10", &gamma, atom.gamma_10())] {
        let s = summarize(est, truth);
        eprintln!("{name}: coverage {:.2}, bias {:.3e} (limit {:.3e})", s.coverage, s.bias, s.bias_limit);
        assert!(s.coverage >= 0.95, "{name} coverage {}", s.coverage);
        assert!(s.bias <= s.bias_limit, "{name} bias {} > {}", s.bias, s.bias_limit);
    }
}

#[test]
fn circle_fit_noise_bias() {
    let atom = devices::device1b();
    let axis = linspace(-6.0 * atom.gamma_10(), 6.0 * atom.gamma_10(), 241);
    let clean: Vec<Complex64> = axis.iter().map(|&d| reflection_weak(&atom, d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(NOISE_SEED + 1);
    let radii: Vec<(f64, f64)> = (0..TRIALS)
        .map(|_| {
            let c = circle_fit(&noisy(&clean, 0.01, &mut rng)).unwrap();
            (c.radius, c.fit.stderr("radius").unwrap())
        })
        .collect();
    let s = summarize(&radii, atom.gamma_r_10() / (2.0 * atom.gamma_10()));
    eprintln!("radius: coverage {:.2}, bias {:.3e} (limit {:.3e})", s.coverage, s.bias, s.bias_limit);
    assert!(s.bias <= s.bias_limit);
}

#[test]
fn two_tone_noise_bias() {
    let atom = devices::device2();
    let dbm: Vec<f64> = (0..=15).map(|i| -150.0 + 2.0 * i as f64).collect();
    let d = linspace(-mhz_to_angular(10.0), mhz_to_angular(10.0), 81);
    let mut clean = Vec::new();
    for p in &dbm {
        let oc = control_dbm_to_rabi(*p, atom.k_10(), 0.0);
        clean.extend(d.iter().map(|&x| reflection_two_tone(&atom, x, oc, 0.0)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(NOISE_SEED + 2);
    let est: Vec<(f64, f64)> = (0..TRIALS)
        .map(|_| {
            let map = TwoToneMap::new(dbm.clone(), d.clone(), noisy(&clean, 0.01, &mut rng), 0.0).unwrap();
            let f = fit_two_tone(&map, &atom, 0.0).unwrap();
            (f.value("gamma_20").unwrap(), f.stderr("gamma_20").unwrap())
        })
        .collect();
    let s = summarize(&est, atom.gamma_20());
    eprintln!("gamma_20: coverage {:.2}, bias {:.3e} (limit {:.3e})", s.coverage, s.bias, s.bias_limit);
    assert!(s.bias <= s.bias_limit);
}

#[test]
fn power_fit_noise_bias() {
    let atom = devices::device2();
    let dbm: Vec<f64> = (0..25).map(|i| -30.0 + i as f64).collect();
    let clean: Vec<Complex64> =
        dbm.iter().map(|p| reflection_powered(&atom, 0.0, dbm_to_rabi(*p, atom.k_10(), 132.3))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(NOISE_SEED + 3);
    let est: Vec<(f64, f64)> = (0..TRIALS)
        .map(|_| {
            let pts: Vec<(f64, Complex64)> = dbm.iter().copied().zip(noisy(&clean, 0.01, &mut rng)).collect();
            let f = fit_power_dependence(&pts, atom.gamma_r_10(), atom.gamma_10(), PowerPin::Attenuation(132.3)).unwrap();
            (f.value("k_10").unwrap(), f.stderr("k_10").unwrap())
        })
        .collect();
    let s = summarize(&est, atom.k_10());
    eprintln!("k_10: coverage {:.2}, bias {:.3e} (limit {:.3e})", s.coverage, s.bias, s.bias_limit);
    assert!(s.bias <= s.bias_limit);
}

#[test]
fn noiseless_round_trips_are_tight() {
    let atom = AtomParams::builder()
        .omega_10(mhz_to_angular(6000.0))
        .gamma_r_10(mhz_to_angular(4.1))
        .gamma_10(mhz_to_angular(2.9))
        .k_10(1.1e15)
        .gamma_r_21(mhz_to_angular(8.0))
        .gamma_20(mhz_to_angular(5.5))
        .build()
        .unwrap();
    let axis = linspace(-8.0 * atom.gamma_10(), 8.0 * atom.gamma_10(), 321);
    let s = ComplexSpectrum::from_fn(axis, |d| reflection_weak(&atom, d)).unwrap();
    let f = fit_weak_spectrum(&s).unwrap();
    assert!((f.value("gamma_r_10").unwrap() / atom.gamma_r_10() - 1.0).abs() < 1e-3);
    assert!((f.value("gamma_10").unwrap() / atom.gamma_10() - 1.0).abs() < 1e-3);

    let pts: Vec<(f64, Complex64)> = (0..20)
        .map(|i| {
            let p = -160.0 + 1.5 * i as f64;
            (p, reflection_powered(&atom, 0.0, dbm_to_rabi(p, atom.k_10(), 0.0)))
        })
        .collect();
    let f = fit_power_dependence(&pts, atom.gamma_r_10(), atom.gamma_10(), PowerPin::Attenuation(0.0)).unwrap();
    assert!((f.value("k_10").unwrap() / atom.k_10() - 1.0).abs() < 1e-3);

    let dbm: Vec<f64> = (0..=20).map(|i| -150.0 + i as f64).collect();
    let d = linspace(-mhz_to_angular(20.0), mhz_to_angular(20.0), 101);
    let mut values = Vec::new();
    for p in &dbm {
        let oc = control_dbm_to_rabi(*p, atom.k_10(), 0.0);
        values.extend(d.iter().map(|&x| reflection_two_tone(&atom, x, oc, 0.0)));
    }
    let f = fit_two_tone(&TwoToneMap::new(dbm, d, values, 0.0).unwrap(), &atom, 0.0).unwrap();
    assert!((f.value("gamma_20").unwrap() / atom.gamma_20() - 1.0).abs() < 1e-3);
}
