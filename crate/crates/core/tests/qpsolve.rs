use approx::assert_relative_eq;
use qattract::model::{
    equilibrium_c0, ForcingSpectrum, FrequencyVector, Nonlinearity, PhaseState, SystemConfig,
};
use qattract::qpsolve::{
    eval_solution, harmonic_balance_solve, ode_residual, orbit_distance, perturbation_series, solve,
    uniqueness_probe, FourierLattice, NewtonOptions,
};
use qattract::report::halton;

fn odd_sine(gamma: f64) -> SystemConfig {
    let f = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5).unwrap();
    SystemConfig::new(f, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::odd(1).unwrap(), gamma).unwrap()
}

fn even_periodic(p: u32) -> SystemConfig {
    let f = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5).unwrap();
    SystemConfig::new(f, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::even(p).unwrap(), 9.0).unwrap()
}

#[test]
fn constant_forcing_gives_constant_solution() {
    let cfg = SystemConfig::new(
        ForcingSpectrum::constant(2.5).unwrap(),
        FrequencyVector::periodic(1.0).unwrap(),
        Nonlinearity::odd(1).unwrap(),
        10.0,
    )
    .unwrap();
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    assert_relative_eq!(sol.mean(), 2.5f64.cbrt(), max_relative = 1e-13);
    for (nu, c) in &sol.coeffs {
        if nu[0] != 0 {
            assert!(c.norm() < 1e-14);
        }
    }
    assert!(eval_solution(&sol, 1.234).1.abs() < 1e-14);
}

#[test]
fn even_periodic_residual_certificate() {
    let cfg = even_periodic(1);
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    assert!(sol.residual_norm <= 1e-10 * 2.5);
    let worst = (1..=1000).map(|k| ode_residual(&cfg, &sol, 200.0 * halton(k, 2)).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-9, "ODE residual {worst}");
    // near (sqrt 2.5, 0)
    let (x, y) = eval_solution(&sol, 0.0);
    assert!((x - 2.5f64.sqrt()).abs() < 0.5 && y.abs() < 1.0);
}

#[test]
fn first_harmonic_amplitude_scales_like_beta_over_gamma() {
    let cfg = odd_sine(10.0);
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    let amp = 2.0 * sol.get(&[1]).norm();
    assert!((amp * 10.0 / 1.5 - 1.0).abs() < 0.2, "amplitude {amp}");
}

#[test]
fn first_order_term_is_minus_beta_cos() {
    let beta = 1.5;
    let cfg = odd_sine(10.0);
    let lat = FourierLattice::new(1, 16).unwrap();
    let ser = perturbation_series(&cfg, &lat, 3).unwrap();
    assert_relative_eq!(ser.terms[0].mean(), 2.5f64.cbrt(), max_relative = 1e-14);
    for k in 0..20 {
        let t = 0.37 * k as f64;
        let (x1, _) = eval_solution(&ser.terms[1], t);
        assert!((x1 + beta * t.cos()).abs() < 1e-12);
    }
    // numeric fit of (x0 - c0)/eps at gamma = 1000
    let cfg = odd_sine(1000.0);
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    let c0 = equilibrium_c0(&cfg.g, 2.5).unwrap();
    for k in 0..20 {
        let t = 0.37 * k as f64;
        let fit = (eval_solution(&sol, t).0 - c0) * 1000.0;
        // next term is eps x^(2), |x^(2)| < 10
        assert!((fit + beta * t.cos()).abs() < 1e-2, "t={t} fit={fit}");
    }
}

#[test]
fn constant_forcing_series_vanishes() {
    let cfg = SystemConfig::new(
        ForcingSpectrum::constant(2.5).unwrap(),
        FrequencyVector::periodic(1.0).unwrap(),
        Nonlinearity::odd(1).unwrap(),
        10.0,
    )
    .unwrap();
    let ser = perturbation_series(&cfg, &FourierLattice::new(1, 8).unwrap(), 4).unwrap();
    for term in &ser.terms[1..] {
        let worst = term.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(worst < 1e-13, "{worst}");
    }
}

#[test]
fn second_order_series_matches_balance_to_third_order() {
    let mut errs = Vec::new();
    let gammas = [50.0, 100.0, 200.0];
    for &g in &gammas {
        let cfg = odd_sine(g);
        let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
        let ser = perturbation_series(&cfg, &sol.lattice, 2).unwrap();
        let approx = ser.partial_sum(2);
        let times: Vec<f64> = (0..512).map(|k| 2.0 * std::f64::consts::PI * k as f64 / 512.0).collect();
        errs.push(sol.sup_distance(&approx, &times));
    }
    let slope = loglog_slope(&gammas.map(|g| 1.0 / g), &errs);
    assert!((slope - 3.0).abs() <= 0.3, "slope {slope}, errors {errs:?}");
}

fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

#[test]
fn derivative_and_mean_checks() {
    let cfg = even_periodic(1);
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    let h = 1e-5;
    for k in 0..50 {
        let t = 0.91 * k as f64;
        let fd = (eval_solution(&sol, t + h).0 - eval_solution(&sol, t - h).0) / (2.0 * h);
        let d = eval_solution(&sol, t).1;
        assert!((fd - d).abs() <= 1e-6 * d.abs().max(1e-3), "t={t}");
    }
    // ergodic mean with an irrational stride
    // golden stride with a Fibonacci sample count keeps the Weyl sums tiny
    let stride = 2.0 * std::f64::consts::PI * 0.618_033_988_749_894_9;
    let n = 10_946;
    let m: f64 = (0..n).map(|k| eval_solution(&sol, stride * k as f64).0).sum::<f64>() / n as f64;
    assert!((m - sol.mean()).abs() < 1e-8, "{m} vs {}", sol.mean());
}

#[test]
fn orbit_distance_translation() {
    let cfg = even_periodic(1);
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    let (x, y) = eval_solution(&sol, 2.0);
    assert!(orbit_distance(&sol, &PhaseState::new(x, y, 2.0)) < 1e-12);
    assert!((orbit_distance(&sol, &PhaseState::new(x + 1e-3, y, 2.0)) - 1e-3).abs() < 1e-12);
}

#[test]
fn uniqueness_probe_finds_one_solution() {
    let cfg = odd_sine(10.0);
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    let runs = uniqueness_probe(&cfg, &sol, 20, 0.5);
    let converged: Vec<f64> = runs.into_iter().filter_map(|r| r.ok()).collect();
    assert!(!converged.is_empty());
    assert!(converged.iter().all(|d| *d < 1e-8), "{converged:?}");
}

#[test]
fn two_frequency_golden_mean_solution() {
    let phi = 0.5 * (1.0 + 5f64.sqrt());
    let q = num_complex::Complex64::new(0.25, 0.0);
    let f = ForcingSpectrum::new(2, [(vec![0, 0], num_complex::Complex64::new(2.5, 0.0)), (vec![1, 0], q), (vec![0, 1], q)], 3.0, 1.0)
        .unwrap();
    let cfg = SystemConfig::new(f, FrequencyVector::new(vec![1.0, phi], 0.3, 1.1).unwrap(), Nonlinearity::odd(1).unwrap(), 40.0)
        .unwrap();
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    assert!(sol.residual_norm <= 2.5e-10);
    let worst = (1..=200).map(|k| ode_residual(&cfg, &sol, 100.0 * halton(k, 3)).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-8, "{worst}");
    let ser = perturbation_series(&cfg, &sol.lattice, 3).unwrap();
    let times: Vec<f64> = (0..200).map(|k| 0.5 * k as f64).collect();
    let d: Vec<f64> = (1..=3).map(|k| sol.sup_distance(&ser.partial_sum(k), &times)).collect();
    assert!(d[0] > d[1] && d[1] > d[2] && d[1] < 1e-3, "{d:?}");
}

#[test]
fn too_coarse_lattice_is_rejected() {
    let f = ForcingSpectrum::new(
        1,
        [(vec![0], num_complex::Complex64::new(2.5, 0.0)), (vec![3], num_complex::Complex64::new(0.01, 0.0))],
        3.0,
        0.5,
    )
    .unwrap();
    let cfg = SystemConfig::new(f, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::odd(1).unwrap(), 10.0).unwrap();
    assert!(harmonic_balance_solve(&cfg, &FourierLattice::new(1, 2).unwrap(), None).is_err());
}

#[test]
fn resonant_frequencies_raise_small_divisor() {
    let q = num_complex::Complex64::new(0.1, 0.0);
    let f = ForcingSpectrum::new(2, [(vec![0, 0], num_complex::Complex64::new(2.5, 0.0)), (vec![1, 0], q)], 3.0, 1.0).unwrap();
    let cfg = SystemConfig::new(f, FrequencyVector::new(vec![1.0, 1.0], 0.3, 1.5).unwrap(), Nonlinearity::odd(1).unwrap(), 10.0)
        .unwrap();
    let err = perturbation_series(&cfg, &FourierLattice::new(2, 3).unwrap(), 2).unwrap_err();
    assert!(matches!(err, qattract::Error::NotDiophantine { .. } | qattract::Error::SmallDivisorOverflow { .. }));
}
