// Quasi-periodic response x0 by harmonic balance, compared with the
// perturbation series in eps = 1/gamma.

use std::f64::consts::PI;

use num_complex::Complex64;

use qattract::model::{ForcingSpectrum, FrequencyVector, Nonlinearity, SystemConfig};
use qattract::qpsolve::{eval_solution, ode_residual, perturbation_series, solve, NewtonOptions};

pub fn run_example() -> qattract::Result<()> {
    let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5)?;
    let freq = FrequencyVector::periodic(1.0)?;
    for gamma in [10.0, 50.0, 200.0] {
        let cfg = SystemConfig::new(forcing.clone(), freq.clone(), Nonlinearity::odd(1)?, gamma)?;
        let sol = solve(&cfg, &NewtonOptions::default())?;
        let times: Vec<f64> = (0..256).map(|k| 2.0 * PI * k as f64 / 256.0).collect();
        let residual = times.iter().map(|&t| ode_residual(&cfg, &sol, t).abs()).fold(0.0, f64::max);
        let ser = perturbation_series(&cfg, &sol.lattice, 2)?;
        let first = sol.sup_distance(&ser.partial_sum(1), &times);
        let second = sol.sup_distance(&ser.partial_sum(2), &times);
        let (x, y) = eval_solution(&sol, 0.0);
        println!(
            "gamma {gamma:>5}: mean {:.10}, x0(0) = ({x:.6}, {y:.6}), residual {residual:.1e}, |x0 - S1| {first:.2e}, |x0 - S2| {second:.2e}",
            sol.mean()
        );
    }

    // two incommensurate frequencies
    let forcing = ForcingSpectrum::new(
        2,
        vec![(vec![0, 0], Complex64::new(2.0, 0.0)), (vec![1, 0], Complex64::new(0.2, 0.0)), (vec![0, 1], Complex64::new(0.1, 0.0))],
        2.0,
        1.0,
    )?;
    let freq = FrequencyVector::new(vec![1.0, 2f64.sqrt()], 0.1, 1.5)?;
    let cfg = SystemConfig::new(forcing, freq, Nonlinearity::odd(1)?, 10.0)?;
    let sol = solve(&cfg, &NewtonOptions::default())?;
    println!("two-frequency response: {} modes, residual {:.1e}, mean {:.8}", sol.lattice.len(), sol.residual_norm, sol.mean());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
