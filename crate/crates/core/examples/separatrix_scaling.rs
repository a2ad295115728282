// Even case with nearly constant forcing: the basin boundary on the negative
// x-axis approaches -c0 like gamma^(-1/2).

use qattract::basin::{boundary_crossing, Budget};
use qattract::invariants::{build_section5_set, separatrix_eval};
use qattract::model::{ForcingSpectrum, FrequencyVector, Nonlinearity, SystemConfig};
use qattract::qpsolve::{solve, NewtonOptions};

pub fn run_example() -> qattract::Result<()> {
    let c0 = 2.5f64.sqrt();
    println!("separatrix top at x = c0: y = {:.5}", separatrix_eval(c0, c0).0);
    for gamma in [25.0, 100.0] {
        let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 0.25)?;
        let cfg = SystemConfig::new(forcing, FrequencyVector::periodic(1.0)?, Nonlinearity::even(1)?, gamma)?;
        let sol = solve(&cfg, &NewtonOptions::default())?;
        let (x, _) = boundary_crossing(&cfg, &sol, (-c0 + 1.0, 0.0), (-c0 - 1.0, 0.0), 0.0, &Budget::new(4000.0), 1e-3)?;
        let d = build_section5_set(c0, gamma, 1.0)?;
        println!(
            "gamma {gamma:>5}: crossing {x:.4}, |x + c0| {:.4} (3/sqrt(gamma) = {:.4}); D reaches x = {:.4}",
            (x + c0).abs(),
            3.0 / gamma.sqrt(),
            d.xi_neg_crossing
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
