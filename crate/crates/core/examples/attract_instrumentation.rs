// Odd case: stiffness ratio bounds, friction envelope, the level set S and
// the trajectory-level checks on the error system.

use qattract::attract::{
    cycle_decrement, error_decay, liouville_clock, quadrant_transit_check, s_boundary_flux, setup, verify_sandwich,
};
use qattract::model::{ForcingSpectrum, FrequencyVector, Nonlinearity, SystemConfig};
use qattract::qpsolve::{solve, NewtonOptions};

pub fn run_example() -> qattract::Result<()> {
    let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5)?;
    let cfg = SystemConfig::new(forcing, FrequencyVector::periodic(1.0)?, Nonlinearity::odd(1)?, 10.0)?;
    let sol = solve(&cfg, &NewtonOptions::default())?;
    let st = setup(&cfg, &sol)?;
    println!("alpha {:.6}", st.alpha);
    println!("R in [{:.4}, {:.4}] from {} samples", st.rb.r1, st.rb.r2, st.rb.sample_count);
    println!("B1 {:.4}, B2 {:.4}, w~ {:.4}", st.fb.b1, st.fb.b2, st.fb.wtilde);
    println!("S: level {:.3}, y intercept {:.3}, xi intercepts {:.3} / {:.3}", st.s.energy_level, st.s.y_intercept, st.s.xi_intercept, st.s.xi_intercept_neg);

    let flux = s_boundary_flux(&cfg, &sol, &st.s, 360, 50);
    println!("S boundary: {} outward samples, {} outside the predicted band", flux.details["outward_points"], flux.details["outside_predicted_band"]);

    let sandwich = verify_sandwich(&cfg, &sol, Some(&st.s), 4.0 * st.s.xi_intercept, 200, 50)?;
    println!("sandwich outside S: pass {}, worst margin {:.3}", sandwich.pass, sandwich.worst_margin);

    let ics: Vec<(f64, f64)> = (1..=4).flat_map(|k| [(k as f64, k as f64), (-(k as f64), -(k as f64))]).collect();
    let (rep, transits) = quadrant_transit_check(&cfg, &sol, &ics, 50.0);
    println!("quadrant transit: pass {}, first transit at t = {:.4} (bound {:.4})", rep.pass, transits[0].time, transits[0].bound);

    let y0 = 100.0 * st.s.y_intercept;
    let c = cycle_decrement(&cfg, &sol, &st.s, y0, 400.0);
    println!("from (0, {y0:.0}): {} turns before entering S, smallest decrement {:.3e}", c.decrements.len(), c.min_decrement().unwrap_or(f64::NAN));

    let clock = liouville_clock(&cfg, &sol, st.alpha, (8.0, -30.0), 20.0)?;
    println!("Liouville clock: tau(20) = {:.4}, strictly increasing {}", clock.tau.last().unwrap(), clock.strictly_increasing());
    println!("|error| after t = 60 from (8, -30): {:.2e}", error_decay(&cfg, &sol, 8.0, -30.0, 60.0));
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
