// Even case: the threshold root xi, the curve parameter b and finite-time
// blow-up from the region S(-X0) before t_inf = 2 / (b sqrt(u0)).

use qattract::integrate::{integrate, IntegratorSettings};
use qattract::invariants::{blowup_time_bound, build_blowup_region, choose_b, h_sign_changes, solve_xi_root};
use qattract::model::{ForcingSpectrum, FrequencyVector, Nonlinearity, PhaseState, SystemConfig};

pub fn run_example() -> qattract::Result<()> {
    let (p, f, big_f, gamma) = (1, 1.0, 2.0, 9.0);
    let xi = solve_xi_root(p, f, big_f, gamma)?;
    println!("xi = {xi:.6} ({} sign change of h on [-1e3, -2])", h_sign_changes(p, f, big_f, gamma, -1e3, -2.0, 10_000));
    for x0 in [6.0, 10.0, 50.0] {
        println!("X0 = {x0}: b = {:.5}", choose_b(p, big_f, gamma, x0)?);
    }
    let region = build_blowup_region(p, f, big_f, gamma, 6.0)?;
    let (j, s) = region.verify_flux(None, 400, 0);
    println!("flux into J: pass {}; into S(-X0): pass {}", j.pass, s.pass);

    let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5)?;
    let cfg = SystemConfig::new(forcing, FrequencyVector::periodic(1.0)?, Nonlinearity::even(p)?, gamma)?;
    println!("{:>6} {:>10} {:>10} {:>10}", "u0", "y0", "t_blowup", "t_inf");
    for u0 in [0.5, 2.0, 8.0, 32.0] {
        let x = -region.big_x0 - u0;
        let y = 0.5 * (-region.b * u0.powf(1.5) + (big_f.powi(2) - x * x) / gamma);
        let set = IntegratorSettings { t_max: 50.0, record: false, ..Default::default() };
        let tr = integrate(&cfg, PhaseState::new(x, y, 0.0), &set, &[]);
        let t = tr.outcome.blowup_time().unwrap_or(f64::NAN);
        println!("{u0:>6.1} {y:>10.3} {t:>10.5} {:>10.5}", blowup_time_bound(region.b, u0));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
