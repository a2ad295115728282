// Trajectories with axis-crossing events: one captured by x0, one escaping
// in finite time, drawn together with the computed response.

use std::f64::consts::PI;

use qattract::integrate::{integrate, Direction, EventSpec, IntegratorSettings};
use qattract::model::{ForcingSpectrum, FrequencyVector, Nonlinearity, PhaseState, SystemConfig};
use qattract::qpsolve::{eval_solution, solve, NewtonOptions};
use qattract::svg::Plot;

pub fn run_example() -> qattract::Result<()> {
    let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5)?;
    let cfg = SystemConfig::new(forcing, FrequencyVector::periodic(1.0)?, Nonlinearity::even(1)?, 9.0)?;
    let sol = solve(&cfg, &NewtonOptions::default())?;
    let set = IntegratorSettings { t_max: 60.0, sample_interval: Some(0.02), ..Default::default() };
    let events = [EventSpec::CrossXAxis(Direction::Any)];
    let mut plot = Plot::new("trajectories").with_bounds([-4.0, 4.0, -8.0, 8.0]);
    for (name, x, y) in [("captured", 0.0, 6.0), ("escaping", -3.0, -2.0)] {
        let tr = integrate(&cfg, PhaseState::new(x, y, 0.0), &set, &events);
        println!("{name}: {:?} after {} steps, {} x-axis crossings", tr.outcome, tr.steps, tr.events.len());
        plot.add_trajectory(name, tr.samples.iter().map(|s| [s.x, s.y]).collect());
    }
    let cycle = (0..=200).map(|k| eval_solution(&sol, 2.0 * PI * k as f64 / 200.0)).map(|(x, y)| [x, y]).collect();
    plot.add_curve("x0", cycle);
    let path = std::env::temp_dir().join("qattract_trajectories.svg");
    std::fs::write(&path, plot.render())?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
