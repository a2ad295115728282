// Basin of x0 for x'' + 9x' + x^2 = 2.5 + 1.5 sin t on a coarse grid, with
// the hexagon and the section-5 set checked for containment and drawn over it.

use qattract::basin::{containment_check, sweep, Budget, GridSpec, Label};
use qattract::invariants::{build_hexagon, build_section5_set, union_d0};
use qattract::model::{equilibrium_c0, ForcingSpectrum, FrequencyVector, Nonlinearity, SystemConfig};
use qattract::qpsolve::{solve, NewtonOptions};
use qattract::svg::Plot;

pub fn run_example() -> qattract::Result<()> {
    let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5)?;
    let cfg = SystemConfig::new(forcing, FrequencyVector::periodic(1.0)?, Nonlinearity::even(1)?, 9.0)?;
    let sol = solve(&cfg, &NewtonOptions::default())?;
    let grid: GridSpec = "-4:4:24,-10:10:24".parse()?;
    let map = sweep(&cfg, &sol, &grid, &Budget::new(150.0), None)?;
    println!(
        "{} points: {} attracted, {} blown up, {} undecided",
        grid.len(),
        map.count(Label::Attracted),
        map.count(Label::BlownUp),
        map.count(Label::Undecided)
    );
    print!("{}", map.to_matrix());

    let hex = build_hexagon(1, 1.0, 2.0, 9.0)?;
    let d = build_section5_set(equilibrium_c0(&cfg.g, 2.5)?, 9.0, 1.0)?;
    for (name, region) in [("A", &hex.region), ("D", &d.region)] {
        let rep = containment_check(&map, region);
        println!("{name}: pass {}, attracted fraction {}", rep.pass, rep.details["fraction_attracted"]);
    }
    let mut plot = Plot::new("basin with A and D");
    plot.add_basin(map);
    plot.add_region("A", hex.region.clone());
    plot.add_region("D", d.region.clone());
    plot.add_region("D0", union_d0(&d.region, &hex.region));
    let path = std::env::temp_dir().join("qattract_basin.svg");
    std::fs::write(&path, plot.render())?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
