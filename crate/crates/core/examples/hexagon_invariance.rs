// Even case: the positively invariant hexagon for x'' + 9x' + x^(2p) = 2.5 + 1.5 sin t,
// its threshold and sampled boundary flux, and the SVG overlay.

use qattract::invariants::{build_hexagon, hexagon_threshold, VERTEX_NAMES};
use qattract::model::{ForcingBounds, ForcingSpectrum, FrequencyVector, Nonlinearity, SystemConfig};
use qattract::svg::Plot;

pub fn run_example() -> qattract::Result<()> {
    let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5)?;
    let mut plot = Plot::new("hexagons, p = 1, 2, 3");
    for p in 1..=3 {
        let cfg = SystemConfig::new(forcing.clone(), FrequencyVector::periodic(1.0)?, Nonlinearity::even(p)?, 9.0)?;
        let fb = ForcingBounds::compute(&cfg.forcing, p);
        let (reality, j_below) = hexagon_threshold(p, fb.f_pow, fb.big_f_pow);
        let hex = build_hexagon(p, fb.f_pow, fb.big_f_pow, cfg.gamma)?;
        println!("p = {p}: gamma^2 = 81 vs threshold max({reality:.3}, {j_below:.3}); lambda1 {:.5}, lambda2 {:.5}", hex.lambda1, hex.lambda2);
        for (name, v) in VERTEX_NAMES.iter().zip(hex.vertices) {
            print!("  {name} ({:.3}, {:.3})", v[0], v[1]);
        }
        println!();
        let rep = hex.verify_flux(Some(&cfg), 400, 40);
        println!("  flux check: pass {}, worst margin {:.2e}, {} samples", rep.pass, rep.worst_margin, rep.samples);
        plot.add_region(&format!("p={p}"), hex.region.clone());
    }
    match build_hexagon(2, 1.0, 4f64.powf(0.25), 3.0) {
        Err(e) => println!("gamma = 3, p = 2: {e}"),
        Ok(_) => println!("gamma = 3, p = 2 unexpectedly admitted"),
    }
    let path = std::env::temp_dir().join("qattract_hexagons.svg");
    std::fs::write(&path, plot.render())?;
    println!("wrote {}", path.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> qattract::Result<()> {
    run_example()
}
