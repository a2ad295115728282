use proptest::prelude::*;
use qattract::integrate::{integrate, integrate_observed, DenseSegment, IntegratorSettings};
use qattract::invariants::*;
use qattract::model::{ForcingSpectrum, FrequencyVector, Nonlinearity, PhaseState, SystemConfig};
use qattract::region::RegionSpec;
use qattract::report::halton;
use qattract::Error;

fn even_periodic(p: u32) -> SystemConfig {
    let f = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5).unwrap();
    SystemConfig::new(f, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::even(p).unwrap(), 9.0).unwrap()
}

fn roots(p: u32) -> (f64, f64) {
    let e = 1.0 / (2.0 * p as f64);
    (1.0f64.powf(e), 4.0f64.powf(e))
}

#[test]
fn hexagon_even_periodic_vertices() {
    let h = build_hexagon(1, 1.0, 2.0, 9.0).unwrap();
    assert!((h.lambda1 - 2.13278).abs() < 1e-5);
    assert!((h.lambda2 - 2.25).abs() < 1e-12);
    let yh = h.lambda1 * 4.0;
    assert!((yh - 8.5311).abs() < 1e-3);
    assert_eq!(h.vertex("G").unwrap(), [-1.0, yh]);
    assert_eq!(h.vertex("H").unwrap(), [0.0, yh]);
    assert_eq!(h.vertex("I").unwrap(), [2.0, 0.0]);
    assert_eq!(h.vertex("J").unwrap(), [2.0, -6.75]);
    assert_eq!(h.vertex("K").unwrap(), [0.0, -6.75]);
    assert_eq!(h.vertex("L").unwrap(), [-1.0, 0.0]);
    assert!(h.region.closure_gap() < 1e-12);
    // independent oracle: lambda1 is a root of 2pF^(2p-1) l^2 - gamma l + 1
    assert!((4.0 * h.lambda1 * h.lambda1 - 9.0 * h.lambda1 + 1.0).abs() < 1e-12);
}

#[test]
fn hexagon_threshold_cases() {
    let err = build_hexagon(1, 1.0, 2.0, 3.9).unwrap_err();
    match err {
        Error::GammaBelowThreshold { gamma_sq, reality, j_below } => {
            assert!((gamma_sq - 15.21).abs() < 1e-12);
            assert_eq!(reality, 16.0);
            assert_eq!(j_below, 4.0);
        }
        e => panic!("{e:?}"),
    }
    // zero discriminant
    let h = build_hexagon(1, 1.0, 2.0, 4.0).unwrap();
    assert!((h.lambda1 - 4.0 / 8.0).abs() < 1e-15);
}

#[test]
fn hexagon_threshold_holds_for_even_periodic_p123() {
    for p in 1..=3 {
        let (f, big_f) = roots(p);
        let (a, b) = hexagon_threshold(p, f, big_f);
        assert!(81.0 >= a.max(b), "p={p}: {a} {b}");
    }
}

#[test]
fn lambda1_exceeds_inverse_gamma() {
    for p in 1..=3 {
        let (f, big_f) = roots(p);
        for k in 0..40 {
            let gamma = 9.0 * 1.2f64.powi(k);
            let h = build_hexagon(p, f, big_f, gamma).unwrap();
            assert!(h.lambda1 >= 1.0 / gamma);
        }
    }
}

#[test]
fn hexagon_flux_is_inward_for_p123() {
    for p in 1..=3 {
        let (f, big_f) = roots(p);
        let h = build_hexagon(p, f, big_f, 9.0).unwrap();
        let cfg = even_periodic(p);
        let rep = h.verify_flux(Some(&cfg), 1000, 100);
        assert!(rep.pass, "p={p}: {}", rep.to_json());
    }
}

#[test]
fn lambda1_outside_root_interval_fails_on_hi() {
    let h = build_hexagon(1, 1.0, 2.0, 9.0).unwrap();
    // halving keeps lambda1 between the roots of 4 l^2 - 9 l + 1, so HI stays inward
    let halved = HexagonA::from_lambdas(1, 1.0, 2.0, 9.0, 0.5 * h.lambda1, h.lambda2);
    assert!(halved.verify_flux(None, 1000, 0).pass);
    let small_root = (9.0 - 65f64.sqrt()) / 8.0;
    let bad = HexagonA::from_lambdas(1, 1.0, 2.0, 9.0, 0.5 * small_root, h.lambda2);
    let rep = bad.verify_flux(None, 1000, 0);
    assert!(!rep.pass);
    assert_eq!(rep.details["worst"]["arc"], 1);
}

#[test]
fn disk_above_hexagon_is_not_invariant() {
    let h = build_hexagon(1, 1.0, 2.0, 9.0).unwrap();
    let disk = RegionSpec::disk([0.0, 20.0], 2.0);
    let fields = qattract::region::FluxFields { extremes: Some(h.extreme_fields()), field: None, times: vec![] };
    assert!(!qattract::region::verify_inward_flux(&disk, &fields, 400).pass);
}

fn stays_inside(cfg: &SystemConfig, region: &RegionSpec, x: f64, y: f64, t_max: f64) -> f64 {
    let set = IntegratorSettings { t_max, record: false, ..Default::default() };
    let mut worst = f64::NEG_INFINITY;
    let mut obs = |seg: &DenseSegment| {
        for k in 1..=4 {
            let s = seg.eval(seg.t0 + seg.h * k as f64 / 4.0);
            worst = worst.max(region.violation(s[0], s[1]));
        }
        true
    };
    integrate_observed(cfg, PhaseState::new(x, y, 0.0), &set, &[], &mut obs);
    worst
}

#[test]
fn trajectories_from_hexagon_stay_inside() {
    for p in 1..=3 {
        let (f, big_f) = roots(p);
        let h = build_hexagon(p, f, big_f, 9.0).unwrap();
        let cfg = even_periodic(p);
        let bb = h.region.bbox().unwrap();
        let mut n = 0;
        let mut k = 0;
        while n < 50 {
            k += 1;
            let x = bb[0] + (bb[1] - bb[0]) * halton(k, 2);
            let y = bb[2] + (bb[3] - bb[2]) * halton(k, 3);
            if !h.contains(x, y) {
                continue;
            }
            n += 1;
            let w = stays_inside(&cfg, &h.region, x, y, 200.0);
            assert!(w <= 1e-6, "p={p} start ({x},{y}) excursion {w}");
        }
    }
}

#[test]
fn xi_root_even_periodic() {
    let xi = solve_xi_root(1, 1.0, 2.0, 9.0).unwrap();
    // independent oracle: h(-x) for p = 1 is -2x^3 + 8x - 243 after the sign flip
    let q = |x: f64| 2.0 * x.powi(3) - 8.0 * x - 243.0;
    let (mut a, mut b) = (2.0, 10.0);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if q(m) > 0.0 { b = m } else { a = m }
    }
    assert!((xi - a).abs() < 1e-10);
    assert!((xi - 5.222).abs() < 0.01);
    assert!(h_blowup(1, 1.0, 2.0, 9.0, -2.0) < 0.0);
    assert!((h_blowup(1, 1.0, 2.0, 9.0, -2.0) + 243.0).abs() < 1e-12);
    assert_eq!(h_sign_changes(1, 1.0, 2.0, 9.0, -1e3, -2.0, 1000), 1);
}

#[test]
fn xi_root_grows_with_gamma() {
    let mut prev = 0.0;
    for k in 0..12 {
        let gamma = 5.0 * 1.5f64.powi(k);
        let xi = solve_xi_root(1, 1.0, 2.0, gamma).unwrap();
        assert!(xi > prev && xi > 2.0);
        prev = xi;
    }
}

#[test]
fn choose_b_even_periodic() {
    let b = choose_b(1, 2.0, 9.0, 6.0).unwrap();
    // closed form: b^2 (81 + 72) = 48
    let oracle = 0.9 * (48.0f64 / 153.0).sqrt();
    assert!((b - oracle).abs() < 1e-14);
    for k in 0..=1000 {
        let v = 100.0 * k as f64 / 1000.0;
        assert!(m_blowup(1, 2.0, 9.0, 6.0, b, v) >= 0.0);
        assert!(l_blowup(1, 2.0, 9.0, 6.0, b, v) >= v * v * m_blowup(1, 2.0, 9.0, 6.0, b, v) - 1e-9);
    }
    for k in 0..=300 {
        let v = 10f64.powf(-3.0 + 6.0 * k as f64 / 300.0);
        assert!(l_blowup(1, 2.0, 9.0, 6.0, b, v) >= 0.0);
    }
    assert!(choose_b(1, 2.0, 9.0, 1.0).is_err());
}

#[test]
fn blowup_region_membership() {
    let r = build_blowup_region(1, 1.0, 2.0, 9.0, 6.0).unwrap();
    assert!(r.b <= 0.625);
    assert!(r.contains(-10.0, -5.0));
    assert!(!r.contains(0.0, 0.0));
    assert!(r.j_set.contains(-10.0, -5.0));
    assert_eq!(r.x_min, -300.0);
    assert!(r.s_set.closure_gap() < 1e-9);
    assert!(r.j_set.closure_gap() < 1e-9);
    let (j, s) = r.verify_flux(Some(&even_periodic(1)), 1000, 100);
    assert!(j.pass, "{}", j.to_json());
    assert!(s.pass, "{}", s.to_json());
    assert!(build_blowup_region(1, 1.0, 2.0, 9.0, 5.0).is_err());
}

#[test]
fn blowup_before_bound() {
    let r = build_blowup_region(1, 1.0, 2.0, 9.0, 6.0).unwrap();
    let cfg = even_periodic(1);
    let mut times = Vec::new();
    for k in 0..6 {
        let u0 = 0.5 + 2.0 * k as f64;
        let x = -6.0 - u0;
        let top = -r.b * u0.powf(1.5);
        let bottom = (4.0 - x * x) / 9.0;
        let y = 0.5 * (top + bottom);
        assert!(r.contains(x, y));
        let set = IntegratorSettings { t_max: 100.0, record: false, ..Default::default() };
        let tr = integrate(&cfg, PhaseState::new(x, y, 0.0), &set, &[]);
        let t = tr.outcome.blowup_time().expect("blow-up");
        assert!(t < blowup_time_bound(r.b, u0), "u0={u0}: {t}");
        times.push(t);
    }
    assert!(times.windows(2).all(|w| w[1] < w[0]), "{times:?}");
}

#[test]
fn section5_set_and_separatrix() {
    let c0 = 2.5f64.sqrt();
    assert!(separatrix_eval(c0, 2.0 * c0).0.abs() < 1e-6);
    assert!(separatrix_eval(c0, -c0).0.abs() < 1e-6);
    let top = separatrix_eval(c0, c0).0;
    assert!((top - (8.0 * c0.powi(3) / 3.0).sqrt()).abs() < 1e-12);
    assert!((top - 3.244).abs() < 5e-3);
    let scan = (0..=3000).map(|k| separatrix_eval(c0, -c0 + 3.0 * c0 * k as f64 / 3000.0).0).fold(0.0, f64::max);
    assert!((scan - top).abs() < 1e-9);
    assert!(separatrix_eval(c0, 5.0).0.is_nan());

    let d = build_section5_set(c0, 9.0, 1.0).unwrap();
    assert!((d.xi_neg_crossing - (-2.0 * c0 + 1.0 / 3.0)).abs() < 1e-14);
    assert!(0.0 < d.energy && d.energy < 4.0 * c0.powi(3) / 3.0);
    assert!((u_potential(c0, d.v_right) - d.energy).abs() < 1e-10);
    assert!(d.contains(c0, 0.0));
    assert!(d.region.closure_gap() < 1e-12);
    // inside the homoclinic loop
    for p in &d.boundary {
        let (y, _) = separatrix_eval(c0, p[0]);
        assert!(p[1].abs() <= y + 1e-12);
    }
    assert!(matches!(build_section5_set(c0, 0.01, 1.0), Err(Error::EmptySet(_))));
}

#[test]
fn union_is_strictly_larger() {
    let c0 = 2.5f64.sqrt();
    let d = build_section5_set(c0, 9.0, 1.0).unwrap();
    let a = build_hexagon(1, 1.0, 2.0, 9.0).unwrap();
    let hx = a.vertex("H").unwrap()[1];
    assert!(hx > separatrix_eval(c0, c0).0);
    assert!(-1.0 > -c0);
    let u = union_d0(&d.region, &a.region);
    let ad = difference_witness(&a.region, &d.region, 200).expect("A \\ D nonempty");
    let da = difference_witness(&d.region, &a.region, 200).expect("D \\ A nonempty");
    assert!(u.contains(ad[0], ad[1]) && u.contains(da[0], da[1]));
    assert!(!u.arcs.is_empty());
    let same = union_d0(&RegionSpec::empty("D"), &a.region);
    assert_eq!(same, a.region);
}

#[test]
fn region_json_round_trip() {
    let a = build_hexagon(2, 1.0, 2f64.sqrt(), 9.0).unwrap();
    let back = RegionSpec::from_json(&a.region.to_json()).unwrap();
    assert_eq!(back, a.region);
    let r = build_blowup_region(1, 1.0, 2.0, 9.0, 6.0).unwrap();
    let back = RegionSpec::from_json(&r.s_set.to_json()).unwrap();
    assert_eq!(back, r.s_set);
    let csv = a.region.arc_csv(1, 50);
    assert_eq!(csv.lines().count(), 51);
}

proptest! {
    #[test]
    fn hexagon_vertices_match_formulas(gamma in 9.0f64..200.0, p in 1u32..4) {
        let (f, big_f) = roots(p);
        let h = build_hexagon(p, f, big_f, gamma).unwrap();
        let n = 2 * p as i32;
        prop_assert!((h.vertices[1][1] - h.lambda1 * big_f.powi(n)).abs() < 1e-12 * h.vertices[1][1].abs());
        prop_assert!((h.vertices[4][1] + h.lambda2 * f.powi(n) * (4f64.powi(p as i32) - 1.0)).abs() < 1e-9);
        prop_assert!(h.region.closure_gap() < 1e-9);
    }

    #[test]
    fn blowup_bound_scaling(b in 0.01f64..10.0, u0 in 0.01f64..100.0) {
        let t = blowup_time_bound(b, u0);
        prop_assert!((blowup_time_bound(0.5 * b, u0) - 2.0 * t).abs() < 1e-9 * t);
        prop_assert!(blowup_time_bound(b, 4.0 * u0) < t);
    }
}
