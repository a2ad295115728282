use proptest::prelude::*;
use qattract::attract::*;
use qattract::model::{equilibrium_c0, ForcingSpectrum, FrequencyVector, Nonlinearity, SystemConfig};
use qattract::qpsolve::{solve, FourierSolution, NewtonOptions};
use qattract::report::halton;
use qattract::Error;

fn odd(gamma: f64) -> (SystemConfig, FourierSolution) {
    let f = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5).unwrap();
    let cfg = SystemConfig::new(f, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::odd(1).unwrap(), gamma).unwrap();
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    (cfg, sol)
}

fn constant(gamma: f64) -> (SystemConfig, FourierSolution) {
    let cfg = SystemConfig::new(
        ForcingSpectrum::constant(2.5).unwrap(),
        FrequencyVector::periodic(1.0).unwrap(),
        Nonlinearity::odd(1).unwrap(),
        gamma,
    )
    .unwrap();
    let sol = solve(&cfg, &NewtonOptions::default()).unwrap();
    (cfg, sol)
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    num / lx.iter().map(|a| (a - mx).powi(2)).sum::<f64>()
}

#[test]
fn r_is_one_for_constant_forcing() {
    let (cfg, sol) = constant(10.0);
    let a = sol.c0;
    for xi in [-50.0, -1.0, 0.0, 1e-9, 3.0, 1e5] {
        assert!((r_eval(&cfg.g, &sol, a, xi, 0.7).unwrap() - 1.0).abs() < 1e-14);
    }
    let rb = estimate_r_bounds(&cfg.g, &sol, a, 1000).unwrap();
    assert_eq!((rb.r1, rb.r2), (1.0, 1.0));
    let fb = estimate_friction_bound(&cfg.g, &sol, a, 10.0, 1000).unwrap();
    assert_eq!((fb.b1, fb.b2), (1e-12, 1e-12));
}

#[test]
fn r_tends_to_one_at_large_xi() {
    let (cfg, sol) = odd(10.0);
    for k in 0..50 {
        let t = 6.3 * halton(k + 1, 2);
        for xi in [1e6, -1e6] {
            assert!((r_eval(&cfg.g, &sol, sol.c0, xi, t).unwrap() - 1.0).abs() < 1e-4);
        }
    }
}

#[test]
fn r_grid_scan_is_moderate_at_gamma_10() {
    let (cfg, sol) = odd(10.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 1..=1000 {
        let t = 2.0 * std::f64::consts::PI * halton(k, 3);
        for j in 0..=200 {
            let xi = -10.0 + 0.1 * j as f64;
            let r = r_eval(&cfg.g, &sol, sol.c0, xi, t).unwrap();
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    assert!(lo > 0.5 && hi < 2.0, "R in [{lo}, {hi}]");
}

#[test]
fn degenerate_q_is_reported() {
    // alpha = 0 makes Q(0) = g'(0) = 0
    let (cfg, sol) = odd(10.0);
    assert!(matches!(r_eval(&cfg.g, &sol, 0.0, 0.0, 0.0), Err(Error::DegenerateQ { .. })));
}

#[test]
fn sign_change_is_reported() {
    // x0 = 0.5 + 2 cos t passes through zero
    let lattice = qattract::qpsolve::FourierLattice::new(1, 1).unwrap();
    let half = [(vec![1], num_complex::Complex64::new(1.0, 0.0))].into_iter().collect();
    let crossing = FourierSolution::from_half(lattice, vec![1.0], 0.5, &half, 2.0, 1.0);
    let g = Nonlinearity::odd(1).unwrap();
    assert!(matches!(estimate_r_bounds(&g, &crossing, 1.0, 100), Err(Error::SignChange { .. })));
}

#[test]
fn fresh_samples_lie_strictly_inside_r_bounds() {
    let (cfg, sol) = odd(10.0);
    let rb = estimate_r_bounds(&cfg.g, &sol, sol.c0, 1000).unwrap();
    assert!(0.0 < rb.r1 && rb.r1 <= rb.r2);
    for k in 1..=20_000u64 {
        let t = 1000.0 * halton(k, 5);
        let u = halton(k, 7);
        let xi = (if k % 2 == 0 { 1.0 } else { -1.0 }) * 10f64.powf(-6.0 + 12.0 * u);
        let r = r_eval(&cfg.g, &sol, sol.c0, xi, t).unwrap();
        assert!(rb.r1 < r && r < rb.r2, "R={r} at xi={xi}, t={t}");
    }
}

#[test]
fn friction_envelope_dominates_samples_and_is_gamma_independent() {
    let (cfg, sol) = odd(10.0);
    let fb = estimate_friction_bound(&cfg.g, &sol, sol.c0, 10.0, 1000).unwrap();
    assert!(fb.wtilde > 100.0 / (2.0 * fb.b2));
    for k in 1..=100_000u64 {
        let t = 1000.0 * halton(k, 5);
        let xi = 40.0 * (halton(k, 7) - 0.5);
        let w = 200.0 * (halton(k, 11) - 0.5);
        let (x0, v0, _) = sol.eval_full(t);
        let (a, c) = friction_terms(&cfg.g, xi, x0, v0, sol.c0);
        let rate = (a * w + c).abs();
        assert!(rate <= (fb.b1 + fb.b2 * w.abs()) / 10.0 * (1.0 + 1e-12), "xi={xi} w={w} t={t}");
    }
    let (cfg2, sol2) = odd(20.0);
    let fb2 = estimate_friction_bound(&cfg2.g, &sol2, sol2.c0, 20.0, 1000).unwrap();
    for (a, b) in [(fb.b1, fb2.b1), (fb.b2, fb2.b2)] {
        assert!(a / b < 2.0 && b / a < 2.0, "{a} vs {b}");
    }
}

#[test]
fn friction_terms_match_time_derivative_of_r() {
    let (cfg, sol) = odd(10.0);
    let a0 = sol.c0;
    let h = 1e-6;
    for (xi, y, t) in [(0.7, 2.0, 0.3), (-3.0, -1.0, 2.2), (12.0, 5.0, 4.0)] {
        let r = r_eval(&cfg.g, &sol, a0, xi, t).unwrap();
        let rp = r_eval(&cfg.g, &sol, a0, xi + h * y, t + h).unwrap();
        let rm = r_eval(&cfg.g, &sol, a0, xi - h * y, t - h).unwrap();
        let fd = (rp - rm) / (2.0 * h) / (2.0 * r);
        let (x0, v0, _) = sol.eval_full(t);
        let (a, c) = friction_terms(&cfg.g, xi, x0, v0, a0);
        let w = y / r.sqrt();
        assert!((a * w + c - fd).abs() < 1e-6, "{} vs {fd}", a * w + c);
    }
}

#[test]
fn gamma_too_small_is_rejected() {
    let g = Nonlinearity::odd(1).unwrap();
    let rb = RBounds { r1: 1.0, r2: 1.0, sample_count: 0, raw_min: 1.0, raw_max: 1.0 };
    let fb = FrictionBound { b1: 1.0, b2: 1.0, wtilde: 0.0, gamma: 1.0, samples: 0 };
    assert!(matches!(build_s(&g, 1.0, &rb, &fb, 100), Err(Error::GammaTooSmall { .. })));
    let (cfg, sol) = odd(10.0);
    // B1 = gamma max|C| grows with the gamma passed; at gamma = 1.2 the fitted B1 ~ 0.19 still clears, at 0.2 it cannot
    assert!(estimate_friction_bound(&cfg.g, &sol, sol.c0, 1.2, 200).is_ok());
    let err = estimate_friction_bound(&cfg.g, &sol, sol.c0, 0.2, 200).unwrap_err();
    assert!(matches!(err, Error::GammaTooSmall { .. }));
}

#[test]
fn s_intercepts_match_root_find() {
    let g = Nonlinearity::odd(1).unwrap();
    let alpha = 2.5f64.cbrt();
    let rb = RBounds { r1: 1.0, r2: 1.0, sample_count: 0, raw_min: 1.0, raw_max: 1.0 };
    let fb = FrictionBound { b1: 1e-12, b2: 1.0, wtilde: 10.0, gamma: 10.0, samples: 0 };
    let s = build_s(&g, alpha, &rb, &fb, 720).unwrap();
    let h = |v: f64| v.powi(4) / 4.0 + alpha * v.powi(3) + 1.5 * alpha * alpha * v * v - 50.0;
    for root in [s.xi_intercept, s.xi_intercept_neg] {
        assert!(h(root).abs() < 1e-9, "{root}");
    }
    assert!(s.xi_intercept > 0.0 && s.xi_intercept_neg < 0.0);
    assert!((s.y_intercept - 10.0).abs() < 1e-12);
    assert!((s.energy_level - 50.0).abs() < 1e-12);
}

#[test]
fn s_is_closed_convex_and_contains_origin() {
    let (cfg, sol) = odd(10.0);
    let st = setup(&cfg, &sol).unwrap();
    let b = &st.s.boundary;
    assert!(st.s.contains(0.0, 0.0));
    let gap = (b[0][0] - b[b.len() - 1][0]).hypot(b[0][1] - b[b.len() - 1][1]);
    assert!(gap < 1e-12);
    // clockwise convex: every consecutive turn is non-positive
    for i in 0..b.len() - 2 {
        let (p, q, r) = (b[i], b[i + 1], b[i + 2]);
        let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
        assert!(cross <= 1e-9 * (1.0 + st.s.y_intercept.powi(2)), "turn {cross} at {i}");
    }
    let csv = st.s.boundary_csv();
    assert!(csv.starts_with("xi,y\n"));
    assert_eq!(csv.lines().count(), b.len() + 1);
}

#[test]
fn s_intercept_scaling() {
    let gammas = [20.0, 40.0, 80.0];
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for &g in &gammas {
        let (cfg, sol) = odd(g);
        let st = setup(&cfg, &sol).unwrap();
        let y = st.s.y_intercept / (g * g);
        let x = st.s.xi_intercept / g;
        assert!((0.01..=100.0).contains(&y) && (0.01..=100.0).contains(&x));
        ys.push(st.s.y_intercept);
        xs.push(st.s.xi_intercept);
    }
    let sy = slope(&gammas, &ys);
    let sx = slope(&gammas, &xs);
    assert!((sy - 2.0).abs() <= 0.3, "y exponent {sy}");
    assert!((sx - 1.0).abs() <= 0.3, "xi exponent {sx}");
}

#[test]
fn s_boundary_flux_constant_forcing_is_inward() {
    let (cfg, sol) = constant(10.0);
    let rb = estimate_r_bounds(&cfg.g, &sol, sol.c0, 100).unwrap();
    let fb = FrictionBound { b1: 1e-12, b2: 1.0, wtilde: 30.0, gamma: 10.0, samples: 0 };
    let s = build_s(&cfg.g, sol.c0, &rb, &fb, 720).unwrap();
    let rep = s_boundary_flux(&cfg, &sol, &s, 720, 100);
    assert!(rep.pass, "{}", rep.to_json());
}

#[test]
fn s_boundary_outflux_is_confined_to_the_predicted_band() {
    let (cfg, sol) = odd(10.0);
    let st = setup(&cfg, &sol).unwrap();
    let rep = s_boundary_flux(&cfg, &sol, &st.s, 720, 100);
    assert_eq!(rep.samples, 72_000);
    assert_eq!(rep.details["outside_predicted_band"], 0);
    // starts on the boundary still converge to x0
    for k in 0..16 {
        let p = st.s.boundary[k * (st.s.boundary.len() - 1) / 16];
        assert!(error_decay(&cfg, &sol, p[0], p[1], 60.0) < 1e-6);
    }
}

#[test]
fn sandwich_holds_outside_s_for_large_gamma() {
    for g in [10.0, 40.0] {
        let (cfg, sol) = odd(g);
        let st = setup(&cfg, &sol).unwrap();
        let rep = verify_sandwich(&cfg, &sol, Some(&st.s), 10.0 * st.s.xi_intercept, 400, 50).unwrap();
        assert!(rep.pass, "{}", rep.to_json());
        assert!(rep.details["skipped_inside_S"].as_u64().unwrap() > 0);
    }
}

#[test]
fn sandwich_constant_forcing_away_from_origin() {
    let (cfg, sol) = constant(10.0);
    let a = sol.c0;
    // (xi F)/xi^3 = 1 + 3/u + 3/u^2 with u = xi/a lies in [1/2, 2] exactly when |u| >= 3 + sqrt 3
    let u_star = 3.0 + 3f64.sqrt();
    for k in 0..1000 {
        let xi = u_star * a * (1.0 + 1e-9) + k as f64 * 0.1;
        for s in [xi, -xi] {
            let ratio = s * f_of(&cfg.g, s, a) / s.powi(3);
            assert!((0.5..=2.0).contains(&ratio), "xi={s} ratio={ratio}");
        }
    }
    let inside = -u_star * a * 0.99;
    let ratio = inside * f_of(&cfg.g, inside, a) / inside.powi(3);
    assert!(ratio < 0.5);
    let at_two = 2.0 * a;
    assert!(at_two * f_of(&cfg.g, at_two, a) / at_two.powi(3) > 2.0);
}

#[test]
fn sandwich_fails_at_small_gamma() {
    let (cfg, sol) = odd(1.0);
    let rep = verify_sandwich(&cfg, &sol, None, 20.0, 200, 20).unwrap();
    assert!(!rep.pass);
    assert!(rep.details["violations"].as_u64().unwrap() > 0);
}

#[test]
fn quadrant_transit() {
    let (cfg, sol) = odd(10.0);
    let (rep, tr) = quadrant_transit_check(&cfg, &sol, &[(1.0, 0.0), (1.0, 5.0), (-1.0, -5.0), (-1.0, 0.0)], 50.0);
    assert!(rep.pass, "{}", rep.to_json());
    assert_eq!(tr[0].time, 0.0);
    assert!(tr[1].time > 0.0 && tr[1].time <= tr[1].bound);
    // closed-form check of the bound
    let c = tr[1].bound;
    assert!(c > 0.0 && c < (1.0 + 50.0f64).ln() / 10.0 + 1e-12);
    assert!(tr[2].entered && tr[2].time <= tr[2].bound);
}

#[test]
fn cycle_decrements_near_and_far() {
    let (cfg, sol) = odd(10.0);
    let st = setup(&cfg, &sol).unwrap();
    let near = cycle_decrement(&cfg, &sol, &st.s, 1.01 * st.s.y_intercept, 100.0);
    assert!(near.entered_s && near.decrements.len() <= 1);
    let far = cycle_decrement(&cfg, &sol, &st.s, 10.0 * st.s.y_intercept, 100.0);
    assert!(far.entered_s && far.all_positive());
}

#[test]
fn cycle_decrements_under_weak_damping() {
    // weak damping and a small target set force many cycles
    let (cfg, sol) = constant(0.5);
    let rb = estimate_r_bounds(&cfg.g, &sol, sol.c0, 10).unwrap();
    let fb = FrictionBound { b1: 1e-12, b2: 1.0, wtilde: 1.0, gamma: 0.5, samples: 0 };
    let s = build_s(&cfg.g, sol.c0, &rb, &fb, 360).unwrap();
    let c = cycle_decrement(&cfg, &sol, &s, 20.0, 200.0);
    assert!(c.decrements.len() >= 3, "{c:?}");
    assert!(c.all_positive());
    assert!(c.entered_s);
    assert!(c.min_decrement().unwrap() > 0.0);
}

#[test]
fn liouville_clock_is_strictly_increasing() {
    let (cfg, sol) = odd(10.0);
    let clock = liouville_clock(&cfg, &sol, sol.c0, (8.0, -30.0), 20.0).unwrap();
    assert!(clock.t.len() > 10);
    assert!(clock.strictly_increasing());
    // sqrt(R) is bracketed, so tau/t is too
    let rb = estimate_r_bounds(&cfg.g, &sol, sol.c0, 1000).unwrap();
    let (t, tau) = (*clock.t.last().unwrap(), *clock.tau.last().unwrap());
    assert!(tau >= rb.r1.sqrt() * t && tau <= rb.r2.sqrt() * t);
    let (ccfg, csol) = constant(10.0);
    let flat = liouville_clock(&ccfg, &csol, csol.c0, (1.0, 1.0), 5.0).unwrap();
    assert!((flat.tau.last().unwrap() - flat.t.last().unwrap()).abs() < 1e-12);
}

#[test]
fn error_state_round_trip() {
    let (_, sol) = odd(10.0);
    let (x0, v0, _) = sol.eval_full(1.5);
    let e = ErrorState::from_phase(&sol, &qattract::model::PhaseState::new(x0 + 0.25, v0 - 1.0, 1.5));
    assert!((e.xi - 0.25).abs() < 1e-14 && (e.y + 1.0).abs() < 1e-14);
    assert!(ErrorState::new(f64::NAN, 0.0, 0.0).is_err());
    let _ = equilibrium_c0;
}

proptest! {
    #[test]
    fn f_of_matches_difference_quotient(xi in 0.01f64..50.0, x in -5.0f64..5.0, sign in proptest::bool::ANY, p in 1u32..4) {
        let g = Nonlinearity::odd(p).unwrap();
        let xi = if sign { xi } else { -xi };
        let direct = (g.value(x + xi) - g.value(x)) / xi;
        let f = f_of(&g, xi, x);
        prop_assert!((f - direct).abs() <= 1e-9 * direct.abs().max(1.0));
        // odd monomials: F > 0 except at the origin
        prop_assert!(f > 0.0);
    }

    #[test]
    fn f_of_small_xi_is_derivative(x in -5.0f64..5.0, xi in -1e-9f64..1e-9) {
        let g = Nonlinearity::odd(2).unwrap();
        prop_assert!((f_of(&g, xi, x) - g.derivative(x)).abs() <= 1e-6 * g.derivative(x).abs().max(1.0));
    }

    #[test]
    fn curves_order(xi in 0.0f64..100.0, gamma in 1.0f64..100.0, p in 1u32..4) {
        let (c1, c2) = (curve_c1(gamma, p, xi), curve_c2(gamma, p, xi));
        prop_assert!(c2 <= c1 && c1 <= 0.0);
        prop_assert!((c2 - 16.0 * c1).abs() <= 1e-12 * c2.abs().max(1e-300));
    }
}
