//! Numeric instrumentation of the attraction argument for the error
//! xi = x - x0(t): the stiffness ratio R, its bounds, the friction envelope,
//! the level set S, the sandwich bounds on -xi F / gamma, quadrant transit,
//! per-cycle decrements and the Liouville clock.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::integrate::{
    crossing_sequence, integrate, integrate_observed, DenseSegment, Direction, EventSpec, IntegratorSettings,
    Outcome,
};
use crate::model::{bisect, Nonlinearity, PhaseState, PlanarField, SystemConfig};
use crate::qpsolve::FourierSolution;
use crate::region::{shifted_potential, BoundaryArc, Curve, Governing, Membership, RegionSpec};
use crate::report::{halton, Report};

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// F(xi, x) = (g(x + xi) - g(x)) / xi through the binomial expansion
/// sum_n c_n sum_{j<n} C(n, j) xi^(n-1-j) x^j, which is exact at xi = 0 (g'(x)).
pub fn f_of(g: &Nonlinearity, xi: f64, x: f64) -> f64 {
    let c = g.power_coeffs();
    let mut total = 0.0;
    for (n, cn) in c.iter().enumerate().skip(1) {
        if *cn == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for j in 0..n {
            s += binomial(n, j) * xi.powi((n - 1 - j) as i32) * x.powi(j as i32);
        }
        total += cn * s;
    }
    total
}

/// dF/dxi and dF/dx.
pub fn f_partials(g: &Nonlinearity, xi: f64, x: f64) -> (f64, f64) {
    let c = g.power_coeffs();
    let (mut dxi, mut dx) = (0.0, 0.0);
    for (n, cn) in c.iter().enumerate().skip(1) {
        if *cn == 0.0 {
            continue;
        }
        for j in 0..n {
            let b = cn * binomial(n, j);
            let e = n - 1 - j;
            if e >= 1 {
                dxi += b * e as f64 * xi.powi(e as i32 - 1) * x.powi(j as i32);
            }
            if j >= 1 {
                dx += b * j as f64 * xi.powi(e as i32) * x.powi(j as i32 - 1);
            }
        }
    }
    (dxi, dx)
}

/// R(xi, t) = F(xi, x0(t)) / F(xi, alpha).
pub fn r_eval(g: &Nonlinearity, sol: &FourierSolution, alpha: f64, xi: f64, t: f64) -> Result<f64> {
    let q = f_of(g, xi, alpha);
    if q.abs() < 1e-14 {
        return Err(Error::DegenerateQ { xi });
    }
    Ok(f_of(g, xi, sol.eval_full(t).0) / q)
}

/// Point of the error system: xi = x - x0(t), y = xi'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorState {
    pub xi: f64,
    pub y: f64,
    pub t: f64,
}

impl ErrorState {
    pub fn new(xi: f64, y: f64, t: f64) -> Result<Self> {
        if !(xi.is_finite() && y.is_finite() && t.is_finite()) {
            return Err(Error::InvalidInput("error state must be finite".into()));
        }
        Ok(ErrorState { xi, y, t })
    }

    /// Error state of a phase point relative to x0.
    pub fn from_phase(sol: &FourierSolution, s: &PhaseState) -> Self {
        let (x0, v0, _) = sol.eval_full(s.t);
        ErrorState { xi: s.x - x0, y: s.y - v0, t: s.t }
    }
}

/// Error system xi' = y, y' = -gamma y - xi F(xi, x0(t)).
pub struct ErrorField<'a> {
    pub g: &'a Nonlinearity,
    pub gamma: f64,
    pub sol: &'a FourierSolution,
}

impl PlanarField for ErrorField<'_> {
    fn eval(&self, t: f64, xi: f64, y: f64) -> (f64, f64) {
        let x0 = self.sol.eval_full(t).0;
        (y, -self.gamma * y - xi * f_of(self.g, xi, x0))
    }
}

impl<'a> ErrorField<'a> {
    pub fn new(cfg: &'a SystemConfig, sol: &'a FourierSolution) -> Self {
        ErrorField { g: &cfg.g, gamma: cfg.gamma, sol }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RBounds {
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub sample_count: usize,
    pub raw_min: f64,
    pub raw_max: f64,
}

/// Sample times covering the torus: one period for d = 1, a long window otherwise.
pub fn sample_times(sol: &FourierSolution, n: usize, base: u64) -> Vec<f64> {
    let wmin = sol.omega.iter().map(|w| w.abs()).filter(|w| *w > 0.0).fold(f64::INFINITY, f64::min);
    let period = if wmin.is_finite() { 2.0 * std::f64::consts::PI / wmin } else { 1.0 };
    let span = if sol.omega.len() == 1 { period } else { 50.0 * period };
    (1..=n as u64).map(|k| span * halton(k, base)).collect()
}

/// Logarithmic grid |xi| in [1e-6, 1e6] (both signs, `n_log` points each side),
/// a linear grid across [-10|alpha|, 10|alpha|], and xi = 0.
pub fn xi_grid(alpha: f64, n_log: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    for k in 0..n_log {
        let e = -6.0 + 12.0 * k as f64 / (n_log - 1) as f64;
        let v = 10f64.powf(e);
        g.push(v);
        g.push(-v);
    }
    let span = 10.0 * alpha.abs().max(1.0);
    for k in 0..=400 {
        g.push(-span + 2.0 * span * k as f64 / 400.0);
    }
    g
}

fn check_sign(sol: &FourierSolution, times: &[f64]) -> Result<()> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &t in times {
        let x = sol.eval_full(t).0;
        lo = lo.min(x);
        hi = hi.max(x);
    }
    if lo <= 0.0 && hi >= 0.0 {
        return Err(Error::SignChange { min: lo, max: hi });
    }
    Ok(())
}

/// Min/max of R over the xi grid and `n_times` quasi-random times, widened by 1%.
/// When R is identically 1 on the sample (constant forcing) no widening is applied.
pub fn estimate_r_bounds(g: &Nonlinearity, sol: &FourierSolution, alpha: f64, n_times: usize) -> Result<RBounds> {
    let times = sample_times(sol, n_times, 2);
    check_sign(sol, &times)?;
    let grid = xi_grid(alpha, 200);
    let q: Vec<f64> = grid.iter().map(|&xi| f_of(g, xi, alpha)).collect();
    if let Some(i) = q.iter().position(|v| v.abs() < 1e-14) {
        return Err(Error::DegenerateQ { xi: grid[i] });
    }
    let (lo, hi) = times
        .par_iter()
        .map(|&t| {
            let x0 = sol.eval_full(t).0;
            grid.iter().zip(&q).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&xi, &qv)| {
                let r = f_of(g, xi, x0) / qv;
                (lo.min(r), hi.max(r))
            })
        })
        .reduce(|| (f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let count = times.len() * grid.len();
    let (r1, r2) = if hi - lo <= 4.0 * f64::EPSILON * hi.abs() { (lo, hi) } else { (0.99 * lo, 1.01 * hi) };
    Ok(RBounds { r1, r2, sample_count: count, raw_min: lo, raw_max: hi })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrictionBound {
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    pub wtilde: f64,
    pub gamma: f64,
    pub samples: usize,
}

/// R'/(2R) = A(xi,t) w + C(xi,t) along the flow, with y = sqrt(R) w:
/// A = (P_xi/P - Q_xi/Q) sqrt(R) / 2 and C = P_t / (2P), P_t = F_x(xi, x0) x0'.
pub fn friction_terms(g: &Nonlinearity, xi: f64, x0: f64, x0dot: f64, alpha: f64) -> (f64, f64) {
    let p = f_of(g, xi, x0);
    let q = f_of(g, xi, alpha);
    let (p_xi, p_x) = f_partials(g, xi, x0);
    let (q_xi, _) = f_partials(g, xi, alpha);
    let r = p / q;
    let a = 0.5 * (p_xi / p - q_xi / q) * r.sqrt();
    let c = 0.5 * p_x * x0dot / p;
    (a, c)
}

/// Smallest affine envelope (B1 + B2 |w|)/gamma of |R'/2R| over the sample:
/// B2 = gamma max|A|, B1 = gamma max|C|, both floored at 1e-12.
pub fn estimate_friction_bound(
    g: &Nonlinearity,
    sol: &FourierSolution,
    alpha: f64,
    gamma: f64,
    n_times: usize,
) -> Result<FrictionBound> {
    let times = sample_times(sol, n_times, 3);
    check_sign(sol, &times)?;
    let grid = xi_grid(alpha, 200);
    let (amax, cmax) = times
        .par_iter()
        .map(|&t| {
            let (x0, v0, _) = sol.eval_full(t);
            grid.iter().fold((0.0f64, 0.0f64), |(am, cm), &xi| {
                let (a, c) = friction_terms(g, xi, x0, v0, alpha);
                (am.max(a.abs()), cm.max(c.abs()))
            })
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let n = times.len() * grid.len();
    let b1 = (gamma * cmax).max(1e-12);
    let b2 = (gamma * amax).max(1e-12);
    let fb = FrictionBound { b1, b2, wtilde: (gamma * gamma - b1) / b2, gamma, samples: n };
    if gamma * gamma <= 2.0 * b1 {
        return Err(Error::GammaTooSmall { gamma_sq: gamma * gamma, two_b1: 2.0 * b1 });
    }
    Ok(fb)
}

/// The level set S = {y^2/(2 R1) + V(xi) <= wtilde^2/2} in the error plane.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetS {
    pub energy_level: f64,
    pub boundary: Vec<[f64; 2]>,
    pub y_intercept: f64,
    pub xi_intercept: f64,
    pub xi_intercept_neg: f64,
    pub r1: f64,
    pub wtilde: f64,
    pub alpha: f64,
    pub region: RegionSpec,
}

impl LevelSetS {
    pub fn contains(&self, xi: f64, y: f64) -> bool {
        self.region.contains(xi, y)
    }

    pub fn boundary_csv(&self) -> String {
        let mut s = String::from("xi,y\n");
        for p in &self.boundary {
            s.push_str(&format!("{:.16e},{:.16e}\n", p[0], p[1]));
        }
        s
    }
}

fn potential_root(g: &Nonlinearity, alpha: f64, level: f64, sign: f64) -> Result<f64> {
    let h = |v: f64| shifted_potential(g, alpha, sign * v) - level;
    let mut hi = 1.0;
    let mut k = 0;
    while h(hi) < 0.0 {
        hi *= 2.0;
        k += 1;
        if k > 200 {
            return Err(Error::BracketFailure("potential level not reached".into()));
        }
    }
    Ok(sign * bisect(&h, 0.0, hi, 200))
}

/// Level curve H(v, w) = wtilde^2/2 of v'' = -v Q(v), pulled back to (xi, y) with y = sqrt(R1) w.
pub fn build_s(g: &Nonlinearity, alpha: f64, rb: &RBounds, fb: &FrictionBound, n_boundary: usize) -> Result<LevelSetS> {
    if fb.gamma * fb.gamma <= 2.0 * fb.b1 {
        return Err(Error::GammaTooSmall { gamma_sq: fb.gamma * fb.gamma, two_b1: 2.0 * fb.b1 });
    }
    let level = 0.5 * fb.wtilde * fb.wtilde;
    let xp = potential_root(g, alpha, level, 1.0)?;
    let xm = potential_root(g, alpha, level, -1.0)?;
    let r1 = rb.r1;
    let half = n_boundary.max(8) / 2;
    let branch = |k: usize| {
        // cosine spacing clusters points near the xi intercepts
        let s = 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / half as f64).cos());
        let xi = xm + (xp - xm) * s;
        let y = if k == 0 || k == half { 0.0 } else { (2.0 * r1 * (level - shifted_potential(g, alpha, xi)).max(0.0)).sqrt() };
        (xi, y)
    };
    let mut boundary = Vec::with_capacity(2 * half + 1);
    for k in 0..=half {
        let (xi, y) = branch(k);
        boundary.push([xi, y]);
    }
    for k in (0..half).rev() {
        let (xi, y) = branch(k);
        boundary.push([xi, -y]);
    }
    let membership = Membership::EnergyLevel { g: g.clone(), alpha, r1, wtilde: fb.wtilde };
    let region = RegionSpec {
        kind: "S".into(),
        params: json!({"alpha": alpha, "R1": r1, "wtilde": fb.wtilde, "B1": fb.b1, "B2": fb.b2, "gamma": fb.gamma}),
        arcs: vec![BoundaryArc::new("level_curve", Curve::Polyline { points: boundary.clone() }, Governing::Both)],
        membership,
    };
    Ok(LevelSetS {
        energy_level: level,
        boundary,
        y_intercept: r1.sqrt() * fb.wtilde,
        xi_intercept: xp,
        xi_intercept_neg: xm,
        r1,
        wtilde: fb.wtilde,
        alpha,
        region,
    })
}

/// Everything needed for the attraction checks at one gamma.
pub struct AttractSetup {
    pub alpha: f64,
    pub rb: RBounds,
    pub fb: FrictionBound,
    pub s: LevelSetS,
}

pub fn setup(cfg: &SystemConfig, sol: &FourierSolution) -> Result<AttractSetup> {
    let alpha = sol.c0;
    let rb = estimate_r_bounds(&cfg.g, sol, alpha, 1000)?;
    let fb = estimate_friction_bound(&cfg.g, sol, alpha, cfg.gamma, 1000)?;
    let s = build_s(&cfg.g, alpha, &rb, &fb, 720)?;
    Ok(AttractSetup { alpha, rb, fb, s })
}

/// Outward rate of the S boundary function along the error flow:
/// d/dt [y^2/(2R1) + V(xi)] = xi y Q (1 - R/R1) - gamma y^2 / R1.
/// Positive values can only occur where xi y < 0 and |y| < |xi| (P - R1 Q)/gamma.
pub fn s_boundary_flux(cfg: &SystemConfig, sol: &FourierSolution, s: &LevelSetS, n_boundary: usize, n_time: usize) -> Report {
    let times = sample_times(sol, n_time, 5);
    let g = &cfg.g;
    let n = s.boundary.len() - 1;
    let mut worst_out = f64::NEG_INFINITY;
    let mut band_violations = 0usize;
    let mut outward = 0usize;
    let mut count = 0usize;
    for k in 0..n_boundary {
        let pos = k as f64 * n as f64 / n_boundary as f64;
        let i = (pos.floor() as usize).min(n - 1);
        let r = pos - i as f64;
        let (a, b) = (s.boundary[i], s.boundary[i + 1]);
        let (xi, y) = (a[0] + r * (b[0] - a[0]), a[1] + r * (b[1] - a[1]));
        for &t in &times {
            let x0 = sol.eval_full(t).0;
            let p = f_of(g, xi, x0);
            let q = f_of(g, xi, s.alpha);
            let rate = y * (-cfg.gamma * y - xi * p) / s.r1 + xi * q * y;
            // normalize by the gradient length so the value is a flux per unit normal
            let grad = (xi * q).hypot(y / s.r1).max(1e-300);
            let flux = rate / grad;
            count += 1;
            worst_out = worst_out.max(flux);
            if flux > 1e-9 {
                outward += 1;
                let band = xi * y < 0.0 && y.abs() < xi.abs() * (p - s.r1 * q) / cfg.gamma * (1.0 + 1e-9) + 1e-12;
                if !band {
                    band_violations += 1;
                }
            }
        }
    }
    let pass = worst_out <= 1e-9;
    Report::new("S_boundary_flux", pass, -worst_out, count, json!({"gamma": cfg.gamma, "R1": s.r1}))
        .with_details(json!({"outward_points": outward, "outside_predicted_band": band_violations}))
}

pub fn curve_c1(gamma: f64, p: u32, xi: f64) -> f64 {
    -xi.powi(2 * p as i32 + 1) / (4.0 * gamma)
}

pub fn curve_c2(gamma: f64, p: u32, xi: f64) -> f64 {
    -4.0 * xi.powi(2 * p as i32 + 1) / gamma
}

/// Checks (1/2)|xi|^(2p+1) <= |xi F(xi, x0(t))| <= 2 |xi|^(2p+1) at points
/// (xi, -xi F/gamma) outside S; points inside S are skipped.
pub fn verify_sandwich(
    cfg: &SystemConfig,
    sol: &FourierSolution,
    s: Option<&LevelSetS>,
    xi_max: f64,
    n_xi: usize,
    n_time: usize,
) -> Result<Report> {
    let p = match cfg.g {
        Nonlinearity::OddMonomial { p } => p,
        _ => return Err(Error::Precondition(format!("sandwich bounds need an odd monomial, got {}", cfg.g.name()))),
    };
    let e = 2 * p as i32 + 1;
    let times = sample_times(sol, n_time, 7);
    let mut worst = f64::INFINITY;
    let mut worst_at = (f64::NAN, f64::NAN);
    let (mut checked, mut skipped, mut violations) = (0usize, 0usize, 0usize);
    for &t in &times {
        let x0 = sol.eval_full(t).0;
        for k in 0..n_xi {
            let u = (k as f64 + 0.5) / n_xi as f64;
            for sign in [1.0, -1.0] {
                let xi = sign * xi_max * u;
                let val = xi * f_of(&cfg.g, xi, x0);
                let gy = -val / cfg.gamma;
                if s.is_some_and(|s| s.contains(xi, gy)) {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let ratio = val / xi.powi(e);
                let margin = (ratio - 0.5).min(2.0 - ratio);
                if margin < 0.0 {
                    violations += 1;
                }
                if margin < worst {
                    worst = margin;
                    worst_at = (xi, t);
                }
            }
        }
    }
    Ok(Report::new("sandwich", violations == 0, worst, checked, json!({"gamma": cfg.gamma, "p": p, "xi_max": xi_max}))
        .with_details(json!({"skipped_inside_S": skipped, "violations": violations, "worst_xi": worst_at.0, "worst_t": worst_at.1})))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transit {
    pub xi0: f64,
    pub y0: f64,
    pub entered: bool,
    pub time: f64,
    /// (1/gamma) log(1 + gamma |y0| / c) with c = |xi0| inf_t F(xi0, x0(t)).
    pub bound: f64,
}

/// From quadrant I (xi > 0, y >= 0) the error flow reaches II (y < 0); from III it reaches IV.
pub fn quadrant_transit_check(cfg: &SystemConfig, sol: &FourierSolution, ics: &[(f64, f64)], t_max: f64) -> (Report, Vec<Transit>) {
    let field = ErrorField::new(cfg, sol);
    let times = sample_times(sol, 256, 11);
    let mut out = Vec::new();
    let mut worst = f64::INFINITY;
    for &(xi0, y0) in ics {
        let quadrant_one = xi0 > 0.0 && y0 >= 0.0;
        let dir = if quadrant_one { Direction::Down } else { Direction::Up };
        let ev = EventSpec::CrossXAxis(dir);
        let set = IntegratorSettings { t_max, rel_tol: 1e-10, abs_tol: 1e-12, ..Default::default() };
        let infimum = times.iter().map(|&t| f_of(&cfg.g, xi0, sol.eval_full(t).0)).fold(f64::INFINITY, f64::min);
        let c = xi0.abs() * infimum;
        let bound = (1.0 + cfg.gamma * y0.abs() / c).ln() / cfg.gamma;
        let time = if y0 == 0.0 {
            // y' = -xi F < 0 (I) or > 0 (III) immediately
            0.0
        } else {
            let mut hit = f64::NAN;
            let mut stop = |seg: &DenseSegment| {
                let e = seg.end();
                let crossed = if quadrant_one { e[1] < 0.0 } else { e[1] > 0.0 };
                !crossed
            };
            let tr = integrate_observed(&field, PhaseState::new(xi0, y0, 0.0), &set, std::slice::from_ref(&ev), &mut stop);
            if let Ok(c) = crossing_sequence(&tr, &ev) {
                if let Some(s) = c.first() {
                    hit = s.t;
                }
            }
            hit
        };
        let entered = time.is_finite();
        // the initial phase of x0 is arbitrary, so the bound uses the infimum over phases
        let margin = if entered { bound - time } else { -1.0 };
        worst = worst.min(margin);
        out.push(Transit { xi0, y0, entered, time, bound });
    }
    let pass = out.iter().all(|t| t.entered && t.time <= t.bound * (1.0 + 1e-9) + 1e-12);
    let rep = Report::new("quadrant_transit", pass, worst, ics.len(), json!({"gamma": cfg.gamma}))
        .with_details(serde_json::to_value(&out).unwrap());
    (rep, out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleDecrement {
    pub y0: f64,
    /// |y| at successive upward crossings of the y axis, starting with y0.
    pub crossings: Vec<f64>,
    pub decrements: Vec<f64>,
    pub entered_s: bool,
    pub t_enter: Option<f64>,
    pub never_returns: bool,
}

impl CycleDecrement {
    pub fn all_positive(&self) -> bool {
        self.decrements.iter().all(|d| *d > 0.0)
    }

    pub fn min_decrement(&self) -> Option<f64> {
        self.decrements.iter().copied().reduce(f64::min)
    }
}

/// Integrates the error system from (0, y0) until the state enters S, recording
/// the upward y-axis crossings.
pub fn cycle_decrement(cfg: &SystemConfig, sol: &FourierSolution, s: &LevelSetS, y0: f64, t_max: f64) -> CycleDecrement {
    let field = ErrorField::new(cfg, sol);
    let dir = if y0 >= 0.0 { Direction::Up } else { Direction::Down };
    let ev = EventSpec::CrossYAxis(dir);
    let enter = EventSpec::EnterRegion(s.region.clone());
    let set = IntegratorSettings { t_max, max_step: 0.05, record: false, ..Default::default() };
    let mut t_enter = None;
    let mut stop = |seg: &DenseSegment| {
        let e = seg.end();
        if s.contains(e[0], e[1]) {
            t_enter = Some(seg.t1());
            return false;
        }
        true
    };
    let tr = integrate_observed(&field, PhaseState::new(0.0, y0, 0.0), &set, &[ev.clone(), enter.clone()], &mut stop);
    let entered_at = crossing_sequence(&tr, &enter).ok().and_then(|v| v.first().map(|s| s.t));
    let t_enter = entered_at.or(t_enter);
    let mut crossings = vec![y0.abs()];
    for c in crossing_sequence(&tr, &ev).unwrap_or_default() {
        if t_enter.is_some_and(|te| c.t > te) {
            break;
        }
        if c.t > 1e-9 {
            crossings.push(c.y.abs());
        }
    }
    let decrements = crossings.windows(2).map(|w| w[0] - w[1]).collect();
    let entered_s = t_enter.is_some();
    CycleDecrement {
        y0,
        crossings,
        decrements,
        entered_s,
        t_enter,
        never_returns: !entered_s && matches!(tr.outcome, Outcome::Completed),
    }
}

/// tau(t) = int_0^t sqrt(R(xi(s), s)) ds by 3-point Gauss quadrature on each accepted step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleClock {
    pub t: Vec<f64>,
    pub tau: Vec<f64>,
}

impl LiouvilleClock {
    pub fn strictly_increasing(&self) -> bool {
        self.tau.windows(2).all(|w| w[1] > w[0])
    }
}

pub fn liouville_clock(cfg: &SystemConfig, sol: &FourierSolution, alpha: f64, start: (f64, f64), t_max: f64) -> Result<LiouvilleClock> {
    let field = ErrorField::new(cfg, sol);
    let set = IntegratorSettings { t_max, record: false, ..Default::default() };
    let mut clock = LiouvilleClock { t: vec![0.0], tau: vec![0.0] };
    let mut err = None;
    let nodes = [(-(0.6f64).sqrt(), 5.0 / 9.0), (0.0, 8.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)];
    let mut obs = |seg: &DenseSegment| {
        let mut acc = 0.0;
        for (x, w) in nodes {
            let t = seg.t0 + 0.5 * seg.h * (1.0 + x);
            let s = seg.eval(t);
            match r_eval(&cfg.g, sol, alpha, s[0], t) {
                Ok(r) => acc += w * r.sqrt(),
                Err(e) => {
                    err = Some(e);
                    return false;
                }
            }
        }
        let last = *clock.tau.last().unwrap();
        clock.t.push(seg.t1());
        clock.tau.push(last + 0.5 * seg.h * acc);
        true
    };
    integrate_observed(&field, PhaseState::new(start.0, start.1, 0.0), &set, &[], &mut obs);
    match err {
        Some(e) => Err(e),
        None => Ok(clock),
    }
}

/// Integrates the error system from (xi0, y0) and returns the final distance to the origin.
pub fn error_decay(cfg: &SystemConfig, sol: &FourierSolution, xi0: f64, y0: f64, t_max: f64) -> f64 {
    let field = ErrorField::new(cfg, sol);
    let set = IntegratorSettings { t_max, record: false, ..Default::default() };
    let tr = integrate(&field, PhaseState::new(xi0, y0, 0.0), &set, &[]);
    tr.final_state.norm()
}
