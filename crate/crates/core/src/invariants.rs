//! Set constructions for the even monomial g(x) = x^(2p): the hexagonal
//! trapping set A, the level-curve basin estimate D, the blow-up sets J and
//! S(-X0), and the union D0 = D u A.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::model::{bisect, FrozenField, Nonlinearity, PlanarField, SystemConfig};
use crate::region::{verify_inward_flux, BoundaryArc, Curve, FluxFields, Governing, Membership, Point, RegionSpec};
use crate::report::Report;

fn check_bounds(f: f64, big_f: f64) -> Result<()> {
    if !(f > 0.0 && big_f > f && big_f.is_finite()) {
        return Err(Error::Precondition(format!("need 0 < f < F, got f = {f}, F = {big_f}")));
    }
    Ok(())
}

/// The two operands of the hexagon threshold: 8pF^(2p-1) (reality of lambda1)
/// and p(F^2p - f^2p) / (f (1 - 4^-p)) (J below L).
pub fn hexagon_threshold(p: u32, f: f64, big_f: f64) -> (f64, f64) {
    let pf = p as f64;
    let n = 2 * p as i32;
    let reality = 8.0 * pf * big_f.powi(n - 1);
    let j_below = pf * (big_f.powi(n) - f.powi(n)) / (f * (1.0 - 4f64.powi(-(p as i32))));
    (reality, j_below)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HexagonA {
    pub p: u32,
    pub f_pow: f64,
    pub big_f_pow: f64,
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// G, H, I, J, K, L in clockwise order.
    pub vertices: [Point; 6],
    pub region: RegionSpec,
}

pub const VERTEX_NAMES: [&str; 6] = ["G", "H", "I", "J", "K", "L"];

/// lambda1 = gamma/(4pF^(2p-1)) (1 + sqrt(1 - 8pF^(2p-1)/gamma^2)), the larger root
/// of 2pF^(2p-1) l^2 - gamma l + 1 = 0; lambda2 = gamma / (2p (2f)^(2p-1)).
pub fn build_hexagon(p: u32, f: f64, big_f: f64, gamma: f64) -> Result<HexagonA> {
    check_bounds(f, big_f)?;
    if p == 0 || gamma <= 0.0 {
        return Err(Error::InvalidInput("need p >= 1 and gamma > 0".into()));
    }
    let (reality, j_below) = hexagon_threshold(p, f, big_f);
    let g2 = gamma * gamma;
    if g2 < reality || g2 < j_below {
        return Err(Error::GammaBelowThreshold { gamma_sq: g2, reality, j_below });
    }
    let pf = p as f64;
    let k = big_f.powi(2 * p as i32 - 1);
    let disc = (1.0 - 8.0 * pf * k / g2).max(0.0);
    let lambda1 = gamma / (4.0 * pf * k) * (1.0 + disc.sqrt());
    let lambda2 = gamma / (2.0 * pf * (2.0 * f).powi(2 * p as i32 - 1));
    Ok(HexagonA::from_lambdas(p, f, big_f, gamma, lambda1, lambda2))
}

impl HexagonA {
    /// Hexagon with arbitrary slopes (used to exhibit failing constructions).
    pub fn from_lambdas(p: u32, f: f64, big_f: f64, gamma: f64, lambda1: f64, lambda2: f64) -> Self {
        let n = 2 * p as i32;
        let y_top = lambda1 * big_f.powi(n);
        let y_bot = -lambda2 * f.powi(n) * (4f64.powi(p as i32) - 1.0);
        let g = [-f, y_top];
        let h = [0.0, y_top];
        let i = [big_f, 0.0];
        let j = [big_f, y_bot];
        let k = [0.0, y_bot];
        let l = [-f, 0.0];
        let arcs = vec![
            BoundaryArc::new("GH", Curve::Segment { from: g, to: h }, Governing::Both),
            BoundaryArc::new(
                "HI",
                Curve::PowerGraph { lambda: lambda1, a: big_f.powi(n), shift: 0.0, exponent: 2 * p, x_start: 0.0, x_end: big_f },
                Governing::Upper,
            ),
            BoundaryArc::new("IJ", Curve::Segment { from: i, to: j }, Governing::Both),
            BoundaryArc::new("JK", Curve::Segment { from: j, to: k }, Governing::Both),
            BoundaryArc::new(
                "KL",
                Curve::PowerGraph { lambda: lambda2, a: f.powi(n), shift: 2.0 * f, exponent: 2 * p, x_start: 0.0, x_end: -f },
                Governing::Lower,
            ),
            BoundaryArc::new("LG", Curve::Segment { from: l, to: g }, Governing::Both),
        ];
        let region = RegionSpec {
            kind: "hexagon".into(),
            params: json!({"p": p, "f_pow": f, "F_pow": big_f, "gamma": gamma, "lambda1": lambda1, "lambda2": lambda2}),
            arcs,
            membership: Membership::Hexagon { p, f, big_f, lambda1, lambda2 },
        };
        HexagonA { p, f_pow: f, big_f_pow: big_f, gamma, lambda1, lambda2, vertices: [g, h, i, j, k, l], region }
    }

    pub fn vertex(&self, name: &str) -> Option<Point> {
        VERTEX_NAMES.iter().position(|v| *v == name).map(|i| self.vertices[i])
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.region.contains(x, y)
    }

    /// Frozen fields at f(t) = f^2p and f(t) = F^2p.
    pub fn extreme_fields(&self) -> (FrozenField, FrozenField) {
        let g = Nonlinearity::EvenMonomial { p: self.p };
        let n = 2 * self.p as i32;
        (
            FrozenField { g: g.clone(), gamma: self.gamma, level: self.f_pow.powi(n) },
            FrozenField { g, gamma: self.gamma, level: self.big_f_pow.powi(n) },
        )
    }

    /// Inward flux of both extreme fields and of the true field at `n_time` phases.
    pub fn verify_flux(&self, cfg: Option<&SystemConfig>, n_boundary: usize, n_time: usize) -> Report {
        let times = phases(cfg, n_time);
        let fields = FluxFields {
            extremes: Some(self.extreme_fields()),
            field: cfg.map(|c| c as &dyn PlanarField),
            times,
        };
        verify_inward_flux(&self.region, &fields, n_boundary)
    }
}

fn phases(cfg: Option<&SystemConfig>, n: usize) -> Vec<f64> {
    match cfg {
        Some(c) => {
            let w = c.sampling_window();
            (0..n).map(|k| w * k as f64 / n as f64).collect()
        }
        None => Vec::new(),
    }
}

/// h(x) = 2p x^(2p-1) (F^2p - x^2p) - gamma^2 (F^2p - f^2p).
pub fn h_blowup(p: u32, f: f64, big_f: f64, gamma: f64, x: f64) -> f64 {
    let n = 2 * p as i32;
    2.0 * p as f64 * x.powi(n - 1) * (big_f.powi(n) - x.powi(n)) - gamma * gamma * (big_f.powi(n) - f.powi(n))
}

/// Number of sign changes of h on a uniform grid of n points over [a, b].
pub fn h_sign_changes(p: u32, f: f64, big_f: f64, gamma: f64, a: f64, b: f64, n: usize) -> usize {
    let mut count = 0;
    let mut prev = h_blowup(p, f, big_f, gamma, a).signum();
    for k in 1..n {
        let x = a + (b - a) * k as f64 / (n - 1) as f64;
        let s = h_blowup(p, f, big_f, gamma, x).signum();
        if s != 0.0 && prev != 0.0 && s != prev {
            count += 1;
        }
        if s != 0.0 {
            prev = s;
        }
    }
    count
}

/// xi > F with h(-xi) = 0: bracket [-F (1 + gamma^2), -F], widened by doubling, then bisection.
pub fn solve_xi_root(p: u32, f: f64, big_f: f64, gamma: f64) -> Result<f64> {
    check_bounds(f, big_f)?;
    let h = |x: f64| h_blowup(p, f, big_f, gamma, x);
    let right = -big_f;
    let mut left = -big_f * (1.0 + gamma * gamma);
    let mut k = 0;
    while h(left) <= 0.0 {
        left *= 2.0;
        k += 1;
        if k > 200 || !left.is_finite() {
            return Err(Error::BracketFailure("h stays non-positive".into()));
        }
    }
    if h(right) >= 0.0 {
        return Err(Error::BracketFailure("h(-F) is not negative".into()));
    }
    let root = bisect(&h, left, right, 300);
    let n = 2 * p as i32;
    let scale = gamma * gamma * (big_f.powi(n) - f.powi(n));
    let slack = 1e-10 * scale;
    if h(root).abs() > slack.max(1e3 * f64::EPSILON * root.abs().powi(4 * p as i32 - 1)) {
        return Err(Error::BracketFailure(format!("residual {} at root", h(root))));
    }
    Ok(-root)
}

/// M(v) = a2 v^2 - gamma b v + 2 X0 p F^(2p-2) with a2 = p F^(2p-2) - 3 b^2 / 2.
pub fn m_blowup(p: u32, big_f: f64, gamma: f64, big_x0: f64, b: f64, v: f64) -> f64 {
    let k = p as f64 * big_f.powi(2 * p as i32 - 2);
    (k - 1.5 * b * b) * v * v - gamma * b * v + 2.0 * big_x0 * k
}

/// L(v) = (X0 + v^2)^2p - F^2p - b v^3 (3 b v / 2 + gamma).
pub fn l_blowup(p: u32, big_f: f64, gamma: f64, big_x0: f64, b: f64, v: f64) -> f64 {
    let n = 2 * p as i32;
    (big_x0 + v * v).powi(n) - big_f.powi(n) - b * v.powi(3) * (1.5 * b * v + gamma)
}

/// Upper curve of S(-X0) lies above the lower curve of J on [-X_check, -X0].
fn curves_separate(p: u32, big_f: f64, gamma: f64, big_x0: f64, b: f64) -> bool {
    let n = 2 * p as i32;
    let x_check = 1e3 * big_x0;
    (0..=4000).all(|k| {
        let x = -big_x0 - (x_check - big_x0) * (k as f64 / 4000.0).powi(2);
        let top = -b * (-big_x0 - x).powf(1.5);
        let bottom = (big_f.powi(n) - x.powi(n)) / gamma;
        top > bottom || x == -big_x0
    })
}

/// Largest b allowed by gamma^2 b^2 <= 8 a2 X0 pF^(2p-2), times 0.9; then
/// a2 > 0, M >= 0 and separation of the two boundary curves are rechecked.
pub fn choose_b(p: u32, big_f: f64, gamma: f64, big_x0: f64) -> Result<f64> {
    if !(big_x0 > big_f && big_f > 0.0 && gamma > 0.0) {
        return Err(Error::Precondition(format!("need X0 > F > 0, got X0 = {big_x0}, F = {big_f}")));
    }
    let k = p as f64 * big_f.powi(2 * p as i32 - 2);
    // gamma^2 b^2 <= 8 X0 k (k - 3 b^2 / 2)  <=>  b^2 (gamma^2 + 12 X0 k) <= 8 X0 k^2
    let b2 = 8.0 * big_x0 * k * k / (gamma * gamma + 12.0 * big_x0 * k);
    if !(b2 > 0.0) {
        return Err(Error::NoValidB);
    }
    let mut b = 0.9 * b2.sqrt();
    for _ in 0..60 {
        let a2_ok = k - 1.5 * b * b > 0.0;
        let m_ok = (0..=2000).all(|i| m_blowup(p, big_f, gamma, big_x0, b, 100.0 * i as f64 / 2000.0) >= 0.0);
        if a2_ok && m_ok && curves_separate(p, big_f, gamma, big_x0, b) {
            return Ok(b);
        }
        b *= 0.5;
    }
    Err(Error::NoValidB)
}

/// t_inf = 2 u0^(-1/2) / b.
pub fn blowup_time_bound(b: f64, u0: f64) -> f64 {
    2.0 / (b * u0.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupRegion {
    pub p: u32,
    pub f_pow: f64,
    #[serde(rename = "F_pow")]
    pub big_f_pow: f64,
    pub gamma: f64,
    pub xi_root: f64,
    #[serde(rename = "X0")]
    pub big_x0: f64,
    pub b: f64,
    pub rho: f64,
    /// Left edge of the export window.
    pub x_min: f64,
    pub j_set: RegionSpec,
    pub s_set: RegionSpec,
}

impl BlowupRegion {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.s_set.contains(x, y)
    }

    /// u0 = -X0 - x0 for a start at x0.
    pub fn u0(&self, x: f64) -> f64 {
        -self.big_x0 - x
    }

    pub fn extreme_fields(&self) -> (FrozenField, FrozenField) {
        let g = Nonlinearity::EvenMonomial { p: self.p };
        let n = 2 * self.p as i32;
        (
            FrozenField { g: g.clone(), gamma: self.gamma, level: self.f_pow.powi(n) },
            FrozenField { g, gamma: self.gamma, level: self.big_f_pow.powi(n) },
        )
    }

    pub fn verify_flux(&self, cfg: Option<&SystemConfig>, n_boundary: usize, n_time: usize) -> (Report, Report) {
        let times = phases(cfg, n_time);
        let fields = FluxFields { extremes: Some(self.extreme_fields()), field: cfg.map(|c| c as &dyn PlanarField), times };
        (verify_inward_flux(&self.j_set, &fields, n_boundary), verify_inward_flux(&self.s_set, &fields, n_boundary))
    }
}

pub fn build_blowup_region(p: u32, f: f64, big_f: f64, gamma: f64, big_x0: f64) -> Result<BlowupRegion> {
    build_blowup_region_window(p, f, big_f, gamma, big_x0, -50.0 * big_x0)
}

pub fn build_blowup_region_window(p: u32, f: f64, big_f: f64, gamma: f64, big_x0: f64, x_min: f64) -> Result<BlowupRegion> {
    let xi = solve_xi_root(p, f, big_f, gamma)?;
    if big_x0 < xi {
        return Err(Error::Precondition(format!("X0 = {big_x0} must be >= xi = {xi}")));
    }
    if x_min >= -big_x0 {
        return Err(Error::InvalidInput("window must extend left of -X0".into()));
    }
    let b = choose_b(p, big_f, gamma, big_x0)?;
    let n = 2 * p as i32;
    let bottom = |x: f64| (big_f.powi(n) - x.powi(n)) / gamma;
    let lower_curve = |from: f64| Curve::PowerGraph {
        lambda: 1.0 / gamma,
        a: big_f.powi(n),
        shift: 0.0,
        exponent: 2 * p,
        x_start: from,
        x_end: x_min,
    };
    let window = |top: f64| {
        let mut a = BoundaryArc::new("window", Curve::Segment { from: [x_min, bottom(x_min)], to: [x_min, top] }, Governing::Both);
        a.artificial = true;
        a
    };
    let params = json!({"p": p, "f_pow": f, "F_pow": big_f, "gamma": gamma, "xi": xi, "X0": big_x0, "b": b, "rho": 1.5, "x_min": x_min});
    let j_set = RegionSpec {
        kind: "J".into(),
        params: params.clone(),
        arcs: vec![
            BoundaryArc::new("top", Curve::Segment { from: [x_min, 0.0], to: [-xi, 0.0] }, Governing::Both),
            BoundaryArc::new("right", Curve::Segment { from: [-xi, 0.0], to: [-xi, bottom(-xi)] }, Governing::Both),
            BoundaryArc::new("bottom", lower_curve(-xi), Governing::Lower),
            window(0.0),
        ],
        membership: Membership::JSet { p, big_f, gamma, xi },
    };
    let top_left = -b * (-big_x0 - x_min).powf(1.5);
    let mut arcs = vec![BoundaryArc::new(
        "u_curve",
        Curve::RootGraph { b, big_x0, rho: 1.5, x_start: x_min, x_end: -big_x0 },
        Governing::Upper,
    )];
    if big_x0 > xi {
        arcs.push(BoundaryArc::new("top", Curve::Segment { from: [-big_x0, 0.0], to: [-xi, 0.0] }, Governing::Both));
    }
    arcs.push(BoundaryArc::new("right", Curve::Segment { from: [-xi, 0.0], to: [-xi, bottom(-xi)] }, Governing::Both));
    arcs.push(BoundaryArc::new("bottom", lower_curve(-xi), Governing::Lower));
    arcs.push(window(top_left));
    let s_set = RegionSpec {
        kind: "S(-X0)".into(),
        params,
        arcs,
        membership: Membership::BlowupS { p, big_f, gamma, xi, big_x0, b },
    };
    Ok(BlowupRegion { p, f_pow: f, big_f_pow: big_f, gamma, xi_root: xi, big_x0, b, rho: 1.5, x_min, j_set, s_set })
}

/// U(v) = v^3/3 + c0 v^2.
pub fn u_potential(c0: f64, v: f64) -> f64 {
    v.powi(3) / 3.0 + c0 * v * v
}

/// Bounded component of w^2/2 + U(v) = E with E = U(-2c0 + C2 sqrt(eps)), in x = c0 + v.
#[derive(Debug, Clone, PartialEq)]
pub struct Section5Set {
    pub c0: f64,
    pub gamma: f64,
    pub c2: f64,
    pub energy: f64,
    pub beta: f64,
    /// v-coordinate of the left crossing, -2c0 + C2 eps^beta.
    pub xi_neg_crossing: f64,
    pub v_right: f64,
    /// Clockwise boundary in (x, y).
    pub boundary: Vec<Point>,
    pub region: RegionSpec,
}

impl Section5Set {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.region.contains(x, y)
    }
}

pub fn build_section5_set(c0: f64, gamma: f64, c2: f64) -> Result<Section5Set> {
    if !(c0 > 0.0 && gamma > 0.0 && c2 > 0.0) {
        return Err(Error::InvalidInput("need c0, gamma, C2 > 0".into()));
    }
    let beta = 0.5;
    let shift = c2 * gamma.powf(-beta);
    if shift >= 2.0 * c0 {
        return Err(Error::EmptySet(format!("C2 eps^1/2 = {shift} >= 2 c0 = {}", 2.0 * c0)));
    }
    let v_left = -2.0 * c0 + shift;
    let energy = u_potential(c0, v_left);
    // U increases on (0, inf) from 0 and reaches 4c0^3/3 > E at v = c0
    let v_right = bisect(&|v| u_potential(c0, v) - energy, 0.0, c0, 200);
    let n = 360;
    let branch = |k: usize| {
        let s = 0.5 * (1.0 - (std::f64::consts::PI * k as f64 / n as f64).cos());
        let v = v_left + (v_right - v_left) * s;
        let y = if k == 0 || k == n { 0.0 } else { (2.0 * (energy - u_potential(c0, v)).max(0.0)).sqrt() };
        [c0 + v, y]
    };
    let mut boundary: Vec<Point> = (0..=n).map(branch).collect();
    boundary.extend((0..n).rev().map(|k| {
        let p = branch(k);
        [p[0], -p[1]]
    }));
    let region = RegionSpec {
        kind: "D".into(),
        params: json!({"c0": c0, "gamma": gamma, "C2": c2, "beta": beta, "energy": energy}),
        arcs: vec![BoundaryArc::new("level_curve", Curve::Polyline { points: boundary.clone() }, Governing::Both)],
        membership: Membership::LevelCurve { c0, energy, v_left, v_right },
    };
    Ok(Section5Set { c0, gamma, c2, energy, beta, xi_neg_crossing: v_left, v_right, boundary, region })
}

/// Upper and lower separatrix branches y = +-sqrt(2(2c0^3 - x^3 + 3c0^2 x)/3) in
/// the original x; NaN outside [-c0, 2c0].
pub fn separatrix_eval(c0: f64, x: f64) -> (f64, f64) {
    if x < -c0 || x > 2.0 * c0 {
        return (f64::NAN, f64::NAN);
    }
    let y = (2.0 * (2.0 * c0.powi(3) - x.powi(3) + 3.0 * c0 * c0 * x) / 3.0).max(0.0).sqrt();
    (y, -y)
}

/// D0 = D u A. The boundary keeps the sampled arc pieces of each set that are not
/// strictly inside the other one.
pub fn union_d0(d: &RegionSpec, a: &RegionSpec) -> RegionSpec {
    if d.membership == Membership::Empty {
        return a.clone();
    }
    if a.membership == Membership::Empty {
        return d.clone();
    }
    let mut arcs = Vec::new();
    for (own, other) in [(d, a), (a, d)] {
        for arc in &own.arcs {
            let pts = arc.curve.sample(800);
            let mut run: Vec<Point> = Vec::new();
            let mut flush = |run: &mut Vec<Point>| {
                if run.len() >= 2 {
                    let name = format!("{}:{}#{}", own.kind, arc.name, arcs.len());
                    arcs.push(BoundaryArc::new(&name, Curve::Polyline { points: std::mem::take(run) }, arc.governing));
                }
                run.clear();
            };
            for p in pts {
                if other.violation(p[0], p[1]) < -1e-12 {
                    flush(&mut run);
                } else {
                    run.push(p);
                }
            }
            flush(&mut run);
        }
    }
    RegionSpec {
        kind: "D0".into(),
        params: json!({"parts": [d.kind, a.kind]}),
        arcs,
        membership: Membership::Union { parts: vec![d.membership.clone(), a.membership.clone()] },
    }
}

/// A grid point of `a` that is not in `b`, scanning a's bounding box.
pub fn difference_witness(a: &RegionSpec, b: &RegionSpec, n: usize) -> Option<Point> {
    let bb = a.bbox()?;
    for i in 0..n {
        for j in 0..n {
            let x = bb[0] + (bb[1] - bb[0]) * (i as f64 + 0.5) / n as f64;
            let y = bb[2] + (bb[3] - bb[2]) * (j as f64 + 0.5) / n as f64;
            if a.contains(x, y) && !b.contains(x, y) {
                return Some([x, y]);
            }
        }
    }
    None
}
