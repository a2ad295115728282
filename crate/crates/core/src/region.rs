//! Closed planar regions described by boundary arcs plus an analytic membership
//! predicate, and the sampled inward-flux test used to certify invariance.
//!
//! Boundaries are traversed clockwise, so the inward normal of an arc with
//! tangent (tx, ty) is (ty, -tx).

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::model::{FrozenField, Nonlinearity, PlanarField};
use crate::report::Report;

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "formula_id", rename_all = "snake_case")]
pub enum Curve {
    Segment { from: Point, to: Point },
    /// y = lambda (a - (x + shift)^exponent), traversed from x_start to x_end.
    PowerGraph { lambda: f64, a: f64, shift: f64, exponent: u32, x_start: f64, x_end: f64 },
    /// y = -b (-big_x0 - x)^rho for x <= -big_x0, traversed from x_start to x_end.
    RootGraph { b: f64, big_x0: f64, rho: f64, x_start: f64, x_end: f64 },
    Polyline { points: Vec<Point> },
    /// Full circle traversed clockwise starting at the top.
    Circle { center: Point, radius: f64 },
}

impl Curve {
    /// Point and tangent (d/ds) at s in [0, 1].
    pub fn at(&self, s: f64) -> (Point, Point) {
        match self {
            Curve::Segment { from, to } => {
                let d = [to[0] - from[0], to[1] - from[1]];
                ([from[0] + s * d[0], from[1] + s * d[1]], d)
            }
            Curve::PowerGraph { lambda, a, shift, exponent, x_start, x_end } => {
                let dx = x_end - x_start;
                let x = x_start + s * dx;
                let u = x + shift;
                let n = *exponent as i32;
                let y = lambda * (a - u.powi(n));
                let dydx = -lambda * n as f64 * u.powi(n - 1);
                ([x, y], [dx, dydx * dx])
            }
            Curve::RootGraph { b, big_x0, rho, x_start, x_end } => {
                let dx = x_end - x_start;
                let x = x_start + s * dx;
                let u = (-big_x0 - x).max(0.0);
                let y = -b * u.powf(*rho);
                let dydx = b * rho * u.powf(rho - 1.0);
                ([x, y], [dx, dydx * dx])
            }
            Curve::Polyline { points } => {
                let n = points.len() - 1;
                let pos = (s * n as f64).clamp(0.0, n as f64);
                let i = (pos.floor() as usize).min(n - 1);
                let r = pos - i as f64;
                let (p, q) = (points[i], points[i + 1]);
                let d = [(q[0] - p[0]) * n as f64, (q[1] - p[1]) * n as f64];
                ([p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])], d)
            }
            Curve::Circle { center, radius } => {
                let th = std::f64::consts::FRAC_PI_2 - 2.0 * std::f64::consts::PI * s;
                let p = [center[0] + radius * th.cos(), center[1] + radius * th.sin()];
                let d = [2.0 * std::f64::consts::PI * radius * th.sin(), -2.0 * std::f64::consts::PI * radius * th.cos()];
                (p, d)
            }
        }
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.at(0.0).0, self.at(1.0).0)
    }

    /// Unit inward normal at s (clockwise orientation).
    pub fn inward_normal(&self, s: f64) -> Point {
        let (_, t) = self.at(s);
        let n = t[0].hypot(t[1]);
        if n == 0.0 {
            return [0.0, 0.0];
        }
        [t[1] / n, -t[0] / n]
    }

    pub fn sample(&self, n: usize) -> Vec<Point> {
        match self {
            Curve::Polyline { points } if n <= points.len() => points.clone(),
            _ => (0..n.max(2)).map(|k| self.at(k as f64 / (n.max(2) - 1) as f64).0).collect(),
        }
    }

    pub fn domain(&self) -> [f64; 2] {
        match self {
            Curve::PowerGraph { x_start, x_end, .. } | Curve::RootGraph { x_start, x_end, .. } => [*x_start, *x_end],
            _ => [0.0, 1.0],
        }
    }
}

/// Which frozen-forcing field is the worst case on an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Governing {
    Lower,
    Upper,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryArc {
    pub name: String,
    pub curve: Curve,
    pub governing: Governing,
    /// Window edge of an unbounded region; not part of the true boundary.
    #[serde(default)]
    pub artificial: bool,
}

impl BoundaryArc {
    pub fn new(name: &str, curve: Curve, governing: Governing) -> Self {
        BoundaryArc { name: name.into(), curve, governing, artificial: false }
    }
}

/// Analytic membership predicates. `violation` is <= 0 inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Membership {
    Empty,
    Disk { center: Point, radius: f64 },
    /// Convex polygon given clockwise.
    Polygon { points: Vec<Point> },
    Hexagon { p: u32, f: f64, big_f: f64, lambda1: f64, lambda2: f64 },
    /// {(x, y): v = x - c0 in [v_left, v_right], y^2/2 + v^3/3 + c0 v^2 <= energy}
    LevelCurve { c0: f64, energy: f64, v_left: f64, v_right: f64 },
    /// {x <= -xi, (F^2p - x^2p)/gamma <= y <= 0}
    JSet { p: u32, big_f: f64, gamma: f64, xi: f64 },
    /// J intersected with y <= -b (-X0 - x)^(3/2) for x <= -X0.
    BlowupS { p: u32, big_f: f64, gamma: f64, xi: f64, big_x0: f64, b: f64 },
    /// {(xi, y): y^2 / (2 r1) + V(xi) <= wtilde^2 / 2}, V(v) = int_0^v s (g(alpha+s) - g(alpha))/s ds
    EnergyLevel { g: Nonlinearity, alpha: f64, r1: f64, wtilde: f64 },
    Union { parts: Vec<Membership> },
}

/// V(v) = G(alpha + v) - G(alpha) - g(alpha) v, the potential of v Q(v).
pub fn shifted_potential(g: &Nonlinearity, alpha: f64, v: f64) -> f64 {
    // expand in powers of v to avoid cancellation: V = sum_{k>=2} g^{(k-1)}(alpha) v^k / k!
    let c = g.power_coeffs();
    let n = c.len() - 1;
    // Taylor coefficients of g at alpha: t_j = sum_n c_n C(n, j) alpha^(n-j)
    let mut total = 0.0;
    for j in 1..=n {
        let mut tj = 0.0;
        for (m, cm) in c.iter().enumerate().skip(j) {
            tj += cm * binomial(m, j) * alpha.powi((m - j) as i32);
        }
        // t_j v^j integrates to t_j v^(j+1)/(j+1)
        total += tj * v.powi(j as i32 + 1) / (j + 1) as f64;
    }
    total
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

impl Membership {
    pub fn violation(&self, x: f64, y: f64) -> f64 {
        match self {
            Membership::Empty => f64::INFINITY,
            Membership::Disk { center, radius } => (x - center[0]).hypot(y - center[1]) - radius,
            Membership::Polygon { points } => {
                let n = points.len();
                (0..n)
                    .map(|i| {
                        let (p, q) = (points[i], points[(i + 1) % n]);
                        let t = [q[0] - p[0], q[1] - p[1]];
                        let l = t[0].hypot(t[1]);
                        // inward normal (ty, -tx) for clockwise order
                        -((x - p[0]) * t[1] - (y - p[1]) * t[0]) / l
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Membership::Hexagon { p, f, big_f, lambda1, lambda2 } => {
                let n = 2 * *p as i32;
                let y_h = lambda1 * big_f.powi(n);
                let y_k = lambda2 * (f.powi(n) - (2.0 * f).powi(n));
                let upper = if x <= 0.0 { y_h } else { lambda1 * (big_f.powi(n) - x.powi(n)) };
                let lower = if x >= 0.0 { y_k } else { lambda2 * (f.powi(n) - (x + 2.0 * f).powi(n)) };
                [-f - x, x - big_f, y - upper, lower - y].into_iter().fold(f64::NEG_INFINITY, f64::max)
            }
            Membership::LevelCurve { c0, energy, v_left, v_right } => {
                let v = x - c0;
                let h = 0.5 * y * y + v.powi(3) / 3.0 + c0 * v * v - energy;
                h.max(v_left - v).max(v - v_right)
            }
            Membership::JSet { p, big_f, gamma, xi } => {
                let n = 2 * *p as i32;
                let bottom = (big_f.powi(n) - x.powi(n)) / gamma;
                (x + xi).max(y).max(bottom - y)
            }
            Membership::BlowupS { p, big_f, gamma, xi, big_x0, b } => {
                let n = 2 * *p as i32;
                let bottom = (big_f.powi(n) - x.powi(n)) / gamma;
                let top = if x <= -big_x0 { -b * (-big_x0 - x).powf(1.5) } else { 0.0 };
                (x + xi).max(y - top).max(bottom - y)
            }
            Membership::EnergyLevel { g, alpha, r1, wtilde } => {
                y * y / (2.0 * r1) + shifted_potential(g, *alpha, x) - 0.5 * wtilde * wtilde
            }
            Membership::Union { parts } => {
                parts.iter().map(|m| m.violation(x, y)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.violation(x, y) <= 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    pub kind: String,
    pub params: Value,
    pub arcs: Vec<BoundaryArc>,
    pub membership: Membership,
}

impl RegionSpec {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.membership.contains(x, y)
    }

    pub fn violation(&self, x: f64, y: f64) -> f64 {
        self.membership.violation(x, y)
    }

    pub fn empty(kind: &str) -> Self {
        RegionSpec { kind: kind.into(), params: Value::Null, arcs: vec![], membership: Membership::Empty }
    }

    pub fn disk(center: Point, radius: f64) -> Self {
        RegionSpec {
            kind: "disk".into(),
            params: json!({"center": center, "radius": radius}),
            arcs: vec![BoundaryArc::new("circle", Curve::Circle { center, radius }, Governing::Both)],
            membership: Membership::Disk { center, radius },
        }
    }

    /// Convex polygon from clockwise vertices.
    pub fn polygon(points: Vec<Point>) -> Self {
        let n = points.len();
        let arcs = (0..n)
            .map(|i| {
                BoundaryArc::new(
                    &format!("edge{i}"),
                    Curve::Segment { from: points[i], to: points[(i + 1) % n] },
                    Governing::Both,
                )
            })
            .collect();
        RegionSpec { kind: "polygon".into(), params: json!({"points": points}), arcs, membership: Membership::Polygon { points } }
    }

    /// Largest gap between consecutive arc endpoints (closure check).
    pub fn closure_gap(&self) -> f64 {
        let n = self.arcs.len();
        (0..n)
            .map(|i| {
                let (_, end) = self.arcs[i].curve.endpoints();
                let (start, _) = self.arcs[(i + 1) % n].curve.endpoints();
                (end[0] - start[0]).hypot(end[1] - start[1])
            })
            .fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box of the sampled boundary.
    pub fn bbox(&self) -> Option<[f64; 4]> {
        let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
        let mut any = false;
        for a in &self.arcs {
            for p in a.curve.sample(200) {
                any = true;
                b[0] = b[0].min(p[0]);
                b[1] = b[1].max(p[0]);
                b[2] = b[2].min(p[1]);
                b[3] = b[3].max(p[1]);
            }
        }
        any.then_some(b)
    }

    /// `{kind, params, arcs: [{formula_id, domain, coeffs}]}`
    pub fn to_json(&self) -> Value {
        let arcs: Vec<Value> = self
            .arcs
            .iter()
            .map(|a| {
                let mut c = serde_json::to_value(&a.curve).expect("curve serializes");
                let formula_id = c["formula_id"].clone();
                c.as_object_mut().unwrap().remove("formula_id");
                json!({
                    "name": a.name,
                    "formula_id": formula_id,
                    "domain": a.curve.domain(),
                    "coeffs": c,
                    "governing": a.governing,
                    "artificial": a.artificial,
                })
            })
            .collect();
        json!({"kind": self.kind, "params": self.params, "arcs": arcs, "membership": self.membership})
    }

    /// Rebuilds a region from its JSON export.
    pub fn from_json(v: &Value) -> crate::Result<Self> {
        let bad = |m: &str| crate::Error::InvalidInput(format!("region JSON: {m}"));
        let kind = v["kind"].as_str().ok_or_else(|| bad("missing kind"))?.to_string();
        let mut arcs = Vec::new();
        for a in v["arcs"].as_array().ok_or_else(|| bad("missing arcs"))? {
            let mut c = a["coeffs"].clone();
            c.as_object_mut().ok_or_else(|| bad("arc coeffs"))?.insert("formula_id".into(), a["formula_id"].clone());
            arcs.push(BoundaryArc {
                name: a["name"].as_str().unwrap_or("").to_string(),
                curve: serde_json::from_value(c)?,
                governing: serde_json::from_value(a["governing"].clone()).unwrap_or(Governing::Both),
                artificial: a["artificial"].as_bool().unwrap_or(false),
            });
        }
        let membership = serde_json::from_value(v["membership"].clone()).unwrap_or(Membership::Empty);
        Ok(RegionSpec { kind, params: v["params"].clone(), arcs, membership })
    }

    /// CSV polyline "x,y" of one arc.
    pub fn arc_csv(&self, idx: usize, n: usize) -> String {
        let mut s = String::from("x,y\n");
        for p in self.arcs[idx].curve.sample(n) {
            s.push_str(&format!("{:.16e},{:.16e}\n", p[0], p[1]));
        }
        s
    }
}

/// Fields against which the boundary flux is tested.
pub struct FluxFields<'a> {
    /// (phi_f, phi_F); the flux is linear in the forcing value, so the minimum
    /// over both extremes certifies every forcing phase.
    pub extremes: Option<(FrozenField, FrozenField)>,
    /// True time-dependent field, sampled at `times`.
    pub field: Option<&'a dyn PlanarField>,
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSample {
    pub arc: usize,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub flux: f64,
}

pub const FLUX_TOL: f64 = 1e-9;

/// Samples every non-artificial arc at `n_boundary` points and evaluates the
/// inward normal component of the fields. Passes iff the minimum is >= -1e-9.
pub fn verify_inward_flux(region: &RegionSpec, fields: &FluxFields, n_boundary: usize) -> Report {
    let mut worst = FluxSample { arc: 0, x: f64::NAN, y: f64::NAN, t: f64::NAN, flux: f64::INFINITY };
    let mut per_arc = Vec::new();
    let mut count = 0usize;
    for (ai, arc) in region.arcs.iter().enumerate() {
        if arc.artificial {
            continue;
        }
        let mut arc_min = f64::INFINITY;
        for k in 0..n_boundary {
            let s = (k as f64 + 0.5) / n_boundary as f64;
            let s = if n_boundary > 1 { k as f64 / (n_boundary - 1) as f64 } else { s };
            let (p, _) = arc.curve.at(s);
            let n = arc.curve.inward_normal(s);
            let mut consider = |flux: f64, t: f64| {
                count += 1;
                if flux < arc_min {
                    arc_min = flux;
                }
                if flux < worst.flux {
                    worst = FluxSample { arc: ai, x: p[0], y: p[1], t, flux };
                }
            };
            if let Some((lo, up)) = &fields.extremes {
                // both extremes on every arc: the flux is affine in the forcing value
                for fz in [lo, up] {
                    let v = fz.eval(0.0, p[0], p[1]);
                    consider(n[0] * v.0 + n[1] * v.1, f64::NAN);
                }
            }
            if let Some(field) = fields.field {
                for &t in &fields.times {
                    let v = field.eval(t, p[0], p[1]);
                    consider(n[0] * v.0 + n[1] * v.1, t);
                }
            }
        }
        per_arc.push(json!({"arc": arc.name, "min_flux": arc_min, "governing": arc.governing}));
    }
    let pass = worst.flux >= -FLUX_TOL;
    Report::new(format!("inward_flux:{}", region.kind), pass, worst.flux, count, region.params.clone())
        .with_details(json!({"worst": worst, "arcs": per_arc, "tolerance": FLUX_TOL}))
}
