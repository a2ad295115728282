//! Grid classification of initial conditions into attracted, blown up and
//! undecided, and containment of analytic sets in the empirical basin.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::integrate::{integrate_observed, DenseSegment, IntegratorSettings, Outcome};
use crate::model::{PhaseState, SystemConfig};
use crate::qpsolve::{orbit_distance, FourierSolution};
use crate::region::RegionSpec;
use crate::report::Report;

/// Distance to x0 below which a trajectory counts as captured.
pub const CAPTURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
    pub nx: usize,
    pub ny: usize,
    #[serde(default)]
    pub t_phase: f64,
}

impl GridSpec {
    pub fn new(x_range: [f64; 2], y_range: [f64; 2], nx: usize, ny: usize) -> Result<Self> {
        let g = GridSpec { x_range, y_range, nx, ny, t_phase: 0.0 };
        g.validate()?;
        Ok(g)
    }

    pub fn with_phase(mut self, t_phase: f64) -> Self {
        self.t_phase = t_phase;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.nx >= 2
            && self.ny >= 2
            && self.x_range[1] > self.x_range[0]
            && self.y_range[1] > self.y_range[0]
            && self.x_range.iter().chain(&self.y_range).all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("grid needs nx, ny >= 2 and nondegenerate ranges".into()))
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Point (i, j), endpoints included.
    pub fn point(&self, i: usize, j: usize) -> (f64, f64) {
        let x = self.x_range[0] + (self.x_range[1] - self.x_range[0]) * i as f64 / (self.nx - 1) as f64;
        let y = self.y_range[0] + (self.y_range[1] - self.y_range[0]) * j as f64 / (self.ny - 1) as f64;
        (x, y)
    }
}

/// Parses "x0:x1:nx,y0:y1:ny".
impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("grid '{s}' is not of the form x0:x1:nx,y0:y1:ny"));
        let axes: Vec<&str> = s.split(',').collect();
        if axes.len() != 2 {
            return Err(bad());
        }
        let mut parsed = Vec::new();
        for a in axes {
            let parts: Vec<&str> = a.split(':').collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
            let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
            let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
            parsed.push(([lo, hi], n));
        }
        GridSpec::new(parsed[0].0, parsed[1].0, parsed[0].1, parsed[1].1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Attracted,
    BlownUp,
    Undecided,
}

impl Label {
    pub fn as_str(&self) -> &'static str {
        match self {
            Label::Attracted => "Attracted",
            Label::BlownUp => "BlownUp",
            Label::Undecided => "Undecided",
        }
    }

    pub fn code(&self) -> char {
        match self {
            Label::Attracted => 'A',
            Label::BlownUp => 'B',
            Label::Undecided => 'U',
        }
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Attracted" | "A" => Ok(Label::Attracted),
            "BlownUp" | "B" => Ok(Label::BlownUp),
            "Undecided" | "U" => Ok(Label::Undecided),
            _ => Err(Error::InvalidInput(format!("unknown label '{s}'"))),
        }
    }
}

/// Integration budget for one classification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Integration length measured from the start phase.
    pub t_max: f64,
    pub settings: IntegratorSettings,
}

impl Budget {
    pub fn new(t_max: f64) -> Self {
        Budget { t_max, settings: IntegratorSettings { record: false, ..Default::default() } }
    }
}

/// Integrates from s0. Attracted once the synchronized distance to x0 stays
/// below 1e-6 for a full sampling window; BlownUp on escape or step collapse.
pub fn classify_point(cfg: &SystemConfig, sol: &FourierSolution, s0: PhaseState, budget: &Budget) -> (Label, f64) {
    if budget.t_max <= 0.0 {
        return (Label::Undecided, s0.t);
    }
    let window = cfg.sampling_window();
    let set = IntegratorSettings { t_max: s0.t + budget.t_max, record: false, ..budget.settings };
    let mut since: Option<f64> = (orbit_distance(sol, &s0) < CAPTURE_TOL).then_some(s0.t);
    let mut decided: Option<f64> = None;
    let mut obs = |seg: &DenseSegment| {
        for k in 1..=4 {
            let t = seg.t0 + seg.h * k as f64 / 4.0;
            let s = seg.eval(t);
            let d = orbit_distance(sol, &PhaseState::new(s[0], s[1], t));
            if d < CAPTURE_TOL {
                let start = *since.get_or_insert(t);
                if t - start >= window {
                    decided = Some(t);
                    return false;
                }
            } else {
                since = None;
            }
        }
        true
    };
    let tr = integrate_observed(cfg, s0, &set, &[], &mut obs);
    match (decided, tr.outcome) {
        (Some(t), _) => (Label::Attracted, t),
        (None, Outcome::Escaped(t)) | (None, Outcome::StepCollapse(t)) => (Label::BlownUp, t),
        _ => (Label::Undecided, tr.final_state.t),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasinMap {
    pub grid: GridSpec,
    /// labels[j][i] at y index j, x index i.
    pub labels: Vec<Vec<Label>>,
    pub times: Vec<Vec<f64>>,
}

/// Classifies every grid point; the result does not depend on the worker count.
pub fn sweep(cfg: &SystemConfig, sol: &FourierSolution, grid: &GridSpec, budget: &Budget, workers: Option<usize>) -> Result<BasinMap> {
    grid.validate()?;
    let run = || -> Vec<(Label, f64)> {
        (0..grid.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k % grid.nx, k / grid.nx);
                let (x, y) = grid.point(i, j);
                classify_point(cfg, sol, PhaseState::new(x, y, grid.t_phase), budget)
            })
            .collect()
    };
    let flat = match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run),
        None => run(),
    };
    let mut labels = vec![vec![Label::Undecided; grid.nx]; grid.ny];
    let mut times = vec![vec![0.0; grid.nx]; grid.ny];
    for (k, (l, t)) in flat.into_iter().enumerate() {
        labels[k / grid.nx][k % grid.nx] = l;
        times[k / grid.nx][k % grid.nx] = t;
    }
    Ok(BasinMap { grid: *grid, labels, times })
}

impl BasinMap {
    pub fn label(&self, i: usize, j: usize) -> Label {
        self.labels[j][i]
    }

    pub fn count(&self, l: Label) -> usize {
        self.labels.iter().flatten().filter(|v| **v == l).count()
    }

    pub fn fraction(&self, l: Label) -> f64 {
        self.count(l) as f64 / self.grid.len() as f64
    }

    /// One row per point: "x0,y0,label,t_decide".
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x0,y0,label,t_decide\n");
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let (x, y) = self.grid.point(i, j);
                writeln!(s, "{:.16e},{:.16e},{},{:.16e}", x, y, self.labels[j][i].as_str(), self.times[j][i]).unwrap();
            }
        }
        s
    }

    /// Rebuilds a map from its CSV export; the grid is inferred from the points.
    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |m: String| Error::InvalidInput(format!("basin CSV: {m}"));
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad(format!("line {}: expected 4 fields", n + 1)));
            }
            let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad(format!("line {}: bad number '{v}'", n + 1)));
            rows.push((num(f[0])?, num(f[1])?, f[2].trim().parse::<Label>()?, num(f[3])?));
        }
        let Some(first) = rows.first() else {
            return Err(bad("no rows".into()));
        };
        let nx = rows.iter().take_while(|r| r.1 == first.1).count();
        if nx < 2 || rows.len() % nx != 0 {
            return Err(bad("rows do not form a grid".into()));
        }
        let ny = rows.len() / nx;
        let last = rows[rows.len() - 1];
        let grid = GridSpec::new([first.0, last.0], [first.1, last.1], nx, ny)?;
        let labels = rows.chunks(nx).map(|c| c.iter().map(|r| r.2).collect()).collect();
        let times = rows.chunks(nx).map(|c| c.iter().map(|r| r.3).collect()).collect();
        Ok(BasinMap { grid, labels, times })
    }

    /// Text matrix: a header line then one row of label codes per y value, top row first.
    pub fn to_matrix(&self) -> String {
        let g = &self.grid;
        let mut s = format!(
            "# nx={} ny={} x=[{}, {}] y=[{}, {}] t_phase={} codes: A=Attracted B=BlownUp U=Undecided\n",
            g.nx, g.ny, g.x_range[0], g.x_range[1], g.y_range[0], g.y_range[1], g.t_phase
        );
        for row in self.labels.iter().rev() {
            s.extend(row.iter().map(|l| l.code()));
            s.push('\n');
        }
        s
    }
}

/// Fraction of grid points inside `region` labeled Attracted; passes iff no
/// inside point is BlownUp (Undecided points are reported separately).
pub fn containment_check(map: &BasinMap, region: &RegionSpec) -> Report {
    let (mut att, mut blown, mut und) = (0usize, 0usize, 0usize);
    for j in 0..map.grid.ny {
        for i in 0..map.grid.nx {
            let (x, y) = map.grid.point(i, j);
            if region.contains(x, y) {
                match map.labels[j][i] {
                    Label::Attracted => att += 1,
                    Label::BlownUp => blown += 1,
                    Label::Undecided => und += 1,
                }
            }
        }
    }
    let decided = att + blown;
    let fraction = if decided == 0 { 1.0 } else { att as f64 / decided as f64 };
    let clipped = region.bbox().is_some_and(|b| {
        b[0] < map.grid.x_range[0] || b[1] > map.grid.x_range[1] || b[2] < map.grid.y_range[0] || b[3] > map.grid.y_range[1]
    });
    Report::new(format!("containment:{}", region.kind), blown == 0, fraction, att + blown + und, region.params.clone())
        .with_details(json!({
            "attracted": att,
            "blown_up": blown,
            "undecided": und,
            "fraction_attracted": fraction,
            "vacuous": decided == 0,
            "clipped_to_grid": clipped,
        }))
}

/// Bisection along the segment from `inside` (Attracted) to `outside` (BlownUp)
/// for the label change; returns the bracket midpoint.
pub fn boundary_crossing(
    cfg: &SystemConfig,
    sol: &FourierSolution,
    inside: (f64, f64),
    outside: (f64, f64),
    t_phase: f64,
    budget: &Budget,
    tol: f64,
) -> Result<(f64, f64)> {
    let at = |s: f64| {
        let p = (inside.0 + s * (outside.0 - inside.0), inside.1 + s * (outside.1 - inside.1));
        classify_point(cfg, sol, PhaseState::new(p.0, p.1, t_phase), budget).0
    };
    if at(0.0) != Label::Attracted || at(1.0) != Label::BlownUp {
        return Err(Error::BracketFailure("segment endpoints are not Attracted / BlownUp".into()));
    }
    let len = (outside.0 - inside.0).hypot(outside.1 - inside.1);
    let (mut a, mut b) = (0.0, 1.0);
    while (b - a) * len > tol {
        let m = 0.5 * (a + b);
        match at(m) {
            Label::Attracted => a = m,
            Label::BlownUp => b = m,
            Label::Undecided => return Err(Error::BracketFailure(format!("undecided at s = {m}"))),
        }
    }
    let s = 0.5 * (a + b);
    Ok((inside.0 + s * (outside.0 - inside.0), inside.1 + s * (outside.1 - inside.1)))
}
