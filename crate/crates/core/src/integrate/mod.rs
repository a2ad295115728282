//! Adaptive integration of planar nonautonomous systems with dense output,
//! axis-crossing and region events, and blow-up detection.

mod dopri;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use dopri::{DenseSegment, StepControl, StepOutcome, Stepper};

use crate::error::{Error, Result};
use crate::model::{PhaseState, PlanarField};
use crate::region::RegionSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_max: f64,
    pub escape_radius: f64,
    pub min_step: f64,
    /// Record every accepted step when `None`, otherwise resample uniformly.
    pub sample_interval: Option<f64>,
    /// Keep samples at all (observers may not need them).
    pub record: bool,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings {
            rel_tol: 1e-9,
            abs_tol: 1e-11,
            max_step: 0.1,
            t_max: 100.0,
            escape_radius: 1e6,
            min_step: 1e-13,
            sample_interval: None,
            record: true,
        }
    }
}

impl IntegratorSettings {
    pub fn with_t_max(mut self, t_max: f64) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.min_step > 0.0
            && self.min_step < self.max_step
            && self.escape_radius > 0.0
            && self.t_max.is_finite()
            && self.sample_interval.is_none_or(|d| d > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid integrator settings {self:?}")))
        }
    }

    fn control(&self) -> StepControl {
        StepControl { rel_tol: self.rel_tol, abs_tol: self.abs_tol, max_step: self.max_step, min_step: self.min_step }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// The crossing coordinate increases through zero.
    Up,
    /// The crossing coordinate decreases through zero.
    Down,
    Any,
}

impl Direction {
    fn name(self) -> &'static str {
        match self {
            Direction::Up => "up",
            Direction::Down => "down",
            Direction::Any => "any",
        }
    }

    fn accepts(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Up => before < 0.0 && after >= 0.0,
            Direction::Down => before > 0.0 && after <= 0.0,
            Direction::Any => (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventSpec {
    /// x passes through 0.
    CrossYAxis(Direction),
    /// y passes through 0.
    CrossXAxis(Direction),
    EnterRegion(RegionSpec),
    ExitRegion(RegionSpec),
}

impl EventSpec {
    pub fn tag(&self) -> String {
        match self {
            EventSpec::CrossYAxis(d) => format!("cross_y_axis_{}", d.name()),
            EventSpec::CrossXAxis(d) => format!("cross_x_axis_{}", d.name()),
            EventSpec::EnterRegion(r) => format!("enter_{}", r.kind),
            EventSpec::ExitRegion(r) => format!("exit_{}", r.kind),
        }
    }

    fn value(&self, s: [f64; 2]) -> f64 {
        match self {
            EventSpec::CrossYAxis(_) => s[0],
            EventSpec::CrossXAxis(_) => s[1],
            EventSpec::EnterRegion(r) | EventSpec::ExitRegion(r) => r.violation(s[0], s[1]),
        }
    }

    fn triggered(&self, before: f64, after: f64) -> bool {
        match self {
            EventSpec::CrossYAxis(d) | EventSpec::CrossXAxis(d) => d.accepts(before, after),
            EventSpec::EnterRegion(_) => before > 0.0 && after <= 0.0,
            EventSpec::ExitRegion(_) => before <= 0.0 && after > 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Escaped(f64),
    StepCollapse(f64),
    /// An observer asked to stop.
    Stopped(f64),
}

impl Outcome {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Outcome::Escaped(_) | Outcome::StepCollapse(_))
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            Outcome::Escaped(t) | Outcome::StepCollapse(t) => Some(*t),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<PhaseState>,
    pub events: Vec<(String, PhaseState)>,
    pub outcome: Outcome,
    pub registered: Vec<String>,
    pub final_state: PhaseState,
    pub steps: usize,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y\n");
        for p in &self.samples {
            writeln!(s, "{:.16e},{:.16e},{:.16e}", p.t, p.x, p.y).unwrap();
        }
        s
    }

    pub fn events_csv(&self) -> String {
        let mut s = String::from("tag,t,x,y\n");
        for (tag, p) in &self.events {
            writeln!(s, "{tag},{:.16e},{:.16e},{:.16e}", p.t, p.x, p.y).unwrap();
        }
        s
    }

    /// Parses the "t,x,y" export.
    pub fn samples_from_csv(text: &str) -> Result<Vec<PhaseState>> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let v: std::result::Result<Vec<f64>, _> = line.split(',').map(|c| c.trim().parse::<f64>()).collect();
            match v {
                Ok(v) if v.len() == 3 => out.push(PhaseState::new(v[1], v[2], v[0])),
                _ => return Err(Error::InvalidInput(format!("trajectory CSV line {}: \"{line}\"", i + 1))),
            }
        }
        Ok(out)
    }
}

/// Called after every accepted step; return `false` to stop.
pub trait Observer {
    fn on_step(&mut self, seg: &DenseSegment) -> bool;
}

impl<F: FnMut(&DenseSegment) -> bool> Observer for F {
    fn on_step(&mut self, seg: &DenseSegment) -> bool {
        self(seg)
    }
}

struct NoObserver;

impl Observer for NoObserver {
    fn on_step(&mut self, _seg: &DenseSegment) -> bool {
        true
    }
}

pub fn integrate<F: PlanarField + ?Sized>(
    field: &F,
    s0: PhaseState,
    set: &IntegratorSettings,
    events: &[EventSpec],
) -> Trajectory {
    integrate_observed(field, s0, set, events, &mut NoObserver)
}

/// Bisection on the dense output for a sign change of `g` over [a, b].
fn locate(seg: &DenseSegment, g: impl Fn([f64; 2]) -> f64, trig: impl Fn(f64, f64) -> bool) -> f64 {
    let (mut a, mut b) = (seg.t0, seg.t1());
    let ga = g(seg.eval(a));
    while b - a > 1e-12_f64.max(4.0 * f64::EPSILON * b.abs()) {
        let m = 0.5 * (a + b);
        if trig(ga, g(seg.eval(m))) {
            b = m;
        } else {
            a = m;
        }
    }
    b
}

fn norm(s: [f64; 2]) -> f64 {
    s[0].hypot(s[1])
}

pub fn integrate_observed<F: PlanarField + ?Sized, O: Observer + ?Sized>(
    field: &F,
    s0: PhaseState,
    set: &IntegratorSettings,
    events: &[EventSpec],
    observer: &mut O,
) -> Trajectory {
    let registered: Vec<String> = events.iter().map(|e| e.tag()).collect();
    let mut samples = Vec::new();
    if set.record {
        samples.push(s0);
    }
    let mut traj_events = Vec::new();
    let last = [s0.x, s0.y];
    let mut last_vals: Vec<f64> = events.iter().map(|e| e.value(last)).collect();
    let mut next_sample = set.sample_interval.map(|d| s0.t + d);
    let mut outcome = Outcome::Completed;

    if !s0.is_finite() || norm(last) > set.escape_radius {
        let outcome = if s0.is_finite() { Outcome::Escaped(s0.t) } else { Outcome::StepCollapse(s0.t) };
        return Trajectory { samples, events: traj_events, outcome, registered, final_state: s0, steps: 0 };
    }
    let mut stepper = Stepper::new(field, s0.t, last, set.control());
    while stepper.t < set.t_max {
        let seg = match stepper.step(set.t_max) {
            StepOutcome::Accepted(seg) => seg,
            StepOutcome::Collapse => {
                outcome = Outcome::StepCollapse(stepper.t);
                break;
            }
        };
        let end = seg.end();
        // escape: truncate the segment at the crossing of the escape radius
        let escaped = norm(end) > set.escape_radius;
        let seg_end_t = if escaped {
            locate(&seg, |s| norm(s) - set.escape_radius, |a, b| a <= 0.0 && b > 0.0)
        } else {
            seg.t1()
        };
        let vals: Vec<f64> = events.iter().map(|e| e.value(end)).collect();
        let mut found: Vec<(f64, usize)> = Vec::new();
        for (i, e) in events.iter().enumerate() {
            if e.triggered(last_vals[i], vals[i]) {
                let t = locate(&seg, |s| e.value(s), |a, b| e.triggered(a, b));
                if t <= seg_end_t {
                    found.push((t, i));
                }
            }
        }
        found.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, i) in found {
            let s = seg.eval(t);
            traj_events.push((registered[i].clone(), PhaseState::new(s[0], s[1], t)));
        }
        last_vals = vals;
        if set.record {
            match (set.sample_interval, next_sample.as_mut()) {
                (Some(dt), Some(ns)) => {
                    while *ns <= seg_end_t {
                        let s = seg.eval(*ns);
                        samples.push(PhaseState::new(s[0], s[1], *ns));
                        *ns += dt;
                    }
                }
                _ => {
                    if !escaped {
                        samples.push(PhaseState::new(end[0], end[1], seg.t1()));
                    }
                }
            }
            if escaped {
                let s = seg.eval(seg_end_t);
                if samples.last().is_none_or(|p| p.t < seg_end_t) {
                    samples.push(PhaseState::new(s[0], s[1], seg_end_t));
                }
            }
        }
        if escaped {
            outcome = Outcome::Escaped(seg_end_t);
            let s = seg.eval(seg_end_t);
            let fs = PhaseState::new(s[0], s[1], seg_end_t);
            return Trajectory { samples, events: traj_events, outcome, registered, final_state: fs, steps: stepper.accepted };
        }
        if !observer.on_step(&seg) {
            outcome = Outcome::Stopped(seg.t1());
            break;
        }
    }
    let final_state = PhaseState::new(stepper.y[0], stepper.y[1], stepper.t);
    if set.record && set.sample_interval.is_some() && samples.last().is_none_or(|p| p.t < final_state.t) {
        samples.push(final_state);
    }
    Trajectory { samples, events: traj_events, outcome, registered, final_state, steps: stepper.accepted }
}

/// Ordered states at which the given event fired.
pub fn crossing_sequence(traj: &Trajectory, axis: &EventSpec) -> Result<Vec<PhaseState>> {
    let tag = axis.tag();
    if !traj.registered.contains(&tag) {
        return Err(Error::MissingEvent(tag));
    }
    Ok(traj.events.iter().filter(|(t, _)| *t == tag).map(|(_, s)| *s).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::FrozenField;
    use crate::model::Nonlinearity;

    #[test]
    fn harmonic_crossings_are_quarter_periods_apart() {
        let field = |_t: f64, x: f64, y: f64| (y, -x);
        let set = IntegratorSettings { t_max: 20.0, ..Default::default() };
        let ev = EventSpec::CrossYAxis(Direction::Any);
        let tr = integrate(&field, PhaseState::new(1.0, 0.0, 0.0), &set, std::slice::from_ref(&ev));
        let c = crossing_sequence(&tr, &ev).unwrap();
        assert!(c.len() >= 6);
        assert!((c[0].t - std::f64::consts::FRAC_PI_2).abs() < 1e-8);
        for w in c.windows(2) {
            assert!((w[1].t - w[0].t - std::f64::consts::PI).abs() < 1e-8);
        }
        assert!(crossing_sequence(&tr, &EventSpec::CrossXAxis(Direction::Up)).is_err());
    }

    #[test]
    fn escape_is_detected() {
        let field = |_t: f64, x: f64, _y: f64| (x * x, 0.0);
        let set = IntegratorSettings { t_max: 5.0, ..Default::default() };
        let tr = integrate(&field, PhaseState::new(1.0, 0.0, 0.0), &set, &[]);
        let t = tr.outcome.blowup_time().expect("blow-up");
        assert!(t < 1.0 && t > 0.99);
    }

    #[test]
    fn time_reversal_conservative() {
        let fwd = FrozenField { g: Nonlinearity::odd(1).unwrap(), gamma: 0.0, level: 0.5 };
        let set = IntegratorSettings { t_max: 10.0, rel_tol: 1e-12, abs_tol: 1e-14, ..Default::default() };
        let s0 = PhaseState::new(0.3, -0.7, 0.0);
        let a = integrate(&fwd, s0, &set, &[]).final_state;
        let back = |t: f64, x: f64, y: f64| {
            let (u, v) = fwd.eval(t, x, y);
            (-u, -v)
        };
        let b = integrate(&back, PhaseState::new(a.x, a.y, 0.0), &set, &[]).final_state;
        assert!((b.x - s0.x).abs() < 1e-7 && (b.y - s0.y).abs() < 1e-7);
    }

    #[test]
    fn csv_round_trip() {
        let field = |_t: f64, x: f64, y: f64| (y, -x);
        let set = IntegratorSettings { t_max: 1.0, sample_interval: Some(0.25), ..Default::default() };
        let tr = integrate(&field, PhaseState::new(1.0, 0.0, 0.0), &set, &[]);
        assert_eq!(tr.samples.len(), 5);
        let back = Trajectory::samples_from_csv(&tr.to_csv()).unwrap();
        assert_eq!(back, tr.samples);
    }
}
