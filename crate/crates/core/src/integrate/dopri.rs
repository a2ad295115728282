//! Dormand–Prince 5(4) stepper with the standard fourth-order continuous extension.

use crate::model::PlanarField;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

pub type State = [f64; 2];

/// Continuous extension over one accepted step [t0, t0 + h].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    rcont: [State; 5],
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> State {
        self.rcont[0]
    }

    pub fn end(&self) -> State {
        [self.rcont[0][0] + self.rcont[1][0], self.rcont[0][1] + self.rcont[1][1]]
    }

    pub fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut out = [0.0; 2];
        for i in 0..2 {
            out[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepOutcome {
    Accepted(DenseSegment),
    /// The controller asked for a step below `min_step`.
    Collapse,
}

pub struct Stepper<'a, F: PlanarField + ?Sized> {
    field: &'a F,
    ctl: StepControl,
    pub t: f64,
    pub y: State,
    h: f64,
    k1: State,
    pub accepted: usize,
    pub rejected: usize,
}

fn add(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut o = *y;
    for (c, k) in terms {
        o[0] += h * c * k[0];
        o[1] += h * c * k[1];
    }
    o
}

impl<'a, F: PlanarField + ?Sized> Stepper<'a, F> {
    pub fn new(field: &'a F, t0: f64, y0: State, ctl: StepControl) -> Self {
        let k1 = Self::f(field, t0, &y0);
        let mut s = Stepper { field, ctl, t: t0, y: y0, h: 0.0, k1, accepted: 0, rejected: 0 };
        s.h = s.initial_step();
        s
    }

    fn f(field: &F, t: f64, y: &State) -> State {
        let (a, b) = field.eval(t, y[0], y[1]);
        [a, b]
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.ctl.abs_tol + self.ctl.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step(&self) -> f64 {
        // Hairer–Wanner heuristic
        let sc0 = [self.scale(self.y[0], 0.0), self.scale(self.y[1], 0.0)];
        let d0 = ((self.y[0] / sc0[0]).powi(2) + (self.y[1] / sc0[1]).powi(2)).sqrt() / 2f64.sqrt();
        let d1 = ((self.k1[0] / sc0[0]).powi(2) + (self.k1[1] / sc0[1]).powi(2)).sqrt() / 2f64.sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.ctl.max_step);
        let y1 = add(&self.y, h0, &[(1.0, &self.k1)]);
        let k2 = Self::f(self.field, self.t + h0, &y1);
        let d2 = (((k2[0] - self.k1[0]) / sc0[0]).powi(2) + ((k2[1] - self.k1[1]) / sc0[1]).powi(2)).sqrt()
            / 2f64.sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
        (100.0 * h0).min(h1).min(self.ctl.max_step).max(self.ctl.min_step * 10.0)
    }

    /// Attempts steps until one is accepted. `t_end` caps the step.
    pub fn step(&mut self, t_end: f64) -> StepOutcome {
        loop {
            let mut h = self.h.min(self.ctl.max_step);
            let mut last = false;
            if self.t + h >= t_end {
                h = t_end - self.t;
                last = true;
            }
            if h < self.ctl.min_step && !last {
                return StepOutcome::Collapse;
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let k2 = Self::f(self.field, t + C2 * h, &add(&y, h, &[(A21, &k1)]));
            let k3 = Self::f(self.field, t + C3 * h, &add(&y, h, &[(A31, &k1), (A32, &k2)]));
            let k4 = Self::f(self.field, t + C4 * h, &add(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = Self::f(self.field, t + C5 * h, &add(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = Self::f(
                self.field,
                t + h,
                &add(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y1 = add(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let t1 = if last { t_end } else { t + h };
            let k7 = Self::f(self.field, t1, &y1);

            let mut err = 0.0;
            for i in 0..2 {
                let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.scale(y[i], y1[i]);
                err += (e / sc).powi(2);
            }
            let err = (err / 2.0).sqrt();

            if !err.is_finite() || !y1[0].is_finite() || !y1[1].is_finite() {
                self.rejected += 1;
                self.h = 0.25 * h;
                if self.h < self.ctl.min_step {
                    return StepOutcome::Collapse;
                }
                continue;
            }
            if err <= 1.0 {
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let ydiff = [y1[0] - y[0], y1[1] - y[1]];
                let mut rcont = [[0.0; 2]; 5];
                for i in 0..2 {
                    let bspl = h * k1[i] - ydiff[i];
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff[i];
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff[i] - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                let seg = DenseSegment { t0: t, h: t1 - t, rcont };
                self.t = t1;
                self.y = y1;
                self.k1 = k7;
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                self.accepted += 1;
                return StepOutcome::Accepted(seg);
            }
            self.rejected += 1;
            self.h = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if self.h < self.ctl.min_step {
                return StepOutcome::Collapse;
            }
        }
    }
}
