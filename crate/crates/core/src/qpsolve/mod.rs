//! Quasi-periodic response x0(t) of the forced oscillator: harmonic balance
//! (Newton on truncated Fourier coefficients) and the perturbation series in
//! epsilon = 1/gamma.

mod balance;
mod series;
mod torus;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde_json::{json, Value};

pub use balance::{
    default_truncation, grid_size, harmonic_balance_solve, ode_residual, solve, uniqueness_probe, NewtonOptions,
};
pub use series::{perturbation_series, PerturbationSeries};
pub use torus::TorusGrid;

use crate::error::{Error, Result};
use crate::model::{dot, l1_norm, neg, Nu, PhaseState};

/// Lattice points |nu|_1 <= n in graded lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierLattice {
    pub dim: usize,
    pub n: u32,
    pub points: Vec<Nu>,
    /// Points whose first nonzero component is positive, same order.
    pub half: Vec<Nu>,
}

impl FourierLattice {
    pub fn new(dim: usize, n: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("lattice dimension must be >= 1".into()));
        }
        let mut points = Vec::new();
        let mut nu = vec![0i32; dim];
        fn rec(k: usize, budget: i32, nu: &mut Vec<i32>, out: &mut Vec<Nu>) {
            if k == nu.len() {
                out.push(nu.clone());
                return;
            }
            for v in -budget..=budget {
                nu[k] = v;
                rec(k + 1, budget - v.abs(), nu, out);
            }
            nu[k] = 0;
        }
        rec(0, n as i32, &mut nu, &mut points);
        points.sort_by(|a, b| l1_norm(a).cmp(&l1_norm(b)).then_with(|| a.cmp(b)));
        let half = points.iter().filter(|p| is_positive(p)).cloned().collect();
        Ok(FourierLattice { dim, n, points, half })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn is_positive(nu: &[i32]) -> bool {
    nu.iter().find(|v| **v != 0).is_some_and(|v| *v > 0)
}

/// Fourier coefficients of the computed quasi-periodic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierSolution {
    pub lattice: FourierLattice,
    pub omega: Vec<f64>,
    pub coeffs: BTreeMap<Nu, Complex64>,
    pub gamma: f64,
    pub residual_norm: f64,
    pub c0: f64,
    pub iterations: usize,
    terms: Vec<(f64, Complex64)>,
}

impl FourierSolution {
    /// Builds from the half-lattice coefficients plus the real mean; conjugates are filled in.
    pub fn from_half(
        lattice: FourierLattice,
        omega: Vec<f64>,
        mean: f64,
        half: &BTreeMap<Nu, Complex64>,
        gamma: f64,
        c0: f64,
    ) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(vec![0; lattice.dim], Complex64::new(mean, 0.0));
        let mut terms = Vec::with_capacity(lattice.half.len());
        for nu in &lattice.half {
            let c = half.get(nu).copied().unwrap_or_default();
            coeffs.insert(neg(nu), c.conj());
            coeffs.insert(nu.clone(), c);
            terms.push((dot(&omega, nu), c));
        }
        FourierSolution { lattice, omega, coeffs, gamma, residual_norm: f64::NAN, c0, iterations: 0, terms }
    }

    /// Constant solution x0 = c.
    pub fn constant(dim: usize, omega: Vec<f64>, c: f64, gamma: f64) -> Self {
        let lattice = FourierLattice::new(dim, 0).expect("dim >= 1");
        let mut s = Self::from_half(lattice, omega, c, &BTreeMap::new(), gamma, c);
        s.residual_norm = 0.0;
        s
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[&vec![0; self.lattice.dim]].re
    }

    pub fn get(&self, nu: &[i32]) -> Complex64 {
        self.coeffs.get(nu).copied().unwrap_or_default()
    }

    /// (x0, x0', x0'') at time t.
    pub fn eval_full(&self, t: f64) -> (f64, f64, f64) {
        let (mut x, mut v, mut a) = (self.mean(), 0.0, 0.0);
        for &(w, c) in &self.terms {
            let e = c * Complex64::from_polar(1.0, w * t);
            x += 2.0 * e.re;
            v += -2.0 * w * e.im;
            a += -2.0 * w * w * e.re;
        }
        (x, v, a)
    }

    /// Largest |x_nu| on the outermost shell |nu|_1 = n, summed.
    pub fn outer_shell_mass(&self) -> f64 {
        let n = self.lattice.n;
        if n == 0 {
            return 0.0;
        }
        self.coeffs.iter().filter(|(nu, _)| l1_norm(nu) == n).map(|(_, c)| c.norm()).sum()
    }

    /// Sup over the torus grid of |x - other|, both sampled at the given times.
    pub fn sup_distance(&self, other: &FourierSolution, times: &[f64]) -> f64 {
        times.iter().map(|&t| (eval_solution(self, t).0 - eval_solution(other, t).0).abs()).fold(0.0, f64::max)
    }

    /// "nu_1,...,nu_d,re,im" per lattice point.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let head: Vec<String> = (1..=self.lattice.dim).map(|k| format!("nu_{k}")).collect();
        writeln!(s, "{},re,im", head.join(",")).unwrap();
        for nu in &self.lattice.points {
            let c = self.get(nu);
            let idx: Vec<String> = nu.iter().map(|v| v.to_string()).collect();
            writeln!(s, "{},{:.16e},{:.16e}", idx.join(","), c.re, c.im).unwrap();
        }
        s
    }

    /// `{gamma, residual_norm, mean, c0}` plus bookkeeping.
    pub fn summary_json(&self) -> Value {
        json!({
            "gamma": self.gamma,
            "residual_norm": self.residual_norm,
            "mean": self.mean(),
            "c0": self.c0,
            "truncation": self.lattice.n,
            "modes": self.lattice.len(),
            "iterations": self.iterations,
            "omega": self.omega,
        })
    }
}

/// (x0(t), x0'(t)) by direct spectral summation. Reality is structural: only
/// the half lattice is summed and conjugate partners contribute 2 Re.
pub fn eval_solution(sol: &FourierSolution, t: f64) -> (f64, f64) {
    let (x, v, _) = sol.eval_full(t);
    (x, v)
}

/// Time-synchronized distance between s and (x0(s.t), x0'(s.t)).
pub fn orbit_distance(sol: &FourierSolution, s: &PhaseState) -> f64 {
    let (x, v) = eval_solution(sol, s.t);
    (s.x - x).hypot(s.y - v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_ordering() {
        let l = FourierLattice::new(2, 2).unwrap();
        assert_eq!(l.len(), 13);
        assert_eq!(l.points[0], vec![0, 0]);
        assert_eq!(l.half.len(), 6);
        assert!(l.points.windows(2).all(|w| l1_norm(&w[0]) <= l1_norm(&w[1])));
        assert_eq!(l.half[0], vec![0, 1]);
        assert_eq!(l.half[1], vec![1, 0]);
    }

    #[test]
    fn constant_solution_evaluates_flat() {
        let s = FourierSolution::constant(1, vec![1.0], 1.5, 10.0);
        assert_eq!(eval_solution(&s, 3.7), (1.5, 0.0));
        assert_eq!(orbit_distance(&s, &PhaseState::new(1.5, 0.0, 9.0)), 0.0);
    }
}
