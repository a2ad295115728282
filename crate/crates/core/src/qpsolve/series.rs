//! Perturbation series x0 = sum_k eps^k x^(k) of eps x'' + x' + eps g(x) = eps f.
//!
//! At order eps^k (k >= 1):  x^(k-1)'' + x^(k)' + [g]_(k-1) = f delta_(k,1),
//! where [g]_m is the eps^m coefficient of g(sum_j eps^j x^(j)). Nonzero modes
//! of x^(k) follow by dividing by i omega.nu; the mean of x^(k-1) is fixed by
//! the zero-mode balance, which is linear in it with slope g'(c0).

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::torus::TorusGrid;
use super::{balance::grid_size, FourierLattice, FourierSolution};
use crate::error::{Error, Result};
use crate::model::{diophantine_margin, dot, equilibrium_c0, neg, Nu, SystemConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSeries {
    pub order: usize,
    pub epsilon: f64,
    /// x^(0), ..., x^(K) as half-lattice coefficient maps plus means.
    pub terms: Vec<FourierSolution>,
}

impl PerturbationSeries {
    /// Sum of eps^k x^(k) for k <= order, as a Fourier solution.
    pub fn partial_sum(&self, order: usize) -> FourierSolution {
        let base = &self.terms[0];
        let mut half: BTreeMap<Nu, Complex64> = BTreeMap::new();
        let mut mean = 0.0;
        let mut scale = 1.0;
        for term in self.terms.iter().take(order + 1) {
            mean += scale * term.mean();
            for nu in &base.lattice.half {
                *half.entry(nu.clone()).or_default() += scale * term.get(nu);
            }
            scale *= self.epsilon;
        }
        FourierSolution::from_half(base.lattice.clone(), base.omega.clone(), mean, &half, base.gamma, base.c0)
    }
}

/// Grid values of a set of mode arrays (mean plus half lattice).
struct Modes<'a> {
    grid: &'a TorusGrid,
    lattice: &'a FourierLattice,
}

impl Modes<'_> {
    fn values(&self, mean: f64, half: &[Complex64]) -> Vec<f64> {
        let mut m = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        m[self.grid.index(&vec![0; self.lattice.dim])] = Complex64::new(mean, 0.0);
        for (nu, c) in self.lattice.half.iter().zip(half) {
            m[self.grid.index(nu)] = *c;
            m[self.grid.index(&neg(nu))] = c.conj();
        }
        self.grid.synthesize(&mut m);
        m.into_iter().map(|v| v.re).collect()
    }

    fn spectrum(&self, v: &[f64]) -> (f64, Vec<Complex64>) {
        let mut m: Vec<Complex64> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
        self.grid.analyze(&mut m);
        let mean = m[self.grid.index(&vec![0; self.lattice.dim])].re;
        (mean, self.lattice.half.iter().map(|nu| m[self.grid.index(nu)]).collect())
    }
}

/// eps^m coefficient of g(sum_j eps^j u_j) pointwise, via truncated series products.
fn g_coefficient(coeffs: &[f64], u: &[Vec<f64>], m: usize) -> Vec<f64> {
    let npts = u[0].len();
    let mut out = vec![0.0; npts];
    let mut s = vec![0.0; m + 1];
    let mut pow = vec![0.0; m + 1];
    let mut acc = vec![0.0; m + 1];
    for p in 0..npts {
        for (j, sj) in s.iter_mut().enumerate() {
            *sj = if j < u.len() { u[j][p] } else { 0.0 };
        }
        // Horner in series arithmetic: acc = (...(c_n s + c_{n-1}) s + ...) + c_0
        acc.iter_mut().for_each(|a| *a = 0.0);
        for c in coeffs.iter().rev() {
            for k in (0..=m).rev() {
                let mut v = 0.0;
                for j in 0..=k {
                    v += acc[j] * s[k - j];
                }
                pow[k] = v;
            }
            acc.copy_from_slice(&pow);
            acc[0] += c;
        }
        out[p] = acc[m];
    }
    out
}

/// Terms x^(0..=k) of the series; every mean is fixed by solvability.
pub fn perturbation_series(cfg: &SystemConfig, lattice: &FourierLattice, k: usize) -> Result<PerturbationSeries> {
    if k < 1 {
        return Err(Error::InvalidInput("series order K must be >= 1".into()));
    }
    if lattice.dim != cfg.freq.dim() {
        return Err(Error::InvalidInput("lattice dimension differs from the frequency vector".into()));
    }
    let omega = &cfg.freq.omega;
    if lattice.dim > 1 {
        let margin = diophantine_margin(&cfg.freq, lattice.n.max(1));
        if margin < 1.0 {
            return Err(Error::NotDiophantine { margin });
        }
    }
    let divisors: Vec<f64> = lattice.half.iter().map(|nu| dot(omega, nu)).collect();
    for (nu, w) in lattice.half.iter().zip(&divisors) {
        if w.abs() < 1e-12 {
            return Err(Error::SmallDivisorOverflow { nu: nu.clone(), divisor: w.abs() });
        }
    }
    let f0 = cfg.forcing.f0();
    let c0 = equilibrium_c0(&cfg.g, f0)?;
    let g1 = cfg.g.derivative(c0);
    let coeffs = cfg.g.power_coeffs();
    // degree of the products formed on the grid grows with the order; the lattice caps it
    let grid = TorusGrid::new(lattice.dim, grid_size(lattice.n, cfg.g.degree()));
    let modes = Modes { grid: &grid, lattice };
    let nh = lattice.half.len();
    let fh: Vec<Complex64> = lattice.half.iter().map(|nu| cfg.forcing.get(nu)).collect();

    let mut means = vec![c0];
    let mut halves: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); nh]];
    let mut values: Vec<Vec<f64>> = vec![modes.values(c0, &halves[0])];

    for order in 1..=k + 1 {
        let m = order - 1;
        // [g]_m with the mean of x^(m) provisionally zero
        if m >= 1 {
            values[m] = modes.values(0.0, &halves[m]);
            let gm = g_coefficient(&coeffs, &values, m);
            let (n0, _) = modes.spectrum(&gm);
            means[m] = -n0 / g1;
            values[m] = modes.values(means[m], &halves[m]);
        }
        if order == k + 1 {
            break;
        }
        let gm = g_coefficient(&coeffs, &values, m);
        let (_, gh) = modes.spectrum(&gm);
        let mut next = vec![Complex64::new(0.0, 0.0); nh];
        for i in 0..nh {
            let w = divisors[i];
            let forcing = if order == 1 { fh[i] } else { Complex64::new(0.0, 0.0) };
            let rhs = forcing + w * w * halves[m][i] - gh[i];
            next[i] = rhs / Complex64::new(0.0, w);
        }
        means.push(0.0);
        values.push(modes.values(0.0, &next));
        halves.push(next);
    }

    let terms = (0..=k)
        .map(|j| {
            let half: BTreeMap<Nu, Complex64> = lattice.half.iter().cloned().zip(halves[j].iter().copied()).collect();
            let mut s = FourierSolution::from_half(lattice.clone(), omega.clone(), means[j], &half, cfg.gamma, c0);
            s.residual_norm = 0.0;
            s
        })
        .collect();
    Ok(PerturbationSeries { order: k, epsilon: cfg.epsilon, terms })
}
