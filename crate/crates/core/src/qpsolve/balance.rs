//! Harmonic balance: Newton iteration on the real and imaginary parts of the
//! half-lattice coefficients, with (g o x)_nu and the spectrum of g'(x) taken
//! from a de-aliased torus grid.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::torus::TorusGrid;
use super::{FourierLattice, FourierSolution};
use crate::error::{Error, Result};
use crate::model::{dot, equilibrium_c0, neg, Nu, SystemConfig};
use crate::report::halton;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Target sup-norm residual; `None` means 1e-10 max(1, |f0|).
    pub tol: Option<f64>,
    pub max_doublings: u32,
    pub shell_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { max_iter: 60, tol: None, max_doublings: 3, shell_tol: 1e-12 }
    }
}

/// max(2 N_f, 16) for d = 1, N_f + 8 otherwise.
pub fn default_truncation(cfg: &SystemConfig) -> u32 {
    let nf = cfg.forcing.truncation();
    if cfg.freq.dim() == 1 {
        (2 * nf).max(16)
    } else {
        nf + 8
    }
}

/// Grid points per axis: enough that products up to degree+1 do not alias onto |nu|_1 <= 2N.
pub fn grid_size(n: u32, degree: usize) -> usize {
    let n = n as usize;
    (4 * (n + 1)).max((degree + 1) * n + 1)
}

struct Balance<'a> {
    cfg: &'a SystemConfig,
    lattice: &'a FourierLattice,
    grid: TorusGrid,
    /// Linear symbol L_nu = -(omega.nu)^2 + i gamma omega.nu on the half lattice.
    l: Vec<Complex64>,
    f: Vec<Complex64>,
    f0: f64,
    idx0: usize,
    idx: Vec<usize>,
    idx_neg: Vec<usize>,
}

impl<'a> Balance<'a> {
    fn new(cfg: &'a SystemConfig, lattice: &'a FourierLattice) -> Self {
        let grid = TorusGrid::new(lattice.dim, grid_size(lattice.n, cfg.g.degree()));
        let omega = &cfg.freq.omega;
        let l = lattice
            .half
            .iter()
            .map(|nu| {
                let w = dot(omega, nu);
                Complex64::new(-w * w, cfg.gamma * w)
            })
            .collect();
        let f = lattice.half.iter().map(|nu| cfg.forcing.get(nu)).collect();
        let idx0 = grid.index(&vec![0; lattice.dim]);
        let idx = lattice.half.iter().map(|nu| grid.index(nu)).collect();
        let idx_neg = lattice.half.iter().map(|nu| grid.index(&neg(nu))).collect();
        Balance { cfg, lattice, grid, l, f, f0: cfg.forcing.f0(), idx0, idx, idx_neg }
    }

    fn unknowns(&self) -> usize {
        1 + 2 * self.lattice.half.len()
    }

    /// Spectra of g(x) and g'(x) on the grid.
    fn spectra(&self, u: &DVector<f64>) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut modes = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        modes[self.idx0] = Complex64::new(u[0], 0.0);
        for i in 0..self.lattice.half.len() {
            let c = Complex64::new(u[1 + 2 * i], u[2 + 2 * i]);
            modes[self.idx[i]] = c;
            modes[self.idx_neg[i]] = c.conj();
        }
        self.grid.synthesize(&mut modes);
        debug_assert!(modes.iter().all(|v| v.im.abs() <= 1e-9 * (1.0 + v.re.abs())), "grid values lost reality");
        let mut gv: Vec<Complex64> = modes.iter().map(|v| Complex64::new(self.cfg.g.value(v.re), 0.0)).collect();
        let mut dv: Vec<Complex64> = modes.iter().map(|v| Complex64::new(self.cfg.g.derivative(v.re), 0.0)).collect();
        self.grid.analyze(&mut gv);
        self.grid.analyze(&mut dv);
        (gv, dv)
    }

    fn residual(&self, u: &DVector<f64>, gspec: &[Complex64]) -> DVector<f64> {
        let mut r = DVector::zeros(self.unknowns());
        r[0] = gspec[self.idx0].re - self.f0;
        for i in 0..self.lattice.half.len() {
            let x = Complex64::new(u[1 + 2 * i], u[2 + 2 * i]);
            let ri = self.l[i] * x + gspec[self.idx[i]] - self.f[i];
            r[1 + 2 * i] = ri.re;
            r[2 + 2 * i] = ri.im;
        }
        r
    }

    fn sup_norm(r: &DVector<f64>) -> f64 {
        let mut m = r[0].abs();
        for i in 0..(r.len() - 1) / 2 {
            m = m.max(r[1 + 2 * i].hypot(r[2 + 2 * i]));
        }
        m
    }

    fn jacobian(&self, dspec: &[Complex64]) -> DMatrix<f64> {
        let n = self.unknowns();
        let h = &self.lattice.half;
        let dim = self.lattice.dim;
        let gk = |k: &[i32]| dspec[self.grid.index(k)];
        let sub = |a: &[i32], b: &[i32]| -> Nu { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let add = |a: &[i32], b: &[i32]| -> Nu { a.iter().zip(b).map(|(x, y)| x + y).collect() };
        let zero = vec![0i32; dim];
        let mut j = DMatrix::zeros(n, n);
        // column of the mean
        j[(0, 0)] = gk(&zero).re;
        for (i, nu) in h.iter().enumerate() {
            let c = gk(nu);
            j[(1 + 2 * i, 0)] = c.re;
            j[(2 + 2 * i, 0)] = c.im;
        }
        for (k, mu) in h.iter().enumerate() {
            let (ca, cb) = (1 + 2 * k, 2 + 2 * k);
            // row of the mean: G_{-mu} + G_{mu}, i (G_{-mu} - G_{mu})
            let (gm, gp) = (gk(&neg(mu)), gk(mu));
            j[(0, ca)] = (gm + gp).re;
            j[(0, cb)] = (Complex64::i() * (gm - gp)).re;
            for (i, nu) in h.iter().enumerate() {
                let (gm, gp) = (gk(&sub(nu, mu)), gk(&add(nu, mu)));
                let mut a = gm + gp;
                let mut b = Complex64::i() * (gm - gp);
                if i == k {
                    a += self.l[i];
                    b += Complex64::i() * self.l[i];
                }
                j[(1 + 2 * i, ca)] = a.re;
                j[(2 + 2 * i, ca)] = a.im;
                j[(1 + 2 * i, cb)] = b.re;
                j[(2 + 2 * i, cb)] = b.im;
            }
        }
        j
    }

    fn initial(&self, c0: f64, guess: Option<&FourierSolution>) -> DVector<f64> {
        let mut u = DVector::zeros(self.unknowns());
        match guess {
            Some(g) => {
                u[0] = g.mean();
                for (i, nu) in self.lattice.half.iter().enumerate() {
                    let c = g.get(nu);
                    u[1 + 2 * i] = c.re;
                    u[2 + 2 * i] = c.im;
                }
            }
            None => u[0] = c0,
        }
        u
    }

    fn to_solution(&self, u: &DVector<f64>, c0: f64) -> FourierSolution {
        let mut half = BTreeMap::new();
        for (i, nu) in self.lattice.half.iter().enumerate() {
            half.insert(nu.clone(), Complex64::new(u[1 + 2 * i], u[2 + 2 * i]));
        }
        FourierSolution::from_half(self.lattice.clone(), self.cfg.freq.omega.clone(), u[0], &half, self.cfg.gamma, c0)
    }
}

fn newton(cfg: &SystemConfig, lattice: &FourierLattice, guess: Option<&FourierSolution>, opts: &NewtonOptions) -> Result<FourierSolution> {
    if lattice.dim != cfg.freq.dim() {
        return Err(Error::InvalidInput("lattice dimension differs from the frequency vector".into()));
    }
    if lattice.n < cfg.forcing.truncation() {
        return Err(Error::Precondition(format!(
            "lattice truncation {} is below the forcing truncation {}",
            lattice.n,
            cfg.forcing.truncation()
        )));
    }
    let c0 = equilibrium_c0(&cfg.g, cfg.forcing.f0())?;
    let tol = opts.tol.unwrap_or(1e-10 * cfg.forcing.f0().abs().max(1.0));
    let b = Balance::new(cfg, lattice);
    let mut u = b.initial(c0, guess);
    let (mut gspec, mut dspec) = b.spectra(&u);
    let mut r = b.residual(&u, &gspec);
    let mut res = Balance::sup_norm(&r);
    let mut history = vec![res];
    let mut iter = 0;
    while res > tol {
        if iter >= opts.max_iter || !res.is_finite() {
            return Err(Error::NewtonDiverged { residual: res, iterations: iter });
        }
        let jac = b.jacobian(&dspec);
        let delta = jac.lu().solve(&(-&r)).ok_or(Error::NewtonDiverged { residual: res, iterations: iter })?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=8 {
            let trial = &u + lambda * &delta;
            let (gs, ds) = b.spectra(&trial);
            let rt = b.residual(&trial, &gs);
            let rn = Balance::sup_norm(&rt);
            if rn.is_finite() && rn < res {
                u = trial;
                gspec = gs;
                dspec = ds;
                r = rt;
                res = rn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        iter += 1;
        if !accepted {
            return Err(Error::NewtonDiverged { residual: res, iterations: iter });
        }
        history.push(res);
        if history.len() > 5 && res > tol && res > history[history.len() - 6] / 10.0 {
            return Err(Error::NewtonDiverged { residual: res, iterations: iter });
        }
    }
    let _ = &gspec;
    let mut sol = b.to_solution(&u, c0);
    sol.residual_norm = res;
    sol.iterations = iter;
    Ok(sol)
}

/// Newton solve on a fixed lattice. Default initial guess: mean c0, other modes 0.
pub fn harmonic_balance_solve(
    cfg: &SystemConfig,
    lattice: &FourierLattice,
    guess: Option<&FourierSolution>,
) -> Result<FourierSolution> {
    newton(cfg, lattice, guess, &NewtonOptions::default())
}

/// Solve on the default lattice, doubling the truncation while the outer shell
/// still carries mass above `shell_tol`.
pub fn solve(cfg: &SystemConfig, opts: &NewtonOptions) -> Result<FourierSolution> {
    let mut n = default_truncation(cfg);
    let mut lattice = FourierLattice::new(cfg.freq.dim(), n)?;
    let mut sol = newton(cfg, &lattice, None, opts)?;
    let mut doublings = 0;
    while sol.outer_shell_mass() >= opts.shell_tol && doublings < opts.max_doublings {
        n *= 2;
        lattice = FourierLattice::new(cfg.freq.dim(), n)?;
        sol = newton(cfg, &lattice, Some(&sol), opts)?;
        doublings += 1;
    }
    Ok(sol)
}

/// x0'' + gamma x0' + g(x0) - f(omega t) along the spectral solution.
pub fn ode_residual(cfg: &SystemConfig, sol: &FourierSolution, t: f64) -> f64 {
    let (x, v, a) = sol.eval_full(t);
    a + cfg.gamma * v + cfg.g.value(x) - cfg.forcing_at(t)
}

/// Restarts Newton from `starts` perturbed copies of `sol` (every real unknown
/// shifted by up to `size`); returns, for each start, the sup distance to `sol`
/// on a time sample, or the error.
pub fn uniqueness_probe(cfg: &SystemConfig, sol: &FourierSolution, starts: usize, size: f64) -> Vec<Result<f64>> {
    let times: Vec<f64> = (0..256).map(|k| 40.0 * halton(k as u64 + 1, 2)).collect();
    (0..starts)
        .map(|s| {
            let mut half = BTreeMap::new();
            let mut k = 1 + 97 * s as u64;
            let mut next = || {
                k += 1;
                size * (2.0 * halton(k, 3) - 1.0)
            };
            let mean = sol.mean() + next();
            for nu in &sol.lattice.half {
                let c = sol.get(nu);
                half.insert(nu.clone(), c + Complex64::new(next(), next()));
            }
            let guess =
                FourierSolution::from_half(sol.lattice.clone(), sol.omega.clone(), mean, &half, sol.gamma, sol.c0);
            let other = harmonic_balance_solve(cfg, &sol.lattice, Some(&guess))?;
            Ok(sol.sup_distance(&other, &times))
        })
        .collect()
}
