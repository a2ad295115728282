use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice point in Z^d.
pub type Nu = Vec<i32>;

pub fn l1_norm(nu: &[i32]) -> u32 {
    nu.iter().map(|v| v.unsigned_abs()).sum()
}

pub fn neg(nu: &[i32]) -> Nu {
    nu.iter().map(|v| -v).collect()
}

pub fn dot(omega: &[f64], nu: &[i32]) -> f64 {
    omega.iter().zip(nu).map(|(w, n)| w * *n as f64).sum()
}

/// Frequency vector omega in R^d together with its Diophantine constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyVector {
    pub omega: Vec<f64>,
    pub c0_dioph: f64,
    pub tau: f64,
}

impl FrequencyVector {
    pub fn new(omega: Vec<f64>, c0_dioph: f64, tau: f64) -> Result<Self> {
        let fv = FrequencyVector { omega, c0_dioph, tau };
        fv.validate()?;
        Ok(fv)
    }

    /// Single frequency with the trivially satisfied constants C0 = |omega|, tau = 0.
    pub fn periodic(omega: f64) -> Result<Self> {
        Self::new(vec![omega], omega.abs(), 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.omega.len();
        if d == 0 {
            return Err(Error::InvalidInput("frequency vector must have d >= 1".into()));
        }
        if self.omega.iter().any(|w| !w.is_finite()) || self.omega.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidInput("frequency vector must be finite and nonzero".into()));
        }
        if !(self.c0_dioph > 0.0) || !self.tau.is_finite() || self.tau < 0.0 {
            return Err(Error::InvalidInput("Diophantine constants need C0 > 0, tau >= 0".into()));
        }
        if d > 1 && self.tau <= (d - 1) as f64 {
            return Err(Error::InvalidInput(format!("tau = {} must exceed d - 1 = {}", self.tau, d - 1)));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.omega.len()
    }

    pub fn l1(&self) -> f64 {
        self.omega.iter().map(|w| w.abs()).sum()
    }
}

/// min over 0 < |nu|_1 <= n of |omega . nu| |nu|_1^tau / C0. A value >= 1 means the
/// Diophantine lower bound holds on the truncated lattice.
pub fn diophantine_margin(freq: &FrequencyVector, n: u32) -> f64 {
    let mut best = f64::INFINITY;
    for_each_half_lattice(freq.dim(), n, &mut |nu| {
        let k = l1_norm(nu) as f64;
        let m = dot(&freq.omega, nu).abs() * k.powf(freq.tau) / freq.c0_dioph;
        if m < best {
            best = m;
        }
    });
    best
}

/// Visits one representative of every pair {nu, -nu} with 0 < |nu|_1 <= n.
pub(crate) fn for_each_half_lattice(d: usize, n: u32, f: &mut impl FnMut(&[i32])) {
    let mut nu = vec![0i32; d];
    fn rec(k: usize, budget: i32, nu: &mut Vec<i32>, f: &mut impl FnMut(&[i32])) {
        if k == nu.len() {
            if let Some(first) = nu.iter().find(|v| **v != 0) {
                if *first > 0 {
                    f(nu);
                }
            }
            return;
        }
        for v in -budget..=budget {
            nu[k] = v;
            rec(k + 1, budget - v.abs(), nu, f);
        }
        nu[k] = 0;
    }
    rec(0, n as i32, &mut nu, f);
}

/// Truncated Fourier spectrum of the quasi-periodic drive f(psi) = sum f_nu e^{i nu.psi}.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingSpectrum {
    dim: usize,
    coeffs: BTreeMap<Nu, Complex64>,
    pub envelope_f: f64,
    pub envelope_xi: f64,
    /// When set, the stored modes are a truncation of a longer series whose
    /// remaining modes are only known through the envelope.
    pub truncated: bool,
}

impl ForcingSpectrum {
    /// Builds a spectrum, filling in conjugate partners that were omitted.
    pub fn new(
        dim: usize,
        entries: impl IntoIterator<Item = (Nu, Complex64)>,
        envelope_f: f64,
        envelope_xi: f64,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for (nu, c) in entries {
            if nu.len() != dim {
                return Err(Error::InvalidInput(format!("lattice point {nu:?} has wrong dimension (d = {dim})")));
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient at {nu:?}")));
            }
            if coeffs.insert(nu.clone(), c).is_some() {
                return Err(Error::InvalidInput(format!("duplicate coefficient for {nu:?}")));
            }
        }
        let keys: Vec<Nu> = coeffs.keys().cloned().collect();
        for nu in keys {
            let m = neg(&nu);
            if !coeffs.contains_key(&m) {
                let c = coeffs[&nu].conj();
                coeffs.insert(m, c);
            }
        }
        let s = ForcingSpectrum { dim, coeffs, envelope_f, envelope_xi, truncated: false };
        s.validate()?;
        Ok(s)
    }

    /// f(t) = f0 + a cos(omega t) + b sin(omega t) on a single frequency.
    pub fn single_harmonic(f0: f64, a: f64, b: f64) -> Result<Self> {
        let c1 = Complex64::new(a / 2.0, -b / 2.0);
        let amp = c1.norm().max(f0.abs());
        Self::new(1, [(vec![0], Complex64::new(f0, 0.0)), (vec![1], c1)], amp.max(1e-300) * std::f64::consts::E, 1.0)
    }

    pub fn constant(f0: f64) -> Result<Self> {
        Self::new(1, [(vec![0], Complex64::new(f0, 0.0))], f0.abs().max(1e-300), 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidInput("forcing dimension must be >= 1".into()));
        }
        if !(self.envelope_f > 0.0) || !(self.envelope_xi > 0.0) {
            return Err(Error::InvalidInput("envelope F and xi must be positive".into()));
        }
        let f0 = self.f0_complex();
        if f0.im.abs() > 1e-14 * f0.re.abs().max(1.0) {
            return Err(Error::InvalidInput("f_0 must be real".into()));
        }
        if f0.re == 0.0 {
            return Err(Error::InvalidInput("f_0 must be nonzero".into()));
        }
        for (nu, c) in &self.coeffs {
            let partner = self.coeffs.get(&neg(nu)).copied().unwrap_or_default();
            if (partner - c.conj()).norm() > 1e-14 * c.norm().max(1.0) {
                return Err(Error::InvalidInput(format!("reality violated: f_-nu != conj(f_nu) at {nu:?}")));
            }
            let bound = self.envelope_f * (-self.envelope_xi * l1_norm(nu) as f64).exp();
            if c.norm() > bound * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "|f_nu| = {:.4e} exceeds envelope {:.4e} at {nu:?}",
                    c.norm(),
                    bound
                )));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &BTreeMap<Nu, Complex64> {
        &self.coeffs
    }

    fn f0_complex(&self) -> Complex64 {
        self.coeffs.get(&vec![0; self.dim]).copied().unwrap_or_default()
    }

    pub fn f0(&self) -> f64 {
        self.f0_complex().re
    }

    pub fn get(&self, nu: &[i32]) -> Complex64 {
        self.coeffs.get(nu).copied().unwrap_or_default()
    }

    /// Largest |nu|_1 carrying a stored coefficient.
    pub fn truncation(&self) -> u32 {
        self.coeffs.keys().map(|nu| l1_norm(nu)).max().unwrap_or(0)
    }

    pub fn abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Value on the torus f(psi).
    pub fn eval_angle(&self, psi: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(nu, c)| c * Complex64::from_polar(1.0, dot(psi, nu)))
            .sum()
    }

    /// Geometric bound on the modes beyond the stored truncation; zero unless
    /// the spectrum is flagged as truncated.
    pub fn tail_bound(&self) -> f64 {
        if !self.truncated {
            return 0.0;
        }
        let n0 = self.truncation() + 1;
        // count lattice points on each shell, capped generously
        let mut total = 0.0;
        for k in n0..n0 + 2000 {
            let term = self.envelope_f * (-self.envelope_xi * k as f64).exp() * shell_size(self.dim, k) as f64;
            total += term;
            if term < 1e-18 * total.max(1e-300) {
                break;
            }
        }
        total
    }
}

/// Number of lattice points with |nu|_1 = k in Z^d.
pub fn shell_size(d: usize, k: u32) -> u64 {
    if k == 0 {
        return 1;
    }
    // sum_j 2^j C(d, j) C(k-1, j-1)
    let mut s = 0u64;
    for j in 1..=(d as u64).min(k as u64) {
        s += (1u64 << j) * binom(d as u64, j) * binom(k as u64 - 1, j - 1);
    }
    s
}

pub(crate) fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r = 1u64;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// sum_nu f_nu e^{i nu.omega t}; the imaginary residue is checked and discarded.
pub fn forcing_eval(forcing: &ForcingSpectrum, freq: &FrequencyVector, t: f64) -> f64 {
    let psi: Vec<f64> = freq.omega.iter().map(|w| w * t).collect();
    let z = forcing.eval_angle(&psi);
    debug_assert!(z.im.abs() <= 1e-12 * forcing.abs_sum().max(1.0), "imaginary residue {}", z.im);
    z.re
}

/// Lower and upper bounds of t -> f(omega t), with the 1/(2p)-th powers used
/// by the even-monomial constructions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForcingBounds {
    pub f_low: f64,
    pub f_up: f64,
    /// f_low^(1/(2p))
    pub f_pow: f64,
    /// f_up^(1/(2p))
    #[serde(rename = "F_pow")]
    pub big_f_pow: f64,
    pub p: u32,
}

const BOUND_SAMPLES: usize = 1 << 16;

impl ForcingBounds {
    fn with_powers(f_low: f64, f_up: f64, p: u32) -> Self {
        let e = 1.0 / (2.0 * p.max(1) as f64);
        ForcingBounds { f_low, f_up, f_pow: f_low.max(0.0).powf(e), big_f_pow: f_up.max(0.0).powf(e), p }
    }

    /// Certified bounds: the sampled extremes on a torus grid of ~2^16 points,
    /// widened by the grid Lipschitz slack, intersected with the crude bound
    /// f0 +- sum|f_nu|, then widened by the truncation tail.
    pub fn compute(forcing: &ForcingSpectrum, p: u32) -> Self {
        let (lo, hi) = sampled_extremes(forcing);
        let d = forcing.dim();
        let m = grid_per_dim(d);
        let h = 2.0 * std::f64::consts::PI / m as f64;
        let lip: f64 = forcing.coeffs().iter().map(|(nu, c)| c.norm() * l1_norm(nu) as f64).sum();
        let slack = 0.5 * h * lip;
        let crude: f64 = forcing
            .coeffs()
            .iter()
            .filter(|(nu, _)| l1_norm(nu) > 0)
            .map(|(_, c)| c.norm())
            .sum();
        let f0 = forcing.f0();
        let tail = forcing.tail_bound();
        let f_low = (lo - slack).max(f0 - crude) - tail;
        let f_up = (hi + slack).min(f0 + crude) + tail;
        Self::with_powers(f_low, f_up, p)
    }

    /// Caller-supplied bounds, checked against the dense torus sample.
    pub fn exact(forcing: &ForcingSpectrum, p: u32, f_low: f64, f_up: f64) -> Result<Self> {
        if !(f_low <= f_up) {
            return Err(Error::InvalidInput("need f_low <= f_up".into()));
        }
        let (lo, hi) = sampled_extremes(forcing);
        let tol = 1e-12 * forcing.abs_sum().max(1.0);
        if lo < f_low - tol || hi > f_up + tol {
            return Err(Error::InvalidInput(format!(
                "bounds [{f_low}, {f_up}] violated by sampled range [{lo}, {hi}]"
            )));
        }
        Ok(Self::with_powers(f_low, f_up, p))
    }

    pub fn require_positive(&self) -> Result<()> {
        if self.f_low > 0.0 {
            Ok(())
        } else {
            Err(Error::Precondition(format!("forcing lower bound f_low = {} must be > 0", self.f_low)))
        }
    }

    /// mu in [0, 1] with f = mu f_up + (1 - mu) f_low.
    pub fn mu(&self, f: f64) -> f64 {
        if self.f_up == self.f_low {
            0.0
        } else {
            (f - self.f_low) / (self.f_up - self.f_low)
        }
    }
}

fn grid_per_dim(d: usize) -> usize {
    ((BOUND_SAMPLES as f64).powf(1.0 / d as f64).ceil() as usize).max(8)
}

fn sampled_extremes(forcing: &ForcingSpectrum) -> (f64, f64) {
    let d = forcing.dim();
    let m = grid_per_dim(d);
    let total = m.pow(d as u32);
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let mut psi = vec![0.0; d];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for idx in 0..total {
        let mut r = idx;
        for a in psi.iter_mut() {
            *a = (r % m) as f64 * h;
            r /= m;
        }
        let v = forcing.eval_angle(&psi).re;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}
