//! Uniform grid on the d-torus with per-axis FFTs.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct TorusGrid {
    pub dim: usize,
    pub m: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl TorusGrid {
    pub fn new(dim: usize, m: usize) -> Self {
        let mut planner = FftPlanner::new();
        TorusGrid { dim, m, fwd: planner.plan_fft_forward(m), inv: planner.plan_fft_inverse(m) }
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of the grid cell holding mode nu (components taken mod m).
    pub fn index(&self, nu: &[i32]) -> usize {
        let m = self.m as i64;
        nu.iter().fold(0usize, |acc, &v| acc * self.m + (v as i64).rem_euclid(m) as usize)
    }

    fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let m = self.m;
        let plan = if inverse { &self.inv } else { &self.fwd };
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = m.pow((self.dim - 1 - axis) as u32);
            let block = stride * m;
            for base in (0..data.len()).step_by(block) {
                for off in 0..stride {
                    for (k, v) in line.iter_mut().enumerate() {
                        *v = data[base + off + k * stride];
                    }
                    plan.process_with_scratch(&mut line, &mut scratch);
                    for (k, v) in line.iter().enumerate() {
                        data[base + off + k * stride] = *v;
                    }
                }
            }
        }
    }

    /// Grid values sum_nu c_nu e^{i nu.psi} from a mode array laid out by `index`.
    pub fn synthesize(&self, modes: &mut [Complex64]) {
        self.transform(modes, true);
    }

    /// Fourier coefficients (1/m^d) sum_psi v(psi) e^{-i nu.psi}, in place.
    pub fn analyze(&self, values: &mut [Complex64]) {
        self.transform(values, false);
        let s = 1.0 / self.len() as f64;
        for v in values.iter_mut() {
            *v *= s;
        }
    }
}
