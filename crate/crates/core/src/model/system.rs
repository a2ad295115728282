use serde::{Deserialize, Serialize};

use super::forcing::{forcing_eval, ForcingBounds, ForcingSpectrum, FrequencyVector};
use super::nonlinearity::Nonlinearity;
use crate::error::{Error, Result};

/// Right-hand side of a planar nonautonomous system (x' , y') = field(t, x, y).
pub trait PlanarField: Sync {
    fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64);
}

impl<F: Fn(f64, f64, f64) -> (f64, f64) + Sync> PlanarField for F {
    fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        self(t, x, y)
    }
}

/// x'' + gamma x' + g(x) = f(omega t).
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub forcing: ForcingSpectrum,
    pub freq: FrequencyVector,
    pub g: Nonlinearity,
    pub gamma: f64,
    pub epsilon: f64,
}

impl SystemConfig {
    pub fn new(forcing: ForcingSpectrum, freq: FrequencyVector, g: Nonlinearity, gamma: f64) -> Result<Self> {
        if forcing.dim() != freq.dim() {
            return Err(Error::InvalidInput(format!(
                "forcing dimension {} does not match frequency dimension {}",
                forcing.dim(),
                freq.dim()
            )));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidInput(format!("gamma must be positive, got {gamma}")));
        }
        g.validate()?;
        freq.validate()?;
        forcing.validate()?;
        Ok(SystemConfig { forcing, freq, g, gamma, epsilon: 1.0 / gamma })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.forcing.clone(), self.freq.clone(), self.g.clone(), gamma)
    }

    pub fn with_nonlinearity(&self, g: Nonlinearity) -> Result<Self> {
        Self::new(self.forcing.clone(), self.freq.clone(), g, self.gamma)
    }

    pub fn forcing_at(&self, t: f64) -> f64 {
        forcing_eval(&self.forcing, &self.freq, t)
    }

    /// Length of one sampling window: the period for d = 1, ten time units otherwise.
    pub fn sampling_window(&self) -> f64 {
        if self.freq.dim() == 1 {
            2.0 * std::f64::consts::PI / self.freq.l1()
        } else {
            10.0
        }
    }
}

impl PlanarField for SystemConfig {
    fn eval(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        (y, self.forcing_at(t) - self.gamma * y - self.g.value(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, t: f64) -> Self {
        PhaseState { x, y, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.t.is_finite()
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

pub fn vector_field(cfg: &SystemConfig, s: &PhaseState) -> (f64, f64) {
    cfg.eval(s.t, s.x, s.y)
}

/// Autonomous field with the forcing frozen at `level`; gamma may be zero here
/// (conservative subsystem).
#[derive(Debug, Clone, PartialEq)]
pub struct FrozenField {
    pub g: Nonlinearity,
    pub gamma: f64,
    pub level: f64,
}

impl PlanarField for FrozenField {
    fn eval(&self, _t: f64, x: f64, y: f64) -> (f64, f64) {
        (y, self.level - self.gamma * y - self.g.value(x))
    }
}

/// (phi_f, phi_F): the field with f(omega t) replaced by its lower and upper bound.
pub fn extreme_fields(cfg: &SystemConfig, bounds: &ForcingBounds, s: &PhaseState) -> Result<((f64, f64), (f64, f64))> {
    if !cfg.g.is_even_monomial() {
        return Err(Error::WrongNonlinearity(cfg.g.name()));
    }
    let gx = cfg.g.value(s.x);
    let low = (s.y, bounds.f_low - cfg.gamma * s.y - gx);
    let up = (s.y, bounds.f_up - cfg.gamma * s.y - gx);
    Ok((low, up))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::equilibrium_c0;
    use num_complex::Complex64;

    fn even_periodic_cfg(p: u32, gamma: f64) -> SystemConfig {
        let forcing = ForcingSpectrum::single_harmonic(2.5, 0.0, 1.5).unwrap();
        SystemConfig::new(forcing, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::even(p).unwrap(), gamma).unwrap()
    }

    #[test]
    fn field_examples() {
        let cfg = SystemConfig::new(
            ForcingSpectrum::constant(1.0).unwrap(),
            FrequencyVector::periodic(1.0).unwrap(),
            Nonlinearity::odd(1).unwrap(),
            10.0,
        )
        .unwrap();
        assert_eq!(vector_field(&cfg, &PhaseState::new(0.0, 0.0, 0.0)), (0.0, 1.0));
        assert!((cfg.epsilon * cfg.gamma - 1.0).abs() < 1e-15);

        let cfg = even_periodic_cfg(1, 9.0);
        let (a, b) = vector_field(&cfg, &PhaseState::new(1.0, 1.0, 0.0));
        assert_eq!(a, 1.0);
        assert!((b + 7.5).abs() < 1e-14);

        let cfg = SystemConfig::new(
            ForcingSpectrum::constant(2.5).unwrap(),
            FrequencyVector::periodic(1.0).unwrap(),
            Nonlinearity::odd(1).unwrap(),
            10.0,
        )
        .unwrap();
        let c0 = equilibrium_c0(&cfg.g, 2.5).unwrap();
        let (a, b) = vector_field(&cfg, &PhaseState::new(c0, 0.0, 3.7));
        assert_eq!(a, 0.0);
        assert!(b.abs() < 1e-14);
    }

    #[test]
    fn extreme_field_examples() {
        let cfg = even_periodic_cfg(1, 9.0);
        let bounds = ForcingBounds::compute(&cfg.forcing, 1);
        let (lo, up) = extreme_fields(&cfg, &bounds, &PhaseState::new(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(lo, (0.0, 1.0));
        assert_eq!(up, (0.0, 4.0));
        let (_, up) = extreme_fields(&cfg, &bounds, &PhaseState::new(2.0, 0.0, 0.0)).unwrap();
        assert_eq!(up.1, 0.0);
        let x: f64 = 1.3;
        let y = (4.0 - x * x) / 9.0;
        let (_, up) = extreme_fields(&cfg, &bounds, &PhaseState::new(x, y, 0.0)).unwrap();
        assert!(up.1.abs() < 1e-14);
        let odd = cfg.with_nonlinearity(Nonlinearity::odd(1).unwrap()).unwrap();
        assert!(matches!(
            extreme_fields(&odd, &bounds, &PhaseState::new(0.0, 0.0, 0.0)),
            Err(Error::WrongNonlinearity(_))
        ));
    }

    #[test]
    fn true_field_is_convex_combination_of_extremes() {
        let cfg = even_periodic_cfg(2, 9.0);
        let bounds = ForcingBounds::compute(&cfg.forcing, 2);
        let mut seed = 0.123456789f64;
        let mut next = || {
            seed = (seed * 9301.0 + 0.49297).fract();
            seed
        };
        for _ in 0..1000 {
            let s = PhaseState::new(6.0 * next() - 3.0, 20.0 * next() - 10.0, 100.0 * next());
            let (lo, up) = extreme_fields(&cfg, &bounds, &s).unwrap();
            let mu = bounds.mu(cfg.forcing_at(s.t));
            assert!((-1e-12..=1.0 + 1e-12).contains(&mu));
            let v = vector_field(&cfg, &s);
            assert!((v.0 - (mu * up.0 + (1.0 - mu) * lo.0)).abs() < 1e-12);
            assert!((v.1 - (mu * up.1 + (1.0 - mu) * lo.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let forcing = ForcingSpectrum::new(2, [(vec![0, 0], Complex64::new(1.0, 0.0))], 1.0, 1.0).unwrap();
        assert!(SystemConfig::new(forcing, FrequencyVector::periodic(1.0).unwrap(), Nonlinearity::odd(1).unwrap(), 1.0).is_err());
    }
}
