//! The forced oscillator x'' + gamma x' + g(x) = f(omega t): forcing spectrum,
//! frequency vector, nonlinearity and the planar vector fields built from them.

pub mod config;
mod forcing;
mod nonlinearity;
mod system;

pub use forcing::{
    diophantine_margin, dot, forcing_eval, l1_norm, neg, shell_size, ForcingBounds, ForcingSpectrum, FrequencyVector, Nu,
};
pub use nonlinearity::bisect;
pub use nonlinearity::{equilibrium_c0, Nonlinearity};
pub use system::{extreme_fields, vector_field, FrozenField, PhaseState, PlanarField, SystemConfig};
