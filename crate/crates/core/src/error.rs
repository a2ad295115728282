use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no real root c0 of g(c) = {f0} with g'(c0) != 0")]
    NoTransversalRoot { f0: f64 },

    #[error("operation requires an even monomial nonlinearity, got {0}")]
    WrongNonlinearity(String),

    #[error("Newton iteration diverged: residual {residual:.3e} after {iterations} iterations")]
    NewtonDiverged { residual: f64, iterations: usize },

    #[error("small divisor |omega . nu| = {divisor:.3e} at nu = {nu:?}")]
    SmallDivisorOverflow { nu: Vec<i32>, divisor: f64 },

    #[error("frequency vector fails the Diophantine check on the lattice (margin {margin:.3e})")]
    NotDiophantine { margin: f64 },

    #[error("event {0} was not registered for this trajectory")]
    MissingEvent(String),

    #[error("denominator Q(xi) = F(xi, alpha) vanishes at xi = {xi}")]
    DegenerateQ { xi: f64 },

    #[error("x0(t) changes sign on the sample (min {min:.4}, max {max:.4})")]
    SignChange { min: f64, max: f64 },

    #[error("gamma^2 = {gamma_sq:.4} does not exceed 2 B1 = {two_b1:.4}")]
    GammaTooSmall { gamma_sq: f64, two_b1: f64 },

    #[error(
        "gamma^2 = {gamma_sq:.4} below threshold: reality bound 8pF^(2p-1) = {reality:.4}, \
         J-below-P_f bound = {j_below:.4}"
    )]
    GammaBelowThreshold { gamma_sq: f64, reality: f64, j_below: f64 },

    #[error("failed to bracket a root: {0}")]
    BracketFailure(String),

    #[error("no admissible b > 0 for the blow-up region")]
    NoValidB,

    #[error("empty set: {0}")]
    EmptySet(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Mathematical failures (divergence, thresholds) as opposed to usage errors.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            Error::NoTransversalRoot { .. }
                | Error::NewtonDiverged { .. }
                | Error::SmallDivisorOverflow { .. }
                | Error::NotDiophantine { .. }
                | Error::DegenerateQ { .. }
                | Error::SignChange { .. }
                | Error::GammaTooSmall { .. }
                | Error::GammaBelowThreshold { .. }
                | Error::BracketFailure(_)
                | Error::NoValidB
                | Error::EmptySet(_)
        )
    }
}
