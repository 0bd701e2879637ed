use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid density: {0}")]
    InvalidDensity(String),

    #[error("density is not normalized: total mass {mass}")]
    NotNormalized { mass: f64 },

    #[error("quantile bisection did not converge for target {target} after {iterations} iterations")]
    BisectionFailed { target: f64, iterations: usize },

    #[error("positions are not strictly increasing at index {index} ({left} >= {right})")]
    DuplicatePosition { index: usize, left: f64, right: f64 },

    #[error("atoms are not sorted at index {index}")]
    UnsortedAtoms { index: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("Wasserstein order must satisfy p >= 1, got {0}")]
    InvalidOrder(f64),

    #[error("L^m exponent must be > 1 or infinite, got {0}")]
    InvalidExponent(f64),

    #[error("invalid particle state: {0}")]
    InvalidState(String),

    /// Two particles of one species met or were about to meet, which the
    /// equal-mass dynamics forbids for separated initial data.
    #[error("same-species collision between {species} particles {left} and {right} at t = {time}")]
    SameSpeciesCollision {
        species: char,
        left: usize,
        right: usize,
        time: f64,
    },

    #[error("event participants are not co-located: {0}")]
    NotColocated(String),

    #[error("event count {count} exceeds the bound N(N+1) = {bound}")]
    CollisionBoundExceeded { count: usize, bound: usize },

    #[error("particle escaped the initial support [{lo}, {hi}]: position {position}")]
    SupportViolation { lo: f64, hi: f64, position: f64 },

    #[error("speed bound violated: |v| = {speed} > 2")]
    SpeedBound { speed: f64 },

    #[error("invalid oracle parameter: {0}")]
    OracleParameter(String),

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True when the error reports a broken dynamical invariant rather than
    /// bad user input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::SameSpeciesCollision { .. }
                | Error::NotColocated(_)
                | Error::CollisionBoundExceeded { .. }
                | Error::SupportViolation { .. }
                | Error::SpeedBound { .. }
                | Error::DuplicatePosition { .. }
        )
    }

    /// Name of the dynamical property an invariant violation contradicts.
    pub fn violated_property(&self) -> Option<&'static str> {
        match self {
            Error::SameSpeciesCollision { .. } | Error::DuplicatePosition { .. } => {
                Some("same-species particles never collide")
            }
            Error::NotColocated(_) => Some("collision participants meet at one point"),
            Error::CollisionBoundExceeded { .. } => Some("at most N(N+1) collisions"),
            Error::SupportViolation { .. } => Some("support stays inside the initial hull"),
            Error::SpeedBound { .. } => Some("no particle moves faster than 2"),
            _ => None,
        }
    }
}
