use alloc::string::String;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: expected {expected}, got {got}")]
    InvalidDimension { expected: usize, got: usize },

    #[error("entries length {len} does not match dim {dim} (need dim^2)")]
    ShapeMismatch { dim: usize, len: usize },

    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("trace is {0}, expected 1")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("amplitudes are not normalized (norm^2 = {0})")]
    NotNormalized(f64),

    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("coherence {0} outside [0, 1/2]")]
    InvalidCoherence(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("angle {0} deg outside [0, 180)")]
    AngleOutOfRange(f64),

    #[error("projector set is incomplete (max deviation from identity {0:.3e})")]
    IncompleteProjectors(f64),

    #[error("degenerate subspace: block trace {0:.3e}")]
    DegenerateSubspace(f64),

    #[error("missing measurement settings: {0}")]
    MissingSettings(String),

    #[error("no detected counts for setting {0}")]
    ZeroCounts(String),

    #[error("scheme {scheme} does not apply to a dimension-{dim} state")]
    SchemeMismatch { scheme: &'static str, dim: usize },

    #[error("requested {requested} output bits exceeds entropy budget of {budget}")]
    BudgetExceeded { requested: usize, budget: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
