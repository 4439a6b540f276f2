use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("vector is not unit norm (norm {0})")]
    NotUnitVector(f64),

    #[error("size cap exceeded: {what} needs {requested}, cap is {cap}")]
    CapExceeded {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("Kraus operators are not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error(
        "not a correlated equilibrium: player {player} gains {gain:.3e} by switching {from} -> {to}"
    )]
    NotCorrelatedEquilibrium {
        player: usize,
        from: usize,
        to: usize,
        gain: f64,
    },

    #[error("multiplicative incentive undefined: baseline payoff is {0}")]
    ZeroBaseline(f64),

    #[error("duplicate values in Euclidean instance")]
    DuplicateValues,

    #[error("factorization is not certified exact (residual {0:.3e})")]
    Uncertified(f64),

    #[error("honest protocol execution does not reproduce the target (deviation {0:.3e})")]
    HonestMismatch(f64),

    #[error("solver did not converge: {0}")]
    NonConvergence(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unknown construction `{0}`")]
    UnknownConstruction(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
