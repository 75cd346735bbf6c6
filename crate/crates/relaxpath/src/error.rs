use thiserror::Error;

/// Errors shared by the solver, the trackers and the selection layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input vectors have mismatched lengths ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("prior or multiplicity entry {index} is not strictly positive ({value})")]
    NonPositivePrior { index: usize, value: f64 },
    #[error("observed entry {index} is negative ({value})")]
    NegativeObserved { index: usize, value: f64 },
    #[error("simplex sum {which} is {sum}, expected 1 within tolerance")]
    NotNormalized { which: &'static str, sum: f64 },
    #[error("relaxation parameter must be positive, got {0}")]
    InvalidNu(f64),
    #[error("bisection failed to converge within the iteration cap")]
    NoConvergence,
    #[error("({nu}, {mu}) is not on the path: |G| = {residual}")]
    InfeasiblePoint { nu: f64, mu: f64, residual: f64 },
    #[error("primal coordinate {index} is not strictly positive ({value})")]
    ZeroPrimal { index: usize, value: f64 },
    #[error("interior set is empty; tracking already terminated")]
    EmptyInterior,
    #[error("transition on coordinate {index} is not legal from state {from}")]
    IllegalTransition { index: usize, from: i8 },
    #[error("tracker requires a uniform prior; coordinate {index} deviates")]
    NonUniformPrior { index: usize },
    #[error("prior and observed distributions coincide")]
    DegenerateInstance,
    #[error("tracker exceeded the iteration cap of {0}")]
    IterationCapExceeded(usize),
    #[error("validation count {index} is positive where the model assigns zero probability")]
    ZeroProbability { index: usize },
    #[error("cascade reconstruction violates the simplex constraint (sum {0})")]
    InconsistentChain(f64),
    #[error("validation counts are empty or sum to zero")]
    EmptyValidationCounts,
    #[error("path record is inconsistent: {0}")]
    InvalidPath(&'static str),
    #[error("tracker incompatible with this instance: {0}")]
    TrackerIncompatible(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
