use thiserror::Error;

/// Coarse failure classes. The CLI maps these onto exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or out-of-range input.
    Invalid,
    /// Input is well-formed but degenerate (single-point attractor, etc).
    Degenerate,
    /// A hypothesis of the requested operation does not hold.
    Hypothesis,
    /// An iterative routine failed to converge or lost accuracy.
    Numeric,
}

#[derive(Debug, Error)]
pub enum IfsError {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("ratio {0} outside (0, 1)")]
    RatioOutOfRange(f64),
    #[error("rotation is not orthogonal (residual {residual:.3e} > {tol:.1e})")]
    NotOrthogonal { residual: f64, tol: f64 },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty {0}")]
    Empty(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("graph is not strongly connected ({components} components)")]
    NotStronglyConnected { components: usize },
    #[error("transformation group is infinite (closure exceeded {explored} elements)")]
    InfiniteGroup { explored: usize },
    #[error("rotation lies outside the group closure (distance {distance:.3e})")]
    OutsideClosure { distance: f64 },
    #[error("ambiguous group element lookup ({matches} matches within tolerance)")]
    AmbiguousLookup { matches: usize },
    #[error("no dimension-drop witness at levels {levels:?}")]
    NoDropWitness { levels: Vec<usize> },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
    },
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl IfsError {
    pub fn class(&self) -> ErrorClass {
        use IfsError::*;
        match self {
            DimensionMismatch { .. }
            | RatioOutOfRange(_)
            | NotOrthogonal { .. }
            | NonFinite(_)
            | Empty(_)
            | InvalidArgument(_)
            | IndexOutOfRange { .. } => ErrorClass::Invalid,
            Degenerate(_) => ErrorClass::Degenerate,
            NotStronglyConnected { .. }
            | InfiniteGroup { .. }
            | OutsideClosure { .. }
            | AmbiguousLookup { .. }
            | NoDropWitness { .. }
            | Hypothesis(_)
            | SearchExhausted(_) => ErrorClass::Hypothesis,
            NonConvergence { .. } | Numeric(_) => ErrorClass::Numeric,
        }
    }
}

pub type Result<T> = std::result::Result<T, IfsError>;
