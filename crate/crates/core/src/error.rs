use thiserror::Error;

/// Errors raised by the fitting, error-bound and trade-off routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A query coordinate fell outside the span a curve is defined on.
    #[error("x = {x} outside domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    /// Malformed input: wrong lengths, unsorted or non-finite coordinates.
    #[error("invalid input: {0}")]
    Input(String),

    /// A method parameter is out of its admissible range (e.g. `m <= 0` for Lipfit).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The data cannot belong to the requested class for the given (m, sigma).
    #[error("infeasible (m, sigma) pair: {0}")]
    Infeasible(String),

    /// Division by a vanishing quantity (zero diameter, zero LB, zero-length wrap).
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// The linear-program backend did not reach an optimum.
    #[error("linear program {0}")]
    Lp(String),

    /// A computed object violated an invariant it must satisfy by construction.
    #[error("internal consistency check failed: {0}")]
    Consistency(String),

    /// A generator or sampling configuration that cannot be realised.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
