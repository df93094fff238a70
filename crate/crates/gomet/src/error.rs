use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A space or algebra specification violates its constraints.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    /// An operation was called with incompatible or out-of-domain arguments.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Space-spec text could not be parsed.
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    /// The module decomposition could not be resolved at the configured
    /// tolerances (e.g. an ambiguous eigenvalue cluster gap).
    #[error("decomposition failure: {0}")]
    Decomposition(String),

    /// A metric instantiation fell outside the positive-definite cone.
    #[error("domain error: {0}")]
    Domain(String),

    /// A published fact failed to reproduce in the end-to-end pipeline.
    #[error("pipeline assertion failed: {0}")]
    PipelineAssertion(String),

    /// A numerical routine failed to reach its accuracy contract.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Report or file output could not be written.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
