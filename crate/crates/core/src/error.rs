use thiserror::Error;

use crate::network::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("network failed validation ({} violation(s)): {}", .0.len(), join_violations(.0))]
    InvalidNetwork(Vec<Violation>),

    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },

    #[error("schema error: {0}")]
    Schema(String),

    #[error("integration failed at t = {last_good_time}: {reason}")]
    IntegrationFailure { last_good_time: f64, reason: String },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("unknown gene `{0}`")]
    UnknownGene(String),

    #[error("unknown input `{0}`")]
    UnknownInput(String),

    #[error("mismatched axes: {0}")]
    MismatchedAxes(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite, got {value}")))
    }
}
