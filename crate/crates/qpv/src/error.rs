//! Crate-wide error type.
//!
//! Domain refusals (root-of-unity guards) are kept distinct from ordinary
//! invalid-input errors because the command-line layer maps them to different
//! exit codes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The requested operation divides by a vanishing q-factorial or is
    /// otherwise undefined at a root of unity. Deliberate refusal, not a bug.
    #[error("refused: {context} requires q not a root of unity (q has order {order})")]
    RootOfUnity { order: u32, context: String },

    /// A root-of-unity field was required but q has infinite order.
    #[error("refused: {context} requires q to be a root of unity")]
    NotRootOfUnity { context: String },

    /// Division by a non-invertible element.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// Malformed textual or JSON input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally invalid data (failed precondition).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A rewrite did not terminate within the step budget.
    #[error("rewriting exceeded step budget on word {word}")]
    NonTerminating { word: String },

    /// A checked property failed where the caller demanded success.
    #[error("property failed: {0}")]
    PropertyFailed(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
