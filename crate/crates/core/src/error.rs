use thiserror::Error;

/// Errors shared across the crate. Operations that quantify over finite
/// tables return a [`crate::report::CheckReport`] instead; `Error` is for
/// conditions that make an operation meaningless rather than false.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A tuple of arguments does not match the arity a table expects.
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),

    /// A composite would leave the declared arity or size window.
    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    /// Textual input failed to parse. Positions are 1-based.
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    /// An identifier was declared twice or never declared.
    #[error("bad identifier: {0}")]
    BadIdent(String),

    /// An equational presentation is outside the fragment the compiler accepts.
    #[error("not strongly regular: {0}")]
    NotStronglyRegular(String),

    /// A morphism or a transformation component has no two-sided inverse.
    #[error("not invertible: {0}")]
    NotInvertible(String),

    /// Requested a cell between trees whose evaluations differ.
    #[error("no two-cell: {0}")]
    NoTwoCell(String),

    /// Two structures that must share a shape (domain, codomain, arity) do not.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A bounded search hit its budget before finishing.
    #[error("search bound exceeded: {0}")]
    SearchBoundExceeded(String),

    /// A structure failed validation that an operation requires up front.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
