use thiserror::Error;

/// Which bound failed to exist for a pair of elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    Infimum,
    Supremum,
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundKind::Infimum => f.write_str("infimum"),
            BoundKind::Supremum => f.write_str("supremum"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("lattice has no elements")]
    EmptyLattice,
    #[error("duplicate element name `{0}`")]
    DuplicateElement(String),
    #[error("unknown element name `{0}`")]
    UnknownElement(String),
    #[error("invalid element name `{0}`")]
    InvalidName(String),
    #[error("CycleInCovers: cover relation contains a cycle through `{0}`")]
    CycleInCovers(String),
    #[error("NotALattice: {{{0},{1}}} lack a unique {2}")]
    NotALattice(String, String, BoundKind),
    #[error("NotBounded: no unique {0} element")]
    NotBounded(&'static str),
    #[error("SizeGuardExceeded: {what} needs {needed}, limit is {limit}")]
    SizeGuardExceeded {
        what: &'static str,
        needed: String,
        limit: u64,
    },
    #[error("arity must be at least {min}, got {got}")]
    ArityTooSmall { min: usize, got: usize },
    #[error("ArityMismatch: expected arity {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("tuple index {index} out of range for {size}^{arity}")]
    IndexOutOfRange {
        index: usize,
        size: usize,
        arity: usize,
    },
    #[error("element index {0} is not valid for this lattice")]
    InvalidElement(usize),
    #[error("LatticeMismatch: operands live on different lattices")]
    LatticeMismatch,
    #[error("NotAggregation: function is not an aggregation function")]
    NotAggregation,
    #[error("InvalidIndexTuple: tuple must lie strictly between the bottom and top tuples")]
    InvalidIndexTuple,
    #[error("LatticeTooSmall: need at least {min} elements, got {got}")]
    LatticeTooSmall { min: usize, got: usize },
    #[error("DimensionMismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
    #[error("UnboundVariable: x{0}")]
    UnboundVariable(usize),
    #[error("external `{0}` is already registered")]
    DuplicateExternal(String),
    #[error("UnknownExternal: `{0}`")]
    UnknownExternal(String),
    #[error("IncompleteTable: missing tuple {0}")]
    IncompleteTable(String),
    #[error("DuplicateTuple: {0}")]
    DuplicateTuple(String),
    #[error("SyntaxError at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("closure basis is empty")]
    EmptyBasis,
    #[error("VerificationFailed: {0}")]
    VerificationFailed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
