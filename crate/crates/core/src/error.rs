//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("block sizes must be positive, got a zero entry")]
    InvalidBlockSize,

    #[error("elements belong to different algebras: {0} vs {1}")]
    ParentMismatch(String, String),

    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("domain/codomain mismatch: expected {expected}, got {found}")]
    DomainMismatch { expected: String, found: String },

    #[error("map is not unital: residual {residual:.3e}")]
    NotUnital { residual: f64 },

    #[error("map is not completely positive: Choi minimum eigenvalue {min_eig:.3e}")]
    NotCompletelyPositive { min_eig: f64 },

    #[error("element is not positive: minimum eigenvalue {min_eig:.3e}")]
    NotPositiveElement { min_eig: f64 },

    #[error("effect is outside the unit interval: eigenvalue range [{min:.3e}, {max:.3e}]")]
    EffectOutsideUnitInterval { min: f64, max: f64 },

    #[error("not a valid state: {0}")]
    InvalidState(String),

    #[error("weights must be positive and sum to 1, got sum {sum}")]
    WeightNormalization { sum: f64 },

    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("unknown identifier `{name}` at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },

    #[error("wire type mismatch: {0}")]
    WireMismatch(String),

    #[error("signature error: {0}")]
    Signature(String),

    #[error("cannot tensor morphisms of different parity")]
    MixedParityTensor,

    #[error("invalid permutation of {{1..{n}}}: {got:?}")]
    InvalidPermutation { n: usize, got: Vec<usize> },

    #[error("invalid slot set for degree {n}: {got:?}")]
    InvalidSlots { n: usize, got: Vec<usize> },

    #[error("family degree {needed} required, only {available} available")]
    InsufficientDegree { needed: usize, available: usize },

    #[error("not a moment sequence: Hankel minimum eigenvalue {min_eig:.3e}")]
    NotMomentSequence { min_eig: f64 },

    #[error("reconstruction does not reproduce the supplied moments: residual {residual:.3e}")]
    InconsistentMoments { residual: f64 },

    #[error("generator `{0}` does not resolve to an element")]
    UnresolvedGenerator(String),

    #[error("codomain algebra must be commutative")]
    NotCommutative,

    #[error("internal consistency check `{what}` failed: residual {residual:.3e}")]
    ConsistencyCheck { what: String, residual: f64 },

    #[error("eigenvalue computation did not converge")]
    EigenFailed,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
