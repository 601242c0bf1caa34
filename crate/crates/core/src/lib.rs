//! Involutive Markov categories over finite-dimensional C*-algebras.
//!
//! The objects are direct sums of complex matrix blocks ([`BlockAlgebra`]),
//! the morphisms are unital linear maps stored in the operator-algebra
//! (Heisenberg) direction ([`UMap`]), and the physically meaningful
//! subcategory is cut out by complete positivity (Choi test). On top of
//! that sit a string-diagram term language with a strict evaluator,
//! nullspace-based almost-sure-equality decisions, finite truncations of
//! Kolmogorov tensor powers, and the moment/seminorm machinery used to
//! verify quantum de Finetti statements at desk scale.

pub mod algebra;
pub mod definetti;
pub mod diagram;
pub mod nullspace;
pub mod power;
pub mod morphism;
pub mod sampling;
pub mod statespace;
pub mod error;
pub mod json;
pub mod linalg;

pub use algebra::{make_algebra, AlgebraElement, BlockAlgebra, Spectrum};
pub use definetti::{MixingMeasure, MomentMatrix, StateOnAlgebra};
pub use diagram::{DiagramTerm, EvenOddMorphism, Parity, Signature};
pub use error::{Error, Result};
pub use morphism::{ChoiMatrix, Positivity, UMap};
pub use nullspace::{AsMode, NullspaceBasis, NullspaceKind};
pub use power::{ExchangeableFamily, TensorPower};

/// Default absolute tolerance for eigenvalue-based predicates.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default tolerance for the Choi PSD test.
pub const CP_TOL: f64 = 1e-8;

/// Default eigenvalue cutoff for nullspace kernels.
pub const KERNEL_TOL: f64 = 1e-10;
