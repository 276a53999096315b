//! Random quantum maps between finite-dimensional C*-algebras.
//!
//! The crate computes with multi-matrix algebras `⊕ᵢ M_{nᵢ}`: unital
//! *-morphisms and unital completely positive maps between them, quantum
//! families of maps `φ: B → A ⊗ C`, random quantum maps `(C, φ, ν)` with
//! their induced CP maps and transitions, truncated quantum Markov chains,
//! invariant states and skew products, and the classical (commutative)
//! special case of all of these.

pub mod algebra;
pub mod chain;
pub mod classical;
pub mod error;
pub mod implement;
pub mod invariant;
pub mod linalg;
pub mod maps;
pub mod random;
pub mod rqm;
pub mod stinespring;
pub mod tensor;

pub use algebra::{Algebra, Element, State, DEFAULT_TOL};
pub use error::{Error, Result};
pub use maps::{adjoint_transition, make_morphism, LinearMap, MapKind, Transition};
pub use rqm::{Qfm, Rqm};
pub use chain::{build_chain, ChainSpec, TruncatedChain};
pub use classical::{ClassicalRandomMap, FiniteSpace, Kernel};
pub use implement::{
    implement_compose, implement_convex_sum, implement_direct_sum, implement_finite_family, implement_from_stinespring,
    implement_morphism, implement_state, implement_tensor, PaddingSearch, StinespringOutcome,
};
pub use invariant::{invariant_states, verify_invariant, verify_skew_invariance, InvariantReport};
pub use random::Fixtures;
pub use stinespring::{stinespring_dilate, StinespringDilation};
