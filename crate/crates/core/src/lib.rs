//! Decomposition posets of finite sets and finite vector spaces.
//!
//! A finite set decomposes as a direct product through pairs of equivalence
//! relations whose natural map to the product of quotients is a bijection;
//! those factor pairs form an orthomodular poset. This crate builds and
//! analyzes these posets at desk scale: partition algebra on bitsets, exact
//! counting, atom/block enumeration, automorphism machinery down to the
//! 27-point case, and exact state-space solving.

pub mod autom;
pub mod canon;
pub mod counting;
pub mod error;
pub mod exact;
pub mod matching;
pub mod omp;
pub mod partition;
pub mod req27;
pub mod slab27;
pub mod states;
pub mod vecfact;

pub use error::{Error, Result};
pub use omp::{FactorPair, OmpStructure};
pub use partition::{FactorTuple, GroundSet, Partition, ShapeSignature};
