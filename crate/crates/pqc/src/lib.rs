//! A typed functional circuit-description language with reversibility and
//! controllability tracking.
//!
//! The crate provides the full toolchain: a parser for `.pqc` source files,
//! a linear type checker that infers modalities over the lattice `2 > 1 > 0`,
//! a big-step evaluator producing circuits, circuit transformations
//! (adjoint, control, compute/uncompute conjugation), a dense linear-map
//! simulator used as the semantic oracle, and JSON/ASCII circuit export.

pub mod circuit;
pub mod eval;
pub mod modality;
pub mod signature;
pub mod sim;
pub mod syntax;
pub mod typecheck;
pub mod transform;
pub mod wire;

pub use circuit::{Circuit, CircuitBuilder, CircuitError, ControlGadget, ControlSpec, Item};
pub use modality::Modality;
pub use signature::{default_gateset, load_signature, GateDef, GateSet};
pub use wire::{FreshSupply, Label, SimpleType, WireType};
