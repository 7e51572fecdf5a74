//! Fixpoint equation systems over finite complete lattices.
//!
//! The reference semantics lives in [`semantics`]; everything else (the
//! dependency analysis, the transformations, the Gauss and SCC solvers) is
//! checked against it, and [`checker`] does so on random instances.

pub mod checker;
pub mod depgraph;
pub mod eqs;
pub mod gauss;
pub mod lattice;
pub mod semantics;
pub mod syntax;
pub mod transforms;
