//! Broadcast game on adversarial dynamic graphs: graph families, analysis,
//! the round engine, agent and adversary strategies, and an exact solver
//! for small instances.

pub mod analysis;
pub mod engine;
pub mod graph;
pub mod solver;
pub mod strategies;
pub mod verify;

pub use graph::{Edge, EdgeId, FamilyKind, FamilySpec, Graph, GraphError, NodeId, Rational};
