//! Computational tools for free groups and Outer space: Stallings graphs, Whitehead
//! minimization, marked metric graphs, optimal maps, exact greedy folding paths, induced
//! paths of subgroup covers and subfactor projections.

pub mod baseline;
pub mod export;
pub mod folding;
pub mod free_group;
pub mod marked_graph;
pub mod optimal_maps;
pub mod par;
pub mod random;
pub mod scalar;
pub mod subfactor;
pub mod whitehead;

pub use free_group::{Automorphism, SubgroupGraph, Word};
pub use marked_graph::MarkedGraph;
pub use scalar::{Scalar, Q, QL};
