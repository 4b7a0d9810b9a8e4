//! Reduced words, automorphisms, Stallings subgroup graphs, fiber products and mod-2 homology.

mod automorphism;
mod graph;
mod homology;
mod subgroup;
mod word;

pub use automorphism::{apply_automorphism, invert_automorphism, substitute, Automorphism, FoldStep};
pub use graph::{label_order, LabeledGraph, UnionFind};
pub use homology::{cycle_classes, homology_mod2, Mod2Subspace};
pub use subgroup::{fiber_product, intersection, stallings_graph, FiberComponent, SubgroupGraph};
pub use word::{free_reduce, parse_words, reduce, Letter, Word, DEFAULT_ALPHABET};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FreeGroupError {
    #[error("letter {letter} out of range for rank {rank}")]
    LetterOutOfRange { letter: Letter, rank: usize },
    #[error("rank mismatch: expected {expected}, found {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("images do not form a basis")]
    NotABasis,
    #[error("parse error: {0}")]
    Parse(String),
}
