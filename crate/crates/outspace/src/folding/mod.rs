//! Greedy folding paths simulated exactly event by event, Stallings (liberal) folding paths
//! of edgelets, collapses and expansions of paths, preimage counts with their zig-zag
//! witnesses, mixed regions with phase folding, hanging trees and vanishing paths.

mod collapse;
mod edgelet;
mod greedy;
mod hanging;
mod preimage;

pub use collapse::{collapse_path, collapse_stage, CollapsedPath, CollapsedStage, Seg, SegGraph, SegView};
pub use edgelet::{
    expand_path, fold_to_target, mixed_regions, phase_folding_path, stallings_path, Blowup, EdgeletGraph, ExpandedPath,
    LiberalPath, LiberalStep, PhaseColor, PhasePath, StepKind, TargetPoint,
};
pub use greedy::{
    greedy_folding_path, FoldDiff, FoldEvent, FoldEventKind, FoldFrame, FoldInterval, GreedyFoldingPath, PathReport,
};
pub use hanging::{hanging_tree_classify, vanishing_path, HangingCase, HangingTree, SourcePoint, VanishingPath};
pub use preimage::{preimage_bound_in_s, preimage_count, PreimageBound, ZigZagStep};

use crate::free_group::{Letter, Word};
use crate::marked_graph::MarkedGraphError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FoldingError {
    #[error("guide is not an optimal morphism")]
    NotOptimal,
    #[error("a fold collapsed an embedded loop")]
    LoopCollapsed,
    #[error("no termination within {0} events")]
    EventBudget(usize),
    #[error("final graph does not cover the target isometrically")]
    TargetMismatch,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("marking: {0}")]
    Marking(#[from] MarkedGraphError),
    #[error("forest is the whole graph")]
    CollapseAll,
    #[error("invalid blow-up: {0}")]
    InvalidBlowup(String),
    #[error("empty {0} color class")]
    EmptyColor(&'static str),
    #[error("colored points overlap or sit on a vertex")]
    BadColoring,
    #[error("edges define different splittings")]
    SplittingsDiffer,
    #[error("points have different images")]
    ImagesDiffer,
    #[error("bad point: {0}")]
    BadPoint(String),
}

/// Target edge path traversed by a segment of target edge `eps` from position `a` to `b`,
/// after pushing interior points to the initial vertex of `eps`.
pub(crate) fn snap_path<S: Scalar>(eps: usize, a: &S, b: &S, len: &S) -> Word {
    let e = (b == len) as i32 - (a == len) as i32;
    match e {
        1 => Word::new(&[eps as Letter + 1]),
        -1 => Word::new(&[-(eps as Letter + 1)]),
        _ => Word::identity(),
    }
}
