//! Induced paths of subgroup covers, the three-interval dichotomy, projections of free
//! factors to the splittings and factors of another factor, distance chains, tame paths,
//! Farey distances and the sampling experiments built on them.

mod axis;
mod chain;
mod complement;
mod experiments;
mod induced;
mod predicates;
mod projection;

pub use axis::{axis_automorphism, axis_map, axis_rose, axis_subgroup, figure1, Axis, AxisRow};
pub use chain::{conjugate_into, distance4_chain, ChainLink, ChainMark, ChainWitness};
pub use complement::{
    good_for, near_embedding_complement, tame_path, ComplementDecomposition, TamePath, WedgeCertificate,
};
pub use experiments::{
    behrstock, bgi_proxy, finiteness, graph_projection, hamenstadt_automorphism, hamenstadt_demo, hamenstadt_words,
    natural_path, panel_diameters, polynomial_growth_demo, projection_stability, rank3_panel, same_color_groups,
    splitting_factors, BehrstockConfig, BehrstockReport, BgiReport, FinitenessReport, FinitenessRow, GrowthRow,
    HamenstadtReport, HamenstadtRow, PanelRow, StabilityConfig, StabilityReport, StabilityRow, TripleRecord,
};
pub use induced::{
    adjoined_interval, classify_intervals, doubly_covered, induced_path, subgraph_rank, Footprint, InducedPath,
    InducedSample, IntervalClassification,
};
pub use predicates::{GatedCover, PredicateFlags, TopEdge};
pub use projection::{
    definedness_gate, distance_lower_bound, embedding_rose, factor_distance, factor_set_diameter, farey_distance,
    projection_distance, projection_f, projection_s, projection_s_with, twisted_complement, Definedness, LowerBound,
    ProjectionSet, SurrogateConfig,
};

use crate::folding::FoldingError;
use crate::free_group::FreeGroupError;
use crate::marked_graph::MarkedGraphError;
use crate::whitehead::WhiteheadError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SubfactorError {
    #[error("marked graph: {0}")]
    Marking(#[from] MarkedGraphError),
    #[error("folding: {0}")]
    Folding(#[from] FoldingError),
    #[error("whitehead: {0}")]
    Whitehead(#[from] WhiteheadError),
    #[error("free group: {0}")]
    FreeGroup(#[from] FreeGroupError),
    #[error("subgroup is not nearly embedded")]
    NotNearlyEmbedded,
    #[error("subgroup is not adjoined")]
    NotAdjoined,
    #[error("subgroup is not embedded")]
    NotEmbedded,
    #[error("the two factors are conjugate")]
    SelfProjection,
    #[error("not a proper free factor")]
    NotFreeFactor,
    #[error("element is not primitive")]
    NotPrimitive,
    #[error("ambient rank {0} too small")]
    RankTooSmall(usize),
    #[error("no certified chain: {0}")]
    NoChain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

impl SubfactorError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            SubfactorError::Marking(_) => "MARKING",
            SubfactorError::Folding(_) => "FOLDING",
            SubfactorError::Whitehead(_) => "WHITEHEAD",
            SubfactorError::FreeGroup(_) => "FREE_GROUP",
            SubfactorError::NotNearlyEmbedded => "NOT_NEARLY_EMBEDDED",
            SubfactorError::NotAdjoined => "NOT_ADJOINED",
            SubfactorError::NotEmbedded => "NOT_EMBEDDED",
            SubfactorError::SelfProjection => "PROJ_SELF",
            SubfactorError::NotFreeFactor => "NOT_FREE_FACTOR",
            SubfactorError::NotPrimitive => "NOT_PRIMITIVE",
            SubfactorError::RankTooSmall(_) => "RANK_TOO_SMALL",
            SubfactorError::NoChain(_) => "NO_CHAIN",
            SubfactorError::Degenerate(_) => "DEGENERATE",
        }
    }
}
