//! Graph primitives plus the two shared structures: the mate store and the
//! edge indicator.

mod edge;
mod indicator;
mod mate;

pub use edge::{edgelist_delete, edgelist_insert, make_edge, Edge, EdgeList, Matching, VertexId};
pub use indicator::{
    indicator_clear, indicator_set, indicator_test, EdgeIndicator, IndicatorStats,
    IndicatorStrategy, SetupKind,
};
pub use mate::{mate_clear, mate_get, mate_set, MateStats, MateStore, MateStrategy};
