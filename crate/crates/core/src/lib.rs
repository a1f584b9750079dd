//! Fully dynamic maximal matching that batches future updates.
//!
//! The [`Matcher`] consumes a stream of edge insertions and deletions and
//! keeps a maximal matching readable through [`Matcher::mate_query`]. When
//! enough of the stream is known ahead of time it processes updates in
//! phases: the part of the graph untouched by the next batch is matched
//! once, and the batch itself is handled recursively on the small
//! intersection graph. Amortized work per update grows with `log m`, where
//! [`Baseline`] recomputes from scratch at `O(m)` per update.
//!
//! ```
//! use lookahead_matching::{Matcher, MatcherConfig, UpdateOp, VertexId};
//!
//! let mut m = Matcher::new(MatcherConfig::dense(4)).unwrap();
//! m.push_update(UpdateOp::insert(0u64, 1u64).unwrap()).unwrap();
//! m.push_update(UpdateOp::insert(1u64, 2u64).unwrap()).unwrap();
//! m.run_until_buffer_consumed().unwrap();
//! assert_eq!(m.mate_query(0u64).unwrap(), Some(VertexId(1)));
//! ```

pub mod bench;
pub mod counters;
pub mod error;
pub mod graph;
pub mod greedy;
pub mod matcher;
pub mod reference;
pub mod stream;

pub use counters::OpCounters;
pub use error::{Error, LogicError, Result};
pub use graph::{
    Edge, EdgeIndicator, EdgeList, IndicatorStrategy, Matching, MateStore, MateStrategy, SetupKind,
    VertexId,
};
pub use greedy::greedy;
pub use matcher::{Matcher, MatcherConfig, MatcherView, Observer, UpdateKind, UpdateOp};
pub use reference::{check_maximal, check_valid, Baseline, Violation};
pub use stream::{generate, parse_stream, serialize_stream, Stream, StreamEvent, WorkloadConfig};
