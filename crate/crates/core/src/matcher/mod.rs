//! Lookahead-batched maximal matching.
//!
//! The matcher works in phases. A small level (fewer than `threshold`
//! edges) applies one update and rematches itself greedily. A larger level
//! looks ahead at the next `t'` updates and greedily matches the edges those
//! updates do not mention. The mentioned edges go, together with the `t'`
//! updates, to a recursive call on a level at most half as large. All levels share one mate store and one edge
//! indicator; each level remembers the matched edges it owns so it can take
//! them back out of the store.

mod engine;
mod plan;

use std::collections::{HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use engine::{collect_batch_edges, split_graph, Frame};
pub use plan::{plan_phase, PhaseMode, PhasePlan, PhaseScheduler};

use crate::counters::{OpCounters, Work};
use crate::error::{Error, Result};
use crate::graph::{
    Edge, EdgeIndicator, EdgeList, IndicatorStrategy, Matching, MateStore, MateStrategy, SetupKind,
    VertexId,
};
use crate::reference::Violation;
use engine::{Engine, Lookahead};

/// Default size below which a level handles one update per phase.
pub const DEFAULT_THRESHOLD: usize = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateKind {
    Insert,
    Delete,
}

/// An edge insertion or deletion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UpdateOp {
    pub kind: UpdateKind,
    pub edge: Edge,
}

impl UpdateOp {
    pub fn insert(u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<Self> {
        Ok(UpdateOp {
            kind: UpdateKind::Insert,
            edge: Edge::new(u, v)?,
        })
    }

    pub fn delete(u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<Self> {
        Ok(UpdateOp {
            kind: UpdateKind::Delete,
            edge: Edge::new(u, v)?,
        })
    }
}

impl fmt::Display for UpdateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.kind {
            UpdateKind::Insert => '+',
            UpdateKind::Delete => '-',
        };
        write!(f, "{sign}{}", self.edge)
    }
}

/// Deliberate defects for checking that verification catches a broken matcher.
#[doc(hidden)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fault {
    /// Leave the difference graph unmatched during batch phases.
    SkipDifferenceGreedy,
    /// Forget local matchings without clearing their mates.
    KeepStaleMates,
}

/// Hooks called by the matcher while it runs.
pub trait Observer {
    /// After each individual update, with the whole structure consistent.
    fn after_update(&mut self, _view: &MatcherView<'_>, _op: &UpdateOp) {}

    /// At the start of every phase and right after each split.
    fn at_phase_boundary(&mut self, _view: &MatcherView<'_>) {}
}

impl Observer for () {}

/// Read-only view of a matcher between two operations.
pub struct MatcherView<'a> {
    pub(crate) frames: &'a [Frame],
    pub(crate) store: &'a MateStore,
    pub(crate) indicator: &'a EdgeIndicator,
    pub(crate) work: &'a Work,
}

impl<'a> MatcherView<'a> {
    /// Active recursion levels, outermost first.
    pub fn frames(&self) -> &'a [Frame] {
        self.frames
    }

    pub fn store(&self) -> &'a MateStore {
        self.store
    }

    pub fn indicator(&self) -> &'a EdgeIndicator {
        self.indicator
    }

    pub fn updates_processed(&self) -> u64 {
        self.work.updates_processed
    }

    /// Counted mate lookup, as a client query would do it.
    pub fn mate_query(&self, u: VertexId) -> Result<Option<VertexId>> {
        self.store.get(u)
    }

    pub fn edge_count(&self) -> usize {
        self.frames.iter().map(|f| f.graph.len()).sum()
    }

    /// Every edge of the current graph, level by level.
    pub fn edges(&self) -> impl Iterator<Item = &'a Edge> + 'a {
        self.frames.iter().flat_map(|f| f.graph.iter())
    }

    /// The current graph as one list (outer levels first).
    pub fn graph(&self) -> EdgeList {
        let mut g = EdgeList::with_capacity(self.edge_count());
        for &e in self.edges() {
            g.push_unchecked(e);
        }
        g
    }

    /// Union of the levels' local matchings.
    pub fn matching(&self) -> Matching {
        let mut m = EdgeList::new();
        for f in self.frames {
            for &e in &f.matching {
                m.push_unchecked(e);
            }
        }
        Matching::from_trusted(m)
    }

    /// Checks that the levels' graphs are pairwise disjoint, each level's
    /// matching lies inside its own graph, and the union of local matchings
    /// is exactly the set of mated pairs in the store.
    pub fn check_ownership(&self) -> Result<(), Violation> {
        let mut seen = HashSet::with_capacity(self.edge_count());
        for f in self.frames {
            for &e in &f.graph {
                if !seen.insert(e) {
                    return Err(Violation::SharedEdge { edge: e });
                }
            }
        }
        let mut owned = 0usize;
        for f in self.frames {
            let own: HashSet<Edge> = f.graph.iter().copied().collect();
            for &e in &f.matching {
                if !own.contains(&e) {
                    return Err(Violation::EdgeNotInGraph { edge: e });
                }
                if self.store.peek(e.a()) != Some(e.b()) || self.store.peek(e.b()) != Some(e.a()) {
                    return Err(Violation::UnownedMate { vertex: e.a() });
                }
                owned += 2;
            }
        }
        if owned != self.store.mated_count() {
            let stray = self
                .store
                .mated()
                .find(|&(u, v)| {
                    let e = Edge::new(u, v).ok();
                    !self
                        .frames
                        .iter()
                        .any(|f| e.is_some_and(|e| f.matching.as_slice().contains(&e)))
                })
                .map(|(u, _)| u)
                .unwrap_or(VertexId(0));
            return Err(Violation::UnownedMate { vertex: stray });
        }
        Ok(())
    }
}

/// Construction parameters of a [`Matcher`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatcherConfig {
    /// Declared vertex count, or `None` for an unbounded sparse universe.
    pub universe: Option<usize>,
    pub mate: MateStrategy,
    pub indicator: IndicatorStrategy,
    /// Clear the matrix indicator with an explicit n² pass instead of
    /// relying on zeroed allocation.
    pub eager_setup: bool,
    pub threshold: usize,
    /// Fixed block size per batch phase, capped at half the level.
    pub phase_override: Option<usize>,
    #[doc(hidden)]
    pub fault: Option<Fault>,
}

impl MatcherConfig {
    /// Dense mate array and matrix indicator over `0..n`.
    pub fn dense(n: usize) -> Self {
        MatcherConfig {
            universe: Some(n),
            mate: MateStrategy::Dense,
            indicator: IndicatorStrategy::LazyMatrix,
            eager_setup: false,
            threshold: DEFAULT_THRESHOLD,
            phase_override: None,
            fault: None,
        }
    }

    /// Ordered map and ordered set; any vertex id is accepted.
    pub fn sparse() -> Self {
        MatcherConfig {
            universe: None,
            mate: MateStrategy::OrderedMap,
            indicator: IndicatorStrategy::OrderedSet,
            ..MatcherConfig::dense(0)
        }
    }

    pub fn with_strategies(mut self, mate: MateStrategy, indicator: IndicatorStrategy) -> Self {
        self.mate = mate;
        self.indicator = indicator;
        self
    }

    pub fn with_threshold(mut self, threshold: usize) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn with_phase_override(mut self, block: Option<usize>) -> Self {
        self.phase_override = block;
        self
    }

    pub fn with_eager_setup(mut self, eager: bool) -> Self {
        self.eager_setup = eager;
        self
    }
}

/// Fully dynamic maximal matching driven by a buffered update stream.
///
/// Updates are queued with [`Matcher::push_update`] and applied by
/// [`Matcher::run_until_buffer_consumed`]; the queue is the lookahead. Mate
/// queries are answered from the shared store between runs, or between any
/// two updates through an [`Observer`].
#[derive(Debug, Clone)]
pub struct Matcher {
    engine: Engine,
    pending: VecDeque<UpdateOp>,
    config: MatcherConfig,
}

impl Matcher {
    pub fn new(config: MatcherConfig) -> Result<Self> {
        if config.threshold == 0 {
            return Err(Error::Config("threshold must be at least 1".into()));
        }
        if config.phase_override == Some(0) {
            return Err(Error::Config("phase override must be at least 1".into()));
        }
        let store = MateStore::with_strategy(config.mate, config.universe)?;
        let indicator = match (config.indicator, config.universe, config.eager_setup) {
            (IndicatorStrategy::LazyMatrix, Some(n), true) => EdgeIndicator::eager_matrix(n)?,
            (strategy, n, _) => EdgeIndicator::with_strategy(strategy, n)?,
        };
        let mut engine = Engine::new(store, indicator, config.threshold, config.phase_override);
        engine.fault = config.fault;
        Ok(Matcher {
            engine,
            pending: VecDeque::new(),
            config,
        })
    }

    /// Starts from `edges` (duplicates dropped) matched greedily.
    pub fn with_graph(
        config: MatcherConfig,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let mut m = Matcher::new(config)?;
        let graph = EdgeList::from_edges(edges);
        for e in &graph {
            m.check_edge(e)?;
        }
        m.engine.load(graph);
        Ok(m)
    }

    pub fn config(&self) -> &MatcherConfig {
        &self.config
    }

    fn check_edge(&self, e: &Edge) -> Result<()> {
        if let Some(n) = self.config.universe {
            for v in [e.a(), e.b()] {
                if v.0 >= n as u64 {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
        }
        Ok(())
    }

    /// Queues an update. Nothing is applied until the next run.
    pub fn push_update(&mut self, op: UpdateOp) -> Result<()> {
        self.check_edge(&op.edge)?;
        self.pending.push_back(op);
        Ok(())
    }

    pub fn insert(&mut self, u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<()> {
        self.push_update(UpdateOp::insert(u, v)?)
    }

    pub fn delete(&mut self, u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<()> {
        self.push_update(UpdateOp::delete(u, v)?)
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }

    /// Applies every queued update.
    pub fn run_until_buffer_consumed(&mut self) -> Result<()> {
        self.run_observed(&mut ())
    }

    /// Applies every queued update, calling `obs` along the way.
    pub fn run_observed(&mut self, obs: &mut dyn Observer) -> Result<()> {
        let queued: Vec<UpdateOp> = self.pending.drain(..).collect();
        let mut src = Lookahead::new(queued.into_iter().map(Ok));
        self.engine.process(0, &mut src, None, obs)
    }

    /// Applies updates pulled lazily from `updates`, reading ahead only as
    /// far as the phase schedule needs. Out-of-range updates end the run
    /// with an error after everything before them has been applied.
    pub fn run_stream<I>(&mut self, updates: I, obs: &mut dyn Observer) -> Result<()>
    where
        I: IntoIterator<Item = UpdateOp>,
    {
        let universe = self.config.universe;
        let checked = updates.into_iter().map(move |op| {
            if let Some(n) = universe {
                for v in [op.edge.a(), op.edge.b()] {
                    if v.0 >= n as u64 {
                        return Err(Error::VertexOutOfRange { vertex: v, n });
                    }
                }
            }
            Ok(op)
        });
        let mut src = Lookahead::new(checked);
        self.engine.process(0, &mut src, None, obs)?;
        match src.take_error() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Mate of `u` in the current maximal matching.
    pub fn mate_query(&self, u: impl Into<VertexId>) -> Result<Option<VertexId>> {
        self.engine.store.get(u.into())
    }

    pub fn snapshot_graph(&self) -> EdgeList {
        self.engine.view().graph()
    }

    pub fn snapshot_matching(&self) -> Matching {
        self.engine.view().matching()
    }

    pub fn view(&self) -> MatcherView<'_> {
        self.engine.view()
    }

    pub fn counters(&self) -> OpCounters {
        OpCounters::assemble(
            &self.engine.work,
            &self.engine.store.stats(),
            Some(&self.engine.indicator.stats()),
        )
    }

    pub fn setup_kind(&self) -> SetupKind {
        self.engine.indicator.setup_kind()
    }

    pub fn store(&self) -> &MateStore {
        &self.engine.store
    }

    pub fn indicator(&self) -> &EdgeIndicator {
        &self.engine.indicator
    }
}

/// Mate of `u` in `matcher`'s current matching.
pub fn mate_query(matcher: &Matcher, u: VertexId) -> Result<Option<VertexId>> {
    matcher.mate_query(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_insert_on_empty_graph() {
        let mut m = Matcher::new(MatcherConfig::dense(4)).unwrap();
        m.insert(1u64, 2u64).unwrap();
        m.run_until_buffer_consumed().unwrap();
        assert_eq!(
            m.snapshot_graph().as_slice(),
            &[Edge::new(1u64, 2u64).unwrap()]
        );
        assert_eq!(
            m.snapshot_matching().sorted(),
            vec![Edge::new(1u64, 2u64).unwrap()]
        );
        assert_eq!(m.mate_query(1u64).unwrap(), Some(VertexId(2)));
        assert_eq!(m.mate_query(3u64).unwrap(), None);
    }

    #[test]
    fn rejects_bad_config_and_updates() {
        assert!(Matcher::new(MatcherConfig::dense(4).with_threshold(0)).is_err());
        assert!(Matcher::new(MatcherConfig::dense(4).with_phase_override(Some(0))).is_err());
        assert!(Matcher::new(
            MatcherConfig::sparse()
                .with_strategies(MateStrategy::Dense, IndicatorStrategy::OrderedSet)
        )
        .is_err());
        let mut m = Matcher::new(MatcherConfig::dense(4)).unwrap();
        assert!(matches!(
            m.insert(1u64, 4u64),
            Err(Error::VertexOutOfRange { .. })
        ));
        assert!(matches!(m.insert(2u64, 2u64), Err(Error::SelfLoop(_))));
        assert!(m.mate_query(9u64).is_err());
    }

    #[test]
    fn dense_query_is_one_get() {
        let mut m = Matcher::new(MatcherConfig::dense(8)).unwrap();
        m.insert(0u64, 1u64).unwrap();
        m.run_until_buffer_consumed().unwrap();
        let before = m.counters().mate_gets;
        m.mate_query(0u64).unwrap();
        assert_eq!(m.counters().mate_gets - before, 1);
    }

    #[test]
    fn lazy_stream_stops_at_bad_update() {
        let mut m = Matcher::new(MatcherConfig::dense(4)).unwrap();
        let ops = vec![
            UpdateOp::insert(0u64, 1u64).unwrap(),
            UpdateOp::insert(2u64, 9u64).unwrap(),
            UpdateOp::insert(2u64, 3u64).unwrap(),
        ];
        let err = m.run_stream(ops, &mut ()).unwrap_err();
        assert!(matches!(err, Error::VertexOutOfRange { .. }));
        assert_eq!(m.snapshot_graph().len(), 1);
    }

    #[test]
    fn sparse_accepts_large_ids() {
        let mut m = Matcher::new(MatcherConfig::sparse()).unwrap();
        m.insert(1u64 << 40, 7u64).unwrap();
        m.run_until_buffer_consumed().unwrap();
        assert_eq!(m.mate_query(7u64).unwrap(), Some(VertexId(1 << 40)));
    }
}
