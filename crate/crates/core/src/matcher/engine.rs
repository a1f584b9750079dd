use std::collections::VecDeque;

use super::plan::{PhaseMode, PhaseScheduler};
use super::{Fault, Observer, UpdateKind, UpdateOp};
use crate::counters::Work;
use crate::error::{Error, Result};
use crate::graph::{EdgeIndicator, EdgeList, MateStore};
use crate::greedy::greedy_counted;

/// One recursion level: its graph and the part of the global matching it owns.
///
/// While a child level runs, the parent's frame holds the difference graph
/// and its greedy matching, neither of which change until the child returns.
#[derive(Debug, Clone, Default)]
pub struct Frame {
    pub(crate) graph: EdgeList,
    pub(crate) matching: EdgeList,
    pub(crate) phase: u64,
}

impl Frame {
    pub(crate) fn new(graph: EdgeList) -> Self {
        Frame {
            graph,
            matching: EdgeList::new(),
            phase: 0,
        }
    }

    pub fn graph(&self) -> &EdgeList {
        &self.graph
    }

    pub fn matching(&self) -> &EdgeList {
        &self.matching
    }

    /// Serial number of the level's current phase.
    pub fn phase(&self) -> u64 {
        self.phase
    }
}

/// Peekable update source. Pulls from the underlying iterator only as far as
/// a caller asks to look ahead.
pub(crate) struct Lookahead<'a> {
    buffer: VecDeque<UpdateOp>,
    source: Box<dyn Iterator<Item = Result<UpdateOp>> + 'a>,
    failed: Option<Error>,
}

impl<'a> Lookahead<'a> {
    pub(crate) fn new(source: impl Iterator<Item = Result<UpdateOp>> + 'a) -> Self {
        Lookahead {
            buffer: VecDeque::new(),
            source: Box::new(source),
            failed: None,
        }
    }

    /// Buffers up to `want` updates and returns how many are available.
    /// An invalid update ends the stream; its error is kept for the caller.
    pub(crate) fn fill(&mut self, want: usize) -> usize {
        while self.buffer.len() < want && self.failed.is_none() {
            match self.source.next() {
                Some(Ok(op)) => self.buffer.push_back(op),
                Some(Err(e)) => self.failed = Some(e),
                None => break,
            }
        }
        self.buffer.len().min(want)
    }

    pub(crate) fn buffered(&self) -> usize {
        self.buffer.len()
    }

    pub(crate) fn peek(&self, k: usize) -> impl Iterator<Item = &UpdateOp> {
        self.buffer.iter().take(k)
    }

    pub(crate) fn pop(&mut self) -> Option<UpdateOp> {
        self.buffer.pop_front()
    }

    pub(crate) fn take_error(&mut self) -> Option<Error> {
        self.failed.take()
    }
}

/// Distinct edges mentioned by `batch`, in first-occurrence order.
///
/// `indicator` is used for deduplication and is all-zero again on return.
pub fn collect_batch_edges<'u>(
    batch: impl IntoIterator<Item = &'u UpdateOp>,
    indicator: &mut EdgeIndicator,
) -> EdgeList {
    let mut work = Work::default();
    collect_counted(batch, indicator, &mut work)
}

pub(crate) fn collect_counted<'u>(
    batch: impl IntoIterator<Item = &'u UpdateOp>,
    indicator: &mut EdgeIndicator,
    work: &mut Work,
) -> EdgeList {
    let mut edges = EdgeList::new();
    for op in batch {
        if !indicator.test(op.edge) {
            indicator.set(op.edge);
            edges.push_unchecked(op.edge);
            work.list_writes += 1;
        }
    }
    for &e in &edges {
        indicator.clear(e);
    }
    edges
}

/// Splits `graph` into `(graph − batch, graph ∩ batch)`, both in `graph`'s
/// order. `indicator` must be all-zero on entry and is all-zero on return.
pub fn split_graph(
    graph: &EdgeList,
    batch: &EdgeList,
    indicator: &mut EdgeIndicator,
) -> (EdgeList, EdgeList) {
    let mut work = Work::default();
    split_counted(graph, batch, indicator, &mut work)
}

pub(crate) fn split_counted(
    graph: &EdgeList,
    batch: &EdgeList,
    indicator: &mut EdgeIndicator,
    work: &mut Work,
) -> (EdgeList, EdgeList) {
    for &e in batch {
        indicator.set(e);
    }
    let mut diff = EdgeList::with_capacity(graph.len());
    let mut inter = EdgeList::with_capacity(batch.len().min(graph.len()));
    for &e in graph {
        if indicator.test(e) {
            inter.push_unchecked(e);
        } else {
            diff.push_unchecked(e);
        }
        work.list_writes += 1;
    }
    for &e in batch {
        indicator.clear(e);
    }
    (diff, inter)
}

/// Shared state of all recursion levels of one matcher.
#[derive(Debug, Clone)]
pub(crate) struct Engine {
    pub(crate) store: MateStore,
    pub(crate) indicator: EdgeIndicator,
    pub(crate) work: Work,
    pub(crate) threshold: usize,
    pub(crate) block: Option<usize>,
    pub(crate) fault: Option<Fault>,
    /// `frames[0]` is the top level; deeper frames exist only mid-run.
    pub(crate) frames: Vec<Frame>,
}

impl Engine {
    pub(crate) fn new(
        store: MateStore,
        indicator: EdgeIndicator,
        threshold: usize,
        block: Option<usize>,
    ) -> Self {
        Engine {
            store,
            indicator,
            work: Work::default(),
            threshold,
            block,
            fault: None,
            frames: vec![Frame::default()],
        }
    }

    pub(crate) fn view(&self) -> super::MatcherView<'_> {
        super::MatcherView {
            frames: &self.frames,
            store: &self.store,
            indicator: &self.indicator,
            work: &self.work,
        }
    }

    /// Unmates every edge of the level's local matching and empties it.
    pub(crate) fn erase_local_matching(&mut self, depth: usize) {
        let frame = &mut self.frames[depth];
        if self.fault == Some(Fault::KeepStaleMates) {
            frame.matching.clear();
            return;
        }
        for &e in &frame.matching {
            self.store
                .clear(e)
                .expect("local matching edges are mated in the store");
        }
        frame.matching.clear();
    }

    /// Applies `op` to the level's graph, then recomputes the level's matching
    /// from scratch.
    pub(crate) fn handle_single_update(&mut self, depth: usize, op: UpdateOp) {
        self.erase_local_matching(depth);
        let frame = &mut self.frames[depth];
        // membership scan over the current list
        self.work.list_writes += frame.graph.len() as u64;
        let changed = match op.kind {
            UpdateKind::Insert => frame.graph.insert(op.edge),
            UpdateKind::Delete => frame.graph.remove(&op.edge),
        };
        if changed {
            self.work.list_writes += 1;
        }
        frame.matching = greedy_counted(&frame.graph, &mut self.store, &mut self.work);
    }

    /// Runs phases on level `depth` until `count` updates are consumed, or
    /// until `src` runs dry when `count` is `None`.
    pub(crate) fn process(
        &mut self,
        depth: usize,
        src: &mut Lookahead<'_>,
        count: Option<usize>,
        obs: &mut dyn Observer,
    ) -> Result<()> {
        self.work.recursion_depth_max = self.work.recursion_depth_max.max(depth as u64);
        let mut sched = PhaseScheduler::new(self.threshold, self.block);
        let mut consumed = 0usize;
        loop {
            let m0 = self.frames[depth].graph.len();
            let remaining = match count {
                Some(c) => c - consumed,
                None => src.fill(sched.lookahead_needed(m0)),
            };
            self.work.lookahead_max = self.work.lookahead_max.max(src.buffered() as u64);
            if remaining == 0 {
                return Ok(());
            }
            self.frames[depth].phase += 1;
            obs.at_phase_boundary(&self.view());

            let plan = sched.next(m0, remaining)?;
            match plan.mode {
                PhaseMode::Single => {
                    let op = src.pop().ok_or(Error::LookaheadExhausted {
                        needed: 1,
                        available: 0,
                    })?;
                    self.handle_single_update(depth, op);
                    self.work.single_phases += 1;
                    self.work.updates_processed += 1;
                    obs.after_update(&self.view(), &op);
                }
                PhaseMode::Batch => {
                    let t = plan.t_prime;
                    let available = src.fill(t);
                    if available < t {
                        return Err(Error::LookaheadExhausted {
                            needed: t,
                            available,
                        });
                    }
                    self.work.batch_phases += 1;
                    self.run_batch(depth, src, t, obs)?;
                }
            }
            consumed += plan.t_prime;
        }
    }

    fn run_batch(
        &mut self,
        depth: usize,
        src: &mut Lookahead<'_>,
        t: usize,
        obs: &mut dyn Observer,
    ) -> Result<()> {
        let batch = collect_counted(src.peek(t), &mut self.indicator, &mut self.work);
        self.erase_local_matching(depth);
        let graph = self.frames[depth].graph.take();
        let (diff, inter) = split_counted(&graph, &batch, &mut self.indicator, &mut self.work);
        drop(graph);
        obs.at_phase_boundary(&self.view());

        let matching = if self.fault == Some(Fault::SkipDifferenceGreedy) {
            EdgeList::new()
        } else {
            greedy_counted(&diff, &mut self.store, &mut self.work)
        };
        let frame = &mut self.frames[depth];
        frame.graph = diff;
        frame.matching = matching;

        self.frames.push(Frame::new(inter));
        let res = self.process(depth + 1, src, Some(t), obs);
        let mut child = self.frames.pop().expect("child frame");
        res?;

        self.work.list_writes += (child.graph.len() + child.matching.len()) as u64;
        let frame = &mut self.frames[depth];
        frame.graph.append(&mut child.graph);
        frame.matching.append(&mut child.matching);
        Ok(())
    }

    /// Sets the top level's graph and matches it greedily.
    pub(crate) fn load(&mut self, graph: EdgeList) {
        debug_assert_eq!(self.frames.len(), 1);
        self.erase_local_matching(0);
        self.frames[0].graph = graph;
        let top = &self.frames[0];
        self.frames[0].matching = greedy_counted(&top.graph, &mut self.store, &mut self.work);
    }
}
