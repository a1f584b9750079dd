//! Recompute-from-scratch baseline and the validity/maximality checkers used
//! to cross-examine the matcher.

use std::collections::HashSet;
use std::fmt;

use crate::counters::{OpCounters, Work};
use crate::error::Result;
use crate::graph::{Edge, EdgeList, Matching, MateStore, VertexId};
use crate::greedy::greedy_counted;
use crate::matcher::{UpdateKind, UpdateOp};

/// First broken property found by a checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `mate(vertex) = mate` but `mate(mate) = back`.
    Symmetry {
        vertex: VertexId,
        mate: VertexId,
        back: Option<VertexId>,
    },
    /// A mated pair that is not an edge of the graph.
    EdgeNotInGraph {
        edge: Edge,
    },
    /// A graph edge whose endpoints are both unmated.
    Expandable {
        edge: Edge,
    },
    /// An edge listed by two recursion levels at once.
    SharedEdge {
        edge: Edge,
    },
    /// A mated vertex not accounted for by any level's matching.
    UnownedMate {
        vertex: VertexId,
    },
    /// Matcher and baseline disagree on the graph.
    GraphMismatch {
        edge: Edge,
    },
    GraphSizeMismatch {
        left: usize,
        right: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Symmetry { vertex, mate, back } => match back {
                Some(b) => write!(f, "symmetry: mate({vertex})={mate} but mate({mate})={b}"),
                None => write!(f, "symmetry: mate({vertex})={mate} but mate({mate})=null"),
            },
            Violation::EdgeNotInGraph { edge } => {
                write!(f, "matched pair {edge} is not an edge of the graph")
            }
            Violation::Expandable { edge } => {
                write!(f, "edge {edge} has two unmatched endpoints")
            }
            Violation::SharedEdge { edge } => write!(f, "edge {edge} owned by two levels"),
            Violation::UnownedMate { vertex } => {
                write!(f, "vertex {vertex} is mated but no level owns the pair")
            }
            Violation::GraphMismatch { edge } => {
                write!(f, "edge {edge} present in only one of the two graphs")
            }
            Violation::GraphSizeMismatch { left, right } => {
                write!(f, "graph sizes differ: {left} vs {right}")
            }
        }
    }
}

impl std::error::Error for Violation {}

/// Mate symmetry, and every mated pair is an edge of `graph`.
pub fn check_valid(graph: &EdgeList, store: &MateStore) -> Result<(), Violation> {
    check_valid_in(graph.iter(), graph.len(), store)
}

/// [`check_valid`] over a graph given as an edge iterator.
pub fn check_valid_in<'a>(
    edges: impl IntoIterator<Item = &'a Edge>,
    size_hint: usize,
    store: &MateStore,
) -> Result<(), Violation> {
    let mut present = HashSet::with_capacity(size_hint);
    present.extend(edges.into_iter().copied());
    check_valid_set(store, &present)
}

/// [`check_valid`] against a prebuilt edge set.
pub fn check_valid_set(store: &MateStore, present: &HashSet<Edge>) -> Result<(), Violation> {
    for (u, v) in store.mated() {
        let back = store.peek(v);
        if back != Some(u) {
            return Err(Violation::Symmetry {
                vertex: u,
                mate: v,
                back,
            });
        }
        if u > v {
            continue;
        }
        let edge = Edge::new(u, v).map_err(|_| Violation::Symmetry {
            vertex: u,
            mate: v,
            back,
        })?;
        if !present.contains(&edge) {
            return Err(Violation::EdgeNotInGraph { edge });
        }
    }
    Ok(())
}

/// No edge of `graph` has two unmated endpoints. Assumes a valid matching.
pub fn check_maximal(graph: &EdgeList, store: &MateStore) -> Result<(), Violation> {
    check_maximal_in(graph.iter(), store)
}

pub fn check_maximal_in<'a>(
    edges: impl IntoIterator<Item = &'a Edge>,
    store: &MateStore,
) -> Result<(), Violation> {
    for &edge in edges {
        if store.peek(edge.a()).is_none() && store.peek(edge.b()).is_none() {
            return Err(Violation::Expandable { edge });
        }
    }
    Ok(())
}

/// Recompute-from-scratch dynamic matching: every update rebuilds the
/// whole matching greedily. O(m) per update.
#[derive(Debug, Clone)]
pub struct Baseline {
    graph: EdgeList,
    store: MateStore,
    matching: EdgeList,
    work: Work,
}

impl Baseline {
    pub fn new(store: MateStore) -> Self {
        Baseline {
            graph: EdgeList::new(),
            store,
            matching: EdgeList::new(),
            work: Work::default(),
        }
    }

    pub fn dense(n: usize) -> Self {
        Baseline::new(MateStore::dense(n))
    }

    pub fn sparse() -> Self {
        Baseline::new(MateStore::ordered_map())
    }

    /// Applies `op`, then rebuilds the matching from scratch.
    pub fn step(&mut self, op: UpdateOp) {
        self.work.list_writes += self.graph.len() as u64;
        let changed = match op.kind {
            UpdateKind::Insert => self.graph.insert(op.edge),
            UpdateKind::Delete => self.graph.remove(&op.edge),
        };
        if changed {
            self.work.list_writes += 1;
        }
        for &e in &self.matching {
            self.store
                .clear(e)
                .expect("baseline matching is mirrored in its store");
        }
        self.matching = greedy_counted(&self.graph, &mut self.store, &mut self.work);
        self.work.updates_processed += 1;
    }

    pub fn graph(&self) -> &EdgeList {
        &self.graph
    }

    pub fn store(&self) -> &MateStore {
        &self.store
    }

    pub fn matching(&self) -> Matching {
        Matching::from_trusted(self.matching.clone())
    }

    pub fn mate_query(&self, u: VertexId) -> Result<Option<VertexId>> {
        self.store.get(u)
    }

    pub fn counters(&self) -> OpCounters {
        OpCounters::assemble(&self.work, &self.store.stats(), None)
    }

    pub fn check(&self) -> Result<(), Violation> {
        check_valid(&self.graph, &self.store)?;
        check_maximal(&self.graph, &self.store)
    }
}

/// Free-function form of [`Baseline::step`].
pub fn baseline_step(state: &mut Baseline, op: UpdateOp) {
    state.step(op)
}

/// Compares two edge collections as sets; `reference` must hold distinct edges.
pub fn same_edge_set<'a>(
    candidate: impl IntoIterator<Item = &'a Edge>,
    candidate_len: usize,
    reference: &HashSet<Edge>,
) -> Result<(), Violation> {
    if candidate_len != reference.len() {
        return Err(Violation::GraphSizeMismatch {
            left: candidate_len,
            right: reference.len(),
        });
    }
    for e in candidate {
        if !reference.contains(e) {
            return Err(Violation::GraphMismatch { edge: *e });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(u: u64, v: u64) -> Edge {
        Edge::new(u, v).unwrap()
    }

    fn list(edges: &[(u64, u64)]) -> EdgeList {
        EdgeList::from_edges(edges.iter().map(|&(u, v)| e(u, v)))
    }

    #[test]
    fn valid_cases() {
        let mut s = MateStore::dense(4);
        s.set(e(1, 2)).unwrap();
        assert_eq!(check_valid(&list(&[(1, 2)]), &s), Ok(()));
        assert_eq!(
            check_valid(&EdgeList::new(), &s),
            Err(Violation::EdgeNotInGraph { edge: e(1, 2) })
        );
    }

    #[test]
    fn asymmetric_store_is_caught() {
        for mut s in [MateStore::dense(4), MateStore::ordered_map()] {
            s.force_one_sided(VertexId(1), Some(VertexId(2)));
            s.force_one_sided(VertexId(2), Some(VertexId(3)));
            let err = check_valid(&list(&[(1, 2), (2, 3)]), &s).unwrap_err();
            assert!(matches!(err, Violation::Symmetry { .. }), "{err}");
        }
    }

    #[test]
    fn maximal_cases() {
        let s = MateStore::dense(4);
        assert_eq!(
            check_maximal(&list(&[(1, 2)]), &s),
            Err(Violation::Expandable { edge: e(1, 2) })
        );
        let mut s = MateStore::dense(4);
        s.set(e(1, 2)).unwrap();
        assert_eq!(check_maximal(&list(&[(1, 2), (2, 3)]), &s), Ok(()));
    }

    #[test]
    fn worked_example_difference_graph_is_maximal() {
        // a..g = 0..6
        let g = list(&[(0, 1), (1, 6), (2, 6), (6, 4), (3, 4)]);
        let mut s = MateStore::dense(7);
        s.set(e(0, 1)).unwrap();
        s.set(e(4, 6)).unwrap();
        assert_eq!(check_valid(&g, &s), Ok(()));
        assert_eq!(check_maximal(&g, &s), Ok(()));
    }

    #[test]
    fn baseline_insert_then_delete() {
        let mut b = Baseline::dense(4);
        baseline_step(&mut b, UpdateOp::insert(1u64, 2u64).unwrap());
        assert_eq!(b.matching().sorted(), vec![e(1, 2)]);
        baseline_step(&mut b, UpdateOp::delete(1u64, 2u64).unwrap());
        assert!(b.matching().is_empty());
        assert!(b.graph().is_empty());
        assert_eq!(b.check(), Ok(()));
    }

    #[test]
    fn baseline_work_grows_with_graph() {
        let mut b = Baseline::dense(200);
        let mut per_update = Vec::new();
        let mut last = 0;
        for i in 0..199u64 {
            b.step(UpdateOp::insert(i, i + 1).unwrap());
            let total = b.counters().total_work();
            per_update.push(total - last);
            last = total;
        }
        assert!(per_update[150] > 5 * per_update[20]);
    }
}
