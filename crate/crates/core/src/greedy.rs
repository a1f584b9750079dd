//! Single-pass greedy maximal matching over an edge list.

use crate::counters::Work;
use crate::graph::{EdgeList, Matching, MateStore};

/// Scans `graph` in list order and matches every edge whose endpoints are
/// both unmated at the moment of inspection.
///
/// Entries of `store` that are non-null on entry are never changed, so the
/// result is a maximal matching of the subgraph spanned by the initially
/// unmated vertices. Returns the newly matched edges in scan order.
pub fn greedy(graph: &EdgeList, store: &mut MateStore) -> Matching {
    let mut work = Work::default();
    Matching::from_trusted(greedy_counted(graph, store, &mut work))
}

/// [`greedy`] with its edge visits and list writes charged to `work`.
pub fn greedy_counted(graph: &EdgeList, store: &mut MateStore, work: &mut Work) -> EdgeList {
    let mut matched = EdgeList::new();
    for &e in graph {
        work.greedy_edge_visits += 1;
        if store.lookup(e.a()).is_none() && store.lookup(e.b()).is_none() {
            store
                .set(e)
                .expect("both endpoints were just observed unmated");
            matched.push_unchecked(e);
            work.list_writes += 1;
        }
    }
    matched
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, VertexId};
    use proptest::prelude::*;

    // a..g as 0..6
    const A: u64 = 0;
    const B: u64 = 1;
    const C: u64 = 2;
    const D: u64 = 3;
    const E: u64 = 4;
    const F: u64 = 5;
    const G: u64 = 6;

    fn e(u: u64, v: u64) -> Edge {
        Edge::new(u, v).unwrap()
    }

    #[test]
    fn empty_graph() {
        let mut store = MateStore::dense(4);
        assert!(greedy(&EdgeList::new(), &mut store).is_empty());
    }

    #[test]
    fn single_edge_on_free_vertices() {
        let mut store = MateStore::dense(7);
        let m = greedy(&EdgeList::from_edges([e(A, B)]), &mut store);
        assert_eq!(m.edges().as_slice(), &[e(A, B)]);
        assert_eq!(store.peek(VertexId(A)), Some(VertexId(B)));
        assert_eq!(store.peek(VertexId(B)), Some(VertexId(A)));
    }

    #[test]
    fn difference_graph_of_worked_example() {
        // Order as produced by splitting the example graph.
        let g = EdgeList::from_edges([e(A, B), e(B, G), e(G, E), e(C, G), e(D, E)]);
        let mut store = MateStore::dense(7);
        let m = greedy(&g, &mut store);
        assert_eq!(m.edges().as_slice(), &[e(A, B), e(E, G)]);
        for v in [C, D, F] {
            assert_eq!(store.peek(VertexId(v)), None);
        }
    }

    #[test]
    fn edge_order_decides_the_result() {
        let g = EdgeList::from_edges([e(A, B), e(B, G), e(C, G), e(G, E), e(D, E)]);
        let mut store = MateStore::dense(7);
        let m = greedy(&g, &mut store);
        assert_eq!(m.edges().as_slice(), &[e(A, B), e(C, G), e(D, E)]);
    }

    #[test]
    fn respects_existing_mates() {
        let mut store = MateStore::dense(5);
        store.set(e(0, 1)).unwrap();
        let g = EdgeList::from_edges([e(1, 2), e(2, 3), e(3, 4)]);
        let m = greedy(&g, &mut store);
        assert_eq!(m.edges().as_slice(), &[e(2, 3)]);
        assert_eq!(store.peek(VertexId(1)), Some(VertexId(0)));
    }

    #[test]
    fn one_visit_per_edge() {
        let g = EdgeList::from_edges([e(0, 1), e(1, 2), e(2, 3)]);
        let mut store = MateStore::dense(4);
        let mut work = Work::default();
        greedy_counted(&g, &mut store, &mut work);
        assert_eq!(work.greedy_edge_visits, 3);
        assert_eq!(store.stats().gets, 5);
    }

    type Pairs = Vec<(u64, u64)>;

    fn arb_graph() -> impl Strategy<Value = (Pairs, Pairs)> {
        (
            proptest::collection::vec((0u64..10, 0u64..10), 0..40),
            proptest::collection::vec((0u64..10, 0u64..10), 0..4),
        )
    }

    proptest! {
        #[test]
        fn maximal_on_initially_free_vertices((edges, pre) in arb_graph()) {
            let g: EdgeList = edges.iter().filter_map(|&(u, v)| Edge::new(u, v).ok()).collect();
            let mut store = MateStore::dense(10);
            for (u, v) in pre {
                if let Ok(edge) = Edge::new(u, v) {
                    let _ = store.set(edge);
                }
            }
            let before: Vec<_> = (0..10).map(|v| store.peek(VertexId(v))).collect();
            let m = greedy(&g, &mut store);
            let again = {
                let mut s2 = MateStore::dense(10);
                for (v, mate) in before.iter().enumerate() {
                    if let Some(w) = mate {
                        if (v as u64) < w.0 { s2.set(Edge::new(v as u64, w.0).unwrap()).unwrap(); }
                    }
                }
                greedy(&g, &mut s2)
            };
            prop_assert_eq!(&m, &again);
            prop_assert!(Matching::new(m.edges().clone()).is_some());
            for x in m.edges() {
                prop_assert!(g.contains(x));
            }
            for (v, mate) in before.iter().enumerate() {
                if mate.is_some() {
                    prop_assert_eq!(store.peek(VertexId(v as u64)), *mate);
                }
            }
            for x in &g {
                prop_assert!(store.peek(x.a()).is_some() || store.peek(x.b()).is_some());
            }
        }
    }
}
