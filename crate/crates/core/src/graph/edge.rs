use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A vertex identifier. Dense universes use `0..n`, sparse ones any `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u64);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u64> for VertexId {
    fn from(v: u64) -> Self {
        VertexId(v)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An undirected edge, stored with its smaller endpoint first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    a: VertexId,
    b: VertexId,
}

impl Edge {
    /// Normalizes `(u, v)` so that `(u, v)` and `(v, u)` give the same edge.
    pub fn new(u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<Self> {
        let (u, v) = (u.into(), v.into());
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        Ok(Edge {
            a: u.min(v),
            b: u.max(v),
        })
    }

    #[inline]
    pub fn a(&self) -> VertexId {
        self.a
    }

    #[inline]
    pub fn b(&self) -> VertexId {
        self.b
    }

    #[inline]
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.a, self.b)
    }

    #[inline]
    pub fn touches(&self, v: VertexId) -> bool {
        self.a == v || self.b == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.a, self.b)
    }
}

/// Free-function form of [`Edge::new`].
pub fn make_edge(u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<Edge> {
    Edge::new(u, v)
}

/// An ordered list of distinct edges.
///
/// Membership tests scan the list, so `insert` and `remove` cost time
/// proportional to the current length. Bulk builders (`push_unchecked`,
/// `append`) are for callers that already know the edges are new.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeList {
    edges: Vec<Edge>,
}

impl EdgeList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        EdgeList {
            edges: Vec::with_capacity(cap),
        }
    }

    /// Builds a list from arbitrary edges, dropping later duplicates.
    pub fn from_edges<I: IntoIterator<Item = Edge>>(edges: I) -> Self {
        let mut seen = std::collections::HashSet::new();
        EdgeList {
            edges: edges.into_iter().filter(|e| seen.insert(*e)).collect(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &Edge) -> bool {
        self.edges.contains(e)
    }

    /// Appends `e` unless already present. Returns whether the list changed.
    pub fn insert(&mut self, e: Edge) -> bool {
        if self.contains(&e) {
            return false;
        }
        self.edges.push(e);
        true
    }

    /// Removes `e` if present, keeping the relative order of the rest.
    pub fn remove(&mut self, e: &Edge) -> bool {
        match self.edges.iter().position(|x| x == e) {
            Some(i) => {
                self.edges.remove(i);
                true
            }
            None => false,
        }
    }

    /// Appends without the membership scan. The caller guarantees `e` is absent.
    #[inline]
    pub fn push_unchecked(&mut self, e: Edge) {
        self.edges.push(e);
    }

    /// Concatenates `other` onto `self`. The two lists must be disjoint.
    pub fn append(&mut self, other: &mut EdgeList) {
        self.edges.append(&mut other.edges);
    }

    pub fn clear(&mut self) {
        self.edges.clear();
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edge> {
        self.edges.iter()
    }

    pub fn as_slice(&self) -> &[Edge] {
        &self.edges
    }

    /// Edges sorted, for order-insensitive comparison.
    pub fn sorted(&self) -> Vec<Edge> {
        let mut v = self.edges.clone();
        v.sort_unstable();
        v
    }

    pub(crate) fn take(&mut self) -> EdgeList {
        std::mem::take(self)
    }
}

impl<'a> IntoIterator for &'a EdgeList {
    type Item = &'a Edge;
    type IntoIter = std::slice::Iter<'a, Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.iter()
    }
}

impl IntoIterator for EdgeList {
    type Item = Edge;
    type IntoIter = std::vec::IntoIter<Edge>;

    fn into_iter(self) -> Self::IntoIter {
        self.edges.into_iter()
    }
}

impl FromIterator<Edge> for EdgeList {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> Self {
        EdgeList::from_edges(iter)
    }
}

/// Idempotent insert: returns `g` with `e` appended when it was absent.
pub fn edgelist_insert(mut g: EdgeList, e: Edge) -> EdgeList {
    g.insert(e);
    g
}

/// Idempotent delete: returns `g` without `e`, order preserved.
pub fn edgelist_delete(mut g: EdgeList, e: Edge) -> EdgeList {
    g.remove(&e);
    g
}

/// A set of edges with pairwise disjoint endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    edges: EdgeList,
}

impl Matching {
    /// Wraps `edges`, returning `None` if two edges share an endpoint.
    pub fn new(edges: EdgeList) -> Option<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if !seen.insert(e.a()) || !seen.insert(e.b()) {
                return None;
            }
        }
        Some(Matching { edges })
    }

    pub(crate) fn from_trusted(edges: EdgeList) -> Self {
        Matching { edges }
    }

    pub fn edges(&self) -> &EdgeList {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn sorted(&self) -> Vec<Edge> {
        self.edges.sorted()
    }

    pub fn into_edges(self) -> EdgeList {
        self.edges
    }
}
