use std::cell::Cell;
use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Edge;
use crate::error::{Error, Result};

/// Backing representation of an [`EdgeIndicator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IndicatorStrategy {
    /// Bit matrix over a dense universe, one bit per unordered pair.
    LazyMatrix,
    /// Balanced search tree of the edges currently set.
    OrderedSet,
}

impl IndicatorStrategy {
    pub fn name(self) -> &'static str {
        match self {
            IndicatorStrategy::LazyMatrix => "matrix",
            IndicatorStrategy::OrderedSet => "set",
        }
    }
}

/// How the backing storage was brought to the all-zero state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetupKind {
    /// Zero-filled pages from the allocator, or no backing at all.
    Lazy,
    /// An explicit pass over all n² cells.
    EagerN2,
}

impl SetupKind {
    pub fn name(self) -> &'static str {
        match self {
            SetupKind::Lazy => "lazy",
            SetupKind::EagerN2 => "eager-n2",
        }
    }
}

/// Counters of an edge indicator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorStats {
    pub sets: u64,
    pub tests: u64,
    pub clears: u64,
    /// Key comparisons inside the ordered set. Zero for the matrix.
    pub comparisons: u64,
    /// Work units: one per matrix access, or the comparisons of each set
    /// operation (at least one).
    pub cost: u64,
    pub setup_ops: u64,
}

/// Refuse matrices above 2^34 bits (2 GiB).
const MAX_MATRIX_BITS: u128 = 1 << 34;

thread_local! {
    static SET_COMPARISONS: Cell<u64> = const { Cell::new(0) };
}

// Edge wrapper whose comparisons are tallied in a thread-local.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Tallied(Edge);

impl Ord for Tallied {
    fn cmp(&self, other: &Self) -> Ordering {
        SET_COMPARISONS.with(|c| c.set(c.get() + 1));
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Tallied {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn tallied<R>(f: impl FnOnce() -> R) -> (R, u64) {
    let before = SET_COMPARISONS.with(Cell::get);
    let r = f();
    (r, SET_COMPARISONS.with(Cell::get) - before)
}

#[derive(Debug, Clone)]
enum Cells {
    Matrix { n: usize, bits: Vec<u64> },
    Set(BTreeSet<Tallied>),
}

/// Phase-local edge membership tester.
///
/// The matcher sets the edges of a batch, splits its list against them and
/// clears the same edges again, so outside of that window every edge tests
/// false. `live` tracks how many edges are currently set, which makes the
/// all-zero check O(1).
#[derive(Debug, Clone)]
pub struct EdgeIndicator {
    cells: Cells,
    live: usize,
    setup: SetupKind,
    stats: IndicatorStats,
}

impl EdgeIndicator {
    /// Matrix over `0..n`. The bit vector comes from a zeroed allocation, so
    /// no clearing pass is run or counted.
    pub fn lazy_matrix(n: usize) -> Result<Self> {
        let words = matrix_words(n)?;
        Ok(EdgeIndicator {
            cells: Cells::Matrix {
                n,
                bits: vec![0u64; words],
            },
            live: 0,
            setup: SetupKind::Lazy,
            stats: IndicatorStats::default(),
        })
    }

    /// Matrix over `0..n` cleared by an explicit, counted pass over all n² cells.
    pub fn eager_matrix(n: usize) -> Result<Self> {
        let words = matrix_words(n)?;
        let bits = vec![0u64; words];
        let mut ind = EdgeIndicator {
            cells: Cells::Matrix { n, bits },
            live: 0,
            setup: SetupKind::EagerN2,
            stats: IndicatorStats::default(),
        };
        ind.stats.setup_ops = (n as u64).saturating_mul(n as u64);
        Ok(ind)
    }

    pub fn ordered_set() -> Self {
        EdgeIndicator {
            cells: Cells::Set(BTreeSet::new()),
            live: 0,
            setup: SetupKind::Lazy,
            stats: IndicatorStats::default(),
        }
    }

    pub fn with_strategy(strategy: IndicatorStrategy, n: Option<usize>) -> Result<Self> {
        match (strategy, n) {
            (IndicatorStrategy::LazyMatrix, Some(n)) => EdgeIndicator::lazy_matrix(n),
            (IndicatorStrategy::LazyMatrix, None) => Err(Error::Config(
                "matrix indicator needs a declared vertex count".into(),
            )),
            (IndicatorStrategy::OrderedSet, _) => Ok(EdgeIndicator::ordered_set()),
        }
    }

    pub fn strategy(&self) -> IndicatorStrategy {
        match self.cells {
            Cells::Matrix { .. } => IndicatorStrategy::LazyMatrix,
            Cells::Set(_) => IndicatorStrategy::OrderedSet,
        }
    }

    pub fn setup_kind(&self) -> SetupKind {
        self.setup
    }

    pub fn set(&mut self, e: Edge) {
        self.stats.sets += 1;
        let fresh = match &mut self.cells {
            Cells::Matrix { n, bits } => {
                self.stats.cost += 1;
                let (w, mask) = bit_of(*n, e);
                let fresh = bits[w] & mask == 0;
                bits[w] |= mask;
                fresh
            }
            Cells::Set(set) => {
                let (fresh, cmps) = tallied(|| set.insert(Tallied(e)));
                self.stats.comparisons += cmps;
                self.stats.cost += cmps.max(1);
                fresh
            }
        };
        if fresh {
            self.live += 1;
        }
    }

    pub fn test(&mut self, e: Edge) -> bool {
        self.stats.tests += 1;
        match &self.cells {
            Cells::Matrix { n, bits } => {
                self.stats.cost += 1;
                let (w, mask) = bit_of(*n, e);
                bits[w] & mask != 0
            }
            Cells::Set(set) => {
                let (hit, cmps) = tallied(|| set.contains(&Tallied(e)));
                self.stats.comparisons += cmps;
                self.stats.cost += cmps.max(1);
                hit
            }
        }
    }

    pub fn clear(&mut self, e: Edge) {
        self.stats.clears += 1;
        let was = match &mut self.cells {
            Cells::Matrix { n, bits } => {
                self.stats.cost += 1;
                let (w, mask) = bit_of(*n, e);
                let was = bits[w] & mask != 0;
                bits[w] &= !mask;
                was
            }
            Cells::Set(set) => {
                let (was, cmps) = tallied(|| set.remove(&Tallied(e)));
                self.stats.comparisons += cmps;
                self.stats.cost += cmps.max(1);
                was
            }
        };
        if was {
            self.live -= 1;
        }
    }

    /// Uncounted membership test, for instrumentation.
    pub fn probe(&self, e: Edge) -> bool {
        match &self.cells {
            Cells::Matrix { n, bits } => {
                let (w, mask) = bit_of(*n, e);
                bits.get(w).is_some_and(|word| word & mask != 0)
            }
            Cells::Set(set) => SET_COMPARISONS.with(|c| {
                let before = c.get();
                let hit = set.contains(&Tallied(e));
                c.set(before);
                hit
            }),
        }
    }

    /// Whether no edge is currently set.
    pub fn is_all_zero(&self) -> bool {
        self.live == 0
    }

    pub fn live(&self) -> usize {
        self.live
    }

    pub fn stats(&self) -> IndicatorStats {
        self.stats
    }
}

fn matrix_words(n: usize) -> Result<usize> {
    let bits = (n as u128) * (n as u128);
    if bits > MAX_MATRIX_BITS {
        return Err(Error::Config(format!(
            "matrix indicator for n = {n} needs {bits} bits; use the ordered-set indicator"
        )));
    }
    Ok((bits as usize).div_ceil(64).max(1))
}

#[inline]
fn bit_of(n: usize, e: Edge) -> (usize, u64) {
    let idx = e.a().index() * n + e.b().index();
    (idx / 64, 1u64 << (idx % 64))
}

pub fn indicator_set(t: &mut EdgeIndicator, e: Edge) {
    t.set(e)
}

pub fn indicator_test(t: &mut EdgeIndicator, e: Edge) -> bool {
    t.test(e)
}

pub fn indicator_clear(t: &mut EdgeIndicator, e: Edge) {
    t.clear(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(u: u64, v: u64) -> Edge {
        Edge::new(u, v).unwrap()
    }

    fn all() -> Vec<EdgeIndicator> {
        vec![
            EdgeIndicator::lazy_matrix(8).unwrap(),
            EdgeIndicator::eager_matrix(8).unwrap(),
            EdgeIndicator::ordered_set(),
        ]
    }

    #[test]
    fn point_updates() {
        for mut t in all() {
            assert!(!t.test(e(1, 2)));
            t.set(e(1, 2));
            assert!(t.test(e(1, 2)));
            assert!(t.test(e(2, 1)));
            assert!(!t.test(e(1, 3)));
            t.clear(e(1, 2));
            assert!(!t.test(e(1, 2)));
            assert!(t.is_all_zero());
        }
    }

    #[test]
    fn setup_kinds() {
        let lazy = EdgeIndicator::lazy_matrix(100).unwrap();
        assert_eq!(lazy.setup_kind(), SetupKind::Lazy);
        assert_eq!(lazy.stats().setup_ops, 0);
        let eager = EdgeIndicator::eager_matrix(100).unwrap();
        assert_eq!(eager.setup_kind(), SetupKind::EagerN2);
        assert_eq!(eager.stats().setup_ops, 10_000);
        assert_eq!(EdgeIndicator::ordered_set().stats().setup_ops, 0);
    }

    #[test]
    fn oversized_matrix_is_refused() {
        assert!(matches!(
            EdgeIndicator::lazy_matrix(1 << 20),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn double_set_counts_once() {
        let mut t = EdgeIndicator::ordered_set();
        t.set(e(0, 1));
        t.set(e(0, 1));
        assert_eq!(t.live(), 1);
        t.clear(e(0, 1));
        t.clear(e(0, 1));
        assert_eq!(t.live(), 0);
    }

    #[test]
    fn probe_is_uncounted() {
        let mut t = EdgeIndicator::ordered_set();
        t.set(e(0, 1));
        let before = t.stats();
        assert!(t.probe(e(0, 1)));
        assert_eq!(t.stats(), before);
    }

    proptest! {
        #[test]
        fn strategies_agree(ops in proptest::collection::vec((0u8..3, 0u64..9, 0u64..9), 0..200)) {
            let mut m = EdgeIndicator::lazy_matrix(9).unwrap();
            let mut s = EdgeIndicator::ordered_set();
            for (op, u, v) in ops {
                let Ok(edge) = Edge::new(u, v) else { continue };
                match op {
                    0 => { m.set(edge); s.set(edge); }
                    1 => { m.clear(edge); s.clear(edge); }
                    _ => prop_assert_eq!(m.test(edge), s.test(edge)),
                }
                prop_assert_eq!(m.live(), s.live());
            }
        }
    }
}
