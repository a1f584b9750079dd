use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::{Edge, VertexId};
use crate::error::{Error, LogicError, Result};

/// Backing representation of a [`MateStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MateStrategy {
    /// One slot per vertex of a declared universe `0..n`. O(1) access, O(n) setup.
    Dense,
    /// Sorted map holding only matched vertices. O(log m) access, O(1) setup.
    OrderedMap,
}

impl MateStrategy {
    pub fn name(self) -> &'static str {
        match self {
            MateStrategy::Dense => "dense",
            MateStrategy::OrderedMap => "map",
        }
    }
}

/// Access counters of a mate store.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MateStats {
    pub gets: u64,
    pub sets: u64,
    pub clears: u64,
    /// Key comparisons made by the ordered map. Always zero for dense stores.
    pub comparisons: u64,
    /// Work units: one per dense slot access, or the comparisons of each map
    /// search (at least one per search).
    pub cost: u64,
    pub setup_ops: u64,
}

#[derive(Debug, Clone)]
enum Slots {
    Dense(Vec<Option<VertexId>>),
    // Sorted by key; each matched vertex appears once as a key.
    Map(Vec<(VertexId, VertexId)>),
}

/// The global vertex-to-mate mapping shared by every recursion level.
///
/// Reads go through [`MateStore::get`], which counts the access; the
/// uncounted [`MateStore::peek`] is for checkers that must not disturb the
/// cost measurements.
#[derive(Debug, Clone)]
pub struct MateStore {
    slots: Slots,
    gets: Cell<u64>,
    comparisons: Cell<u64>,
    cost: Cell<u64>,
    sets: u64,
    clears: u64,
    setup_ops: u64,
}

impl MateStore {
    /// Dense store over `0..n`; every slot is cleared in one counted pass.
    pub fn dense(n: usize) -> Self {
        let mut slots = Vec::with_capacity(n);
        slots.resize(n, None);
        MateStore::with_slots(Slots::Dense(slots), n as u64)
    }

    pub fn ordered_map() -> Self {
        MateStore::with_slots(Slots::Map(Vec::new()), 0)
    }

    pub fn with_strategy(strategy: MateStrategy, n: Option<usize>) -> Result<Self> {
        match (strategy, n) {
            (MateStrategy::Dense, Some(n)) => Ok(MateStore::dense(n)),
            (MateStrategy::Dense, None) => Err(Error::Config(
                "dense mate store needs a declared vertex count".into(),
            )),
            (MateStrategy::OrderedMap, _) => Ok(MateStore::ordered_map()),
        }
    }

    fn with_slots(slots: Slots, setup_ops: u64) -> Self {
        MateStore {
            slots,
            gets: Cell::new(0),
            comparisons: Cell::new(0),
            cost: Cell::new(0),
            sets: 0,
            clears: 0,
            setup_ops,
        }
    }

    pub fn strategy(&self) -> MateStrategy {
        match self.slots {
            Slots::Dense(_) => MateStrategy::Dense,
            Slots::Map(_) => MateStrategy::OrderedMap,
        }
    }

    /// Declared universe size for dense stores.
    pub fn universe(&self) -> Option<usize> {
        match &self.slots {
            Slots::Dense(v) => Some(v.len()),
            Slots::Map(_) => None,
        }
    }

    pub fn check_vertex(&self, u: VertexId) -> Result<()> {
        match &self.slots {
            Slots::Dense(v) if u.0 >= v.len() as u64 => Err(Error::VertexOutOfRange {
                vertex: u,
                n: v.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Current mate of `u`, counting the access.
    pub fn get(&self, u: VertexId) -> Result<Option<VertexId>> {
        self.check_vertex(u)?;
        Ok(self.lookup(u))
    }

    /// Counted read without the range check; out-of-range reads yield `None`.
    pub(crate) fn lookup(&self, u: VertexId) -> Option<VertexId> {
        self.gets.set(self.gets.get() + 1);
        match &self.slots {
            Slots::Dense(v) => {
                self.charge(1);
                v.get(u.index()).copied().flatten()
            }
            Slots::Map(entries) => {
                let (found, cmps) = search(entries, u);
                self.charge_search(cmps);
                found.ok().map(|i| entries[i].1)
            }
        }
    }

    /// Uncounted read.
    pub fn peek(&self, u: VertexId) -> Option<VertexId> {
        match &self.slots {
            Slots::Dense(v) => v.get(u.index()).copied().flatten(),
            Slots::Map(entries) => search(entries, u).0.ok().map(|i| entries[i].1),
        }
    }

    /// Mates both endpoints of `e` with each other.
    pub fn set(&mut self, e: Edge) -> Result<(), LogicError> {
        let (a, b) = e.endpoints();
        if self.peek(a).is_some() {
            return Err(LogicError::AlreadyMated(e, a));
        }
        if self.peek(b).is_some() {
            return Err(LogicError::AlreadyMated(e, b));
        }
        self.sets += 1;
        self.write(a, Some(b));
        self.write(b, Some(a));
        Ok(())
    }

    /// Unmates both endpoints of `e`; they must currently be mated to each other.
    pub fn clear(&mut self, e: Edge) -> Result<(), LogicError> {
        let (a, b) = e.endpoints();
        if self.peek(a) != Some(b) || self.peek(b) != Some(a) {
            return Err(LogicError::NotMated(e));
        }
        self.clears += 1;
        self.write(a, None);
        self.write(b, None);
        Ok(())
    }

    /// Writes one direction only, bypassing the symmetry preconditions.
    /// For fault injection and checker tests.
    #[doc(hidden)]
    pub fn force_one_sided(&mut self, u: VertexId, mate: Option<VertexId>) {
        self.write(u, mate);
    }

    fn write(&mut self, u: VertexId, mate: Option<VertexId>) {
        match &mut self.slots {
            Slots::Dense(v) => {
                v[u.index()] = mate;
                self.cost.set(self.cost.get() + 1);
            }
            Slots::Map(entries) => {
                let (found, cmps) = search(entries, u);
                match (found, mate) {
                    (Ok(i), Some(m)) => entries[i].1 = m,
                    (Ok(i), None) => {
                        entries.remove(i);
                    }
                    (Err(i), Some(m)) => entries.insert(i, (u, m)),
                    (Err(_), None) => {}
                }
                self.charge_search(cmps);
            }
        }
    }

    fn charge(&self, units: u64) {
        self.cost.set(self.cost.get() + units);
    }

    fn charge_search(&self, cmps: u64) {
        self.comparisons.set(self.comparisons.get() + cmps);
        self.charge(cmps.max(1));
    }

    /// Every `(u, mate(u))` with a non-null mate. Each matched pair shows up
    /// twice, once from each side.
    pub fn mated(&self) -> Box<dyn Iterator<Item = (VertexId, VertexId)> + '_> {
        match &self.slots {
            Slots::Dense(v) => Box::new(
                v.iter()
                    .enumerate()
                    .filter_map(|(i, m)| m.map(|m| (VertexId(i as u64), m))),
            ),
            Slots::Map(entries) => Box::new(entries.iter().copied()),
        }
    }

    /// Number of vertices that currently have a mate.
    pub fn mated_count(&self) -> usize {
        match &self.slots {
            Slots::Dense(v) => v.iter().filter(|m| m.is_some()).count(),
            Slots::Map(entries) => entries.len(),
        }
    }

    pub fn stats(&self) -> MateStats {
        MateStats {
            gets: self.gets.get(),
            sets: self.sets,
            clears: self.clears,
            comparisons: self.comparisons.get(),
            cost: self.cost.get(),
            setup_ops: self.setup_ops,
        }
    }
}

// Three-way binary search; at most floor(log2 k) + 1 comparisons on k keys.
fn search(entries: &[(VertexId, VertexId)], key: VertexId) -> (Result<usize, usize>, u64) {
    let (mut lo, mut hi) = (0, entries.len());
    let mut cmps = 0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        cmps += 1;
        match entries[mid].0.cmp(&key) {
            std::cmp::Ordering::Less => lo = mid + 1,
            std::cmp::Ordering::Greater => hi = mid,
            std::cmp::Ordering::Equal => return (Ok(mid), cmps),
        }
    }
    (Err(lo), cmps)
}

/// Current mate of `u` or `None`.
pub fn mate_get(store: &MateStore, u: VertexId) -> Result<Option<VertexId>> {
    store.get(u)
}

pub fn mate_set(store: &mut MateStore, e: Edge) -> Result<(), LogicError> {
    store.set(e)
}

pub fn mate_clear(store: &mut MateStore, e: Edge) -> Result<(), LogicError> {
    store.clear(e)
}
