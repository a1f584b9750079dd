#![allow(dead_code)]

use std::collections::hash_map::DefaultHasher;
use std::collections::HashSet;
use std::hash::{Hash, Hasher};

use lookahead_matching::reference::{check_maximal_in, check_valid_set, same_edge_set};
use lookahead_matching::{
    check_maximal, Baseline, Edge, IndicatorStrategy, Matcher, MatcherConfig, MatcherView,
    MateStore, MateStrategy, Observer, UpdateKind, UpdateOp, VertexId, WorkloadConfig,
};

pub const A: u64 = 0;
pub const B: u64 = 1;
pub const C: u64 = 2;
pub const D: u64 = 3;
pub const E: u64 = 4;
pub const F: u64 = 5;
pub const G: u64 = 6;

pub fn e(u: u64, v: u64) -> Edge {
    Edge::new(u, v).unwrap()
}

/// Initial graph of the worked example, in its listed order.
pub fn example_graph() -> Vec<Edge> {
    vec![e(A, B), e(B, G), e(A, F), e(G, E), e(C, G), e(D, E)]
}

pub fn example_updates() -> Vec<UpdateOp> {
    vec![
        UpdateOp::insert(F, G).unwrap(),
        UpdateOp::delete(A, F).unwrap(),
        UpdateOp::insert(D, C).unwrap(),
    ]
}

pub fn sorted(mut v: Vec<Edge>) -> Vec<Edge> {
    v.sort();
    v
}

/// The 200 seeded streams of the differential suite, cycling through every
/// combination of the workload parameters.
pub fn differential_streams() -> Vec<WorkloadConfig> {
    (0..200u64)
        .map(|i| {
            let n = [10, 50, 200][(i % 3) as usize];
            let updates = [1_000, 10_000][((i / 3) % 2) as usize];
            let p = [0.0, 0.3, 0.6][((i / 6) % 3) as usize];
            let noop = (i / 18) % 2 == 1;
            WorkloadConfig::new(n, updates, 0xd1ff + i)
                .with_p_delete(p)
                .with_noops(noop)
        })
        .collect()
}

/// Tiny deterministic generator for sampling inside observers.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, k: u64) -> u64 {
        self.next() % k
    }
}

/// What a full audit found, beyond the first violation.
#[derive(Debug, Default, Clone)]
pub struct AuditReport {
    pub failure: Option<String>,
    pub updates: u64,
    pub boundaries: u64,
    pub probes: u64,
    pub m_max: usize,
    pub queries: u64,
    /// Largest number of mate gets spent on one query.
    pub worst_query_gets: u64,
    /// Largest `comparisons - bound` seen on one query (map stores only).
    pub worst_query_slack: i64,
    pub digests: Vec<u64>,
}

/// Observer that replays every update on the recompute baseline and checks
/// the matcher against it, samples the indicator at phase boundaries and
/// measures query cost.
pub struct Audit {
    baseline: Baseline,
    present: HashSet<Edge>,
    universe: u64,
    pool: Vec<Edge>,
    rng: SplitMix,
    /// Also run the library checkers and the level ownership check every
    /// this many updates (0 disables).
    pub ownership_every: u64,
    /// Record a digest of graph and matching after each update.
    pub keep_digests: bool,
    pub sample_size: usize,
    /// Last seen (phase key, graph, matching) digest of each parent level.
    parents: Vec<Option<(Vec<u64>, u64)>>,
    present_bits: Vec<bool>,
    seen: Vec<u32>,
    matched: Vec<u32>,
    pub check_isolation: bool,
    pub report: AuditReport,
}

impl Audit {
    pub fn new(n: usize, seed: u64) -> Self {
        let mut rng = SplitMix(seed);
        let pool = (0..4096)
            .filter_map(|_| Edge::new(rng.below(n as u64), rng.below(n as u64)).ok())
            .collect();
        Audit {
            baseline: Baseline::new(MateStore::dense(n)),
            present: HashSet::new(),
            universe: n as u64,
            pool,
            rng,
            ownership_every: 1,
            keep_digests: false,
            sample_size: 1000,
            parents: Vec::new(),
            present_bits: vec![false; n * n],
            seen: vec![0; n * n],
            matched: vec![0; n],
            check_isolation: false,
            report: AuditReport::default(),
        }
    }

    fn fail(&mut self, what: String) {
        if self.report.failure.is_none() {
            self.report.failure = Some(format!("update {}: {what}", self.report.updates));
        }
    }

    fn pair(&self, e: &Edge) -> usize {
        (e.a().0 * self.universe + e.b().0) as usize
    }

    fn check(&mut self, view: &MatcherView<'_>) {
        let stamp = self.report.updates as u32;
        // Same edge set: right size, every edge present, no edge twice.
        if view.edge_count() != self.present.len() {
            return self.fail(format!(
                "graph sizes differ: {} vs {}",
                view.edge_count(),
                self.present.len()
            ));
        }
        for e in view.edges() {
            let k = self.pair(e);
            if !self.present_bits[k] || self.seen[k] == stamp {
                return self.fail(format!("edge {e} present in only one of the two graphs"));
            }
            self.seen[k] = stamp;
        }
        let base = self.baseline.graph();
        if base.len() != self.present.len() || base.iter().any(|e| !self.present_bits[self.pair(e)])
        {
            return self.fail("recompute graph drifted from the update sequence".into());
        }
        // Valid: symmetric mates joined by present edges.
        let store = view.store();
        for (u, v) in store.mated() {
            if store.peek(v) != Some(u) {
                return self.fail(format!("symmetry broken at {u}"));
            }
            let k = self.pair(&e(u.0, v.0));
            if !self.present_bits[k] {
                return self.fail(format!(
                    "matched pair ({u},{v}) is not an edge of the graph"
                ));
            }
            self.matched[u.index()] = stamp;
        }
        // Maximal: no edge with both endpoints free.
        for e in view.edges() {
            if self.matched[e.a().index()] != stamp && self.matched[e.b().index()] != stamp {
                return self.fail(format!("edge {e} has two unmatched endpoints"));
            }
        }
        if self.ownership_every > 0 && self.report.updates.is_multiple_of(self.ownership_every) {
            let r = check_valid_set(view.store(), &self.present)
                .and_then(|_| check_maximal_in(view.edges(), view.store()))
                .and_then(|_| same_edge_set(view.edges(), view.edge_count(), &self.present))
                .and_then(|_| check_valid_set(self.baseline.store(), &self.present))
                .and_then(|_| check_maximal(self.baseline.graph(), self.baseline.store()))
                .and_then(|_| view.check_ownership());
            if let Err(v) = r {
                self.fail(v.to_string());
            }
        }
    }

    fn measure_query(&mut self, view: &MatcherView<'_>) {
        let u = VertexId(self.rng.below(self.universe));
        let store = view.store();
        let before = store.stats();
        let _ = view.mate_query(u);
        let after = store.stats();
        let gets = after.gets - before.gets;
        self.report.queries += 1;
        self.report.worst_query_gets = self.report.worst_query_gets.max(gets);
        if store.strategy() == MateStrategy::OrderedMap {
            let comparisons = (after.comparisons - before.comparisons) as i64;
            let bound = ((2 * self.report.m_max.max(1)) as f64).log2().ceil() as i64;
            self.report.worst_query_slack = self.report.worst_query_slack.max(comparisons - bound);
        }
    }

    fn isolation(&mut self, view: &MatcherView<'_>) {
        let frames = view.frames();
        let mut key = Vec::new();
        for (j, f) in frames.iter().enumerate() {
            key.push(f.phase());
            if j + 1 == frames.len() {
                break;
            }
            let dig = digest(f.graph().iter(), f.matching().iter());
            if self.parents.len() <= j {
                self.parents.resize(j + 1, None);
            }
            if let Some((k, d)) = &self.parents[j] {
                if *k == key && *d != dig {
                    self.fail(format!("level {j} changed while its child was running"));
                }
            }
            self.parents[j] = Some((key.clone(), dig));
        }
    }

    pub fn finish(self) -> AuditReport {
        self.report
    }
}

impl Observer for Audit {
    fn after_update(&mut self, view: &MatcherView<'_>, op: &UpdateOp) {
        self.report.updates += 1;
        self.baseline.step(*op);
        let k = self.pair(&op.edge);
        match op.kind {
            UpdateKind::Insert => self.present.insert(op.edge),
            UpdateKind::Delete => self.present.remove(&op.edge),
        };
        self.present_bits[k] = op.kind == UpdateKind::Insert;
        self.report.m_max = self.report.m_max.max(self.present.len());
        if self.report.failure.is_none() {
            self.check(view);
        }
        self.measure_query(view);
        if self.check_isolation {
            self.isolation(view);
        }
        if self.keep_digests {
            let mut g: Vec<Edge> = view.edges().copied().collect();
            g.sort();
            let m = view.matching().sorted();
            self.report.digests.push(digest(g.iter(), m.iter()));
        }
    }

    fn at_phase_boundary(&mut self, view: &MatcherView<'_>) {
        self.report.boundaries += 1;
        let ind = view.indicator();
        if !ind.is_all_zero() {
            self.fail(format!(
                "indicator holds {} entries at a phase boundary",
                ind.live()
            ));
            return;
        }
        let start = self.rng.below(self.pool.len() as u64) as usize;
        for i in 0..self.sample_size.min(self.pool.len()) {
            let edge = self.pool[(start + i) % self.pool.len()];
            self.report.probes += 1;
            if ind.probe(edge) {
                self.fail(format!("indicator set for {edge} at a phase boundary"));
                return;
            }
        }
    }
}

pub fn digest<'a>(
    graph: impl Iterator<Item = &'a Edge>,
    matching: impl Iterator<Item = &'a Edge>,
) -> u64 {
    let mut h = DefaultHasher::new();
    for e in graph {
        e.hash(&mut h);
    }
    0xffu8.hash(&mut h);
    for e in matching {
        e.hash(&mut h);
    }
    h.finish()
}

/// Runs `updates` through a fresh matcher under `audit`.
pub fn audited_run(
    config: MatcherConfig,
    updates: Vec<UpdateOp>,
    mut audit: Audit,
) -> (Matcher, AuditReport) {
    let mut m = Matcher::new(config).unwrap();
    m.run_stream(updates, &mut audit).unwrap();
    (m, audit.finish())
}

pub fn config(n: usize, mate: MateStrategy, indicator: IndicatorStrategy) -> MatcherConfig {
    MatcherConfig::dense(n).with_strategies(mate, indicator)
}
