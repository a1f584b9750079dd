//! Stream runner with CSV output, and the doubling-series scaling experiment.

use std::collections::HashSet;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::counters::OpCounters;
use crate::error::Error;
use crate::graph::{
    Edge, EdgeList, IndicatorStrategy, Matching, MateStore, MateStrategy, VertexId,
};
use crate::matcher::{Fault, Matcher, MatcherConfig, MatcherView, Observer, UpdateKind, UpdateOp};
use crate::reference::{
    check_maximal, check_maximal_in, check_valid_set, same_edge_set, Baseline, Violation,
};
use crate::stream::{generate, Stream, StreamEvent, WorkloadConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    Lookahead,
    Recompute,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lookahead => "lookahead",
            Algorithm::Recompute => "recompute",
        }
    }
}

/// CSV columns, in order.
pub const CSV_HEADER: &str = "stream_id,algorithm,indicator,mate,n,m_max,updates,wall_ns,amortized_ns,greedy_edge_visits,list_writes,indicator_ops,mate_ops,depth_max,setup_kind";

/// One row of benchmark output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub stream_id: String,
    pub algorithm: String,
    #[serde(rename = "indicator")]
    pub indicator_strategy: String,
    #[serde(rename = "mate")]
    pub mate_strategy: String,
    /// Declared vertex count, or `sparse`.
    pub n: String,
    pub m_max: u64,
    pub updates: u64,
    #[serde(rename = "wall_ns")]
    pub wall_time_ns_total: u64,
    #[serde(rename = "amortized_ns")]
    pub amortized_ns_per_update: f64,
    pub greedy_edge_visits: u64,
    pub list_writes: u64,
    pub indicator_ops: u64,
    pub mate_ops: u64,
    #[serde(rename = "depth_max")]
    pub recursion_depth_max: u64,
    pub setup_kind: String,
}

impl BenchRecord {
    /// Sum of the four work counters divided by the update count.
    pub fn amortized_work(&self) -> f64 {
        if self.updates == 0 {
            return 0.0;
        }
        (self.greedy_edge_visits + self.list_writes + self.indicator_ops + self.mate_ops) as f64
            / self.updates as f64
    }
}

/// Appends `records` to the CSV file at `path`, writing the header only when
/// the file is new or empty.
pub fn append_csv(path: &Path, records: &[BenchRecord]) -> std::io::Result<()> {
    let fresh = std::fs::metadata(path)
        .map(|m| m.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new().create(true).append(true).open(path)?;
    write_csv(file, records, fresh)
}

pub fn write_csv<W: Write>(out: W, records: &[BenchRecord], header: bool) -> std::io::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header)
        .from_writer(out);
    for r in records {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.flush()
}

/// How to run one stream.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub algorithm: Algorithm,
    pub mate: MateStrategy,
    pub indicator: IndicatorStrategy,
    pub threshold: usize,
    pub phase_override: Option<usize>,
    pub eager_setup: bool,
    /// Check every update against the recompute baseline.
    pub verify: bool,
    pub fault: Option<Fault>,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            algorithm: Algorithm::Lookahead,
            mate: MateStrategy::Dense,
            indicator: IndicatorStrategy::LazyMatrix,
            threshold: crate::matcher::DEFAULT_THRESHOLD,
            phase_override: None,
            eager_setup: false,
            verify: false,
            fault: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Input(#[from] Error),
    #[error("verification failed at update {update_index}: {violation}")]
    Verification {
        /// Zero-based index of the offending update in stream order.
        update_index: u64,
        violation: Violation,
    },
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: BenchRecord,
    pub counters: OpCounters,
    pub graph: EdgeList,
    pub matching: Matching,
    pub answers: Vec<(VertexId, Option<VertexId>)>,
}

// Queries grouped by how many updates precede them.
fn queries_by_position(stream: &Stream) -> Vec<Vec<VertexId>> {
    let mut at = vec![Vec::new()];
    for ev in &stream.events {
        match ev {
            StreamEvent::Query(u) => at.last_mut().expect("non-empty").push(*u),
            _ => at.push(Vec::new()),
        }
    }
    at
}

/// Oracle state kept alongside a verified run.
struct Referee {
    baseline: Baseline,
    present: HashSet<Edge>,
    failure: Option<(u64, Violation)>,
}

impl Referee {
    fn new(store: MateStore) -> Self {
        Referee {
            baseline: Baseline::new(store),
            present: HashSet::new(),
            failure: None,
        }
    }

    fn apply(&mut self, op: UpdateOp) {
        self.baseline.step(op);
        match op.kind {
            UpdateKind::Insert => self.present.insert(op.edge),
            UpdateKind::Delete => self.present.remove(&op.edge),
        };
    }

    fn check_baseline(&self) -> Result<(), Violation> {
        check_valid_set(self.baseline.store(), &self.present)?;
        check_maximal(self.baseline.graph(), self.baseline.store())
    }

    fn check_matcher(&self, view: &MatcherView<'_>) -> Result<(), Violation> {
        same_edge_set(view.edges(), view.edge_count(), &self.present)?;
        check_valid_set(view.store(), &self.present)?;
        check_maximal_in(view.edges(), view.store())?;
        view.check_ownership()
    }

    fn record(&mut self, index: u64, r: Result<(), Violation>) {
        if let (None, Err(v)) = (&self.failure, r) {
            self.failure = Some((index, v));
        }
    }
}

struct Harness<'q> {
    queries: Vec<Vec<VertexId>>,
    on_query: &'q mut dyn FnMut(VertexId, Option<VertexId>),
    answers: Vec<(VertexId, Option<VertexId>)>,
    referee: Option<Referee>,
    excluded: Duration,
}

impl Harness<'_> {
    fn answer(&mut self, pos: usize, ask: impl Fn(VertexId) -> Option<VertexId>) {
        if let Some(qs) = self.queries.get(pos) {
            for &u in qs {
                let a = ask(u);
                self.answers.push((u, a));
                (self.on_query)(u, a);
            }
        }
    }
}

impl Observer for Harness<'_> {
    fn after_update(&mut self, view: &MatcherView<'_>, op: &UpdateOp) {
        let pos = view.updates_processed();
        if let Some(referee) = &mut self.referee {
            let t0 = Instant::now();
            if referee.failure.is_none() {
                referee.apply(*op);
                let r = referee
                    .check_baseline()
                    .and_then(|_| referee.check_matcher(view));
                referee.record(pos - 1, r);
            }
            self.excluded += t0.elapsed();
        }
        self.answer(pos as usize, |u| view.mate_query(u).ok().flatten());
    }
}

fn check_range(stream: &Stream) -> Result<(), Error> {
    let Some(n) = stream.n else { return Ok(()) };
    for ev in &stream.events {
        let vs = match ev {
            StreamEvent::Insert(u, v) | StreamEvent::Delete(u, v) => [*u, *v],
            StreamEvent::Query(u) => [*u, *u],
        };
        if let Some(&vertex) = vs.iter().find(|v| v.0 >= n as u64) {
            return Err(Error::VertexOutOfRange { vertex, n });
        }
    }
    Ok(())
}

fn store_for(mate: MateStrategy, n: Option<usize>) -> Result<MateStore, Error> {
    MateStore::with_strategy(mate, n)
}

/// Runs `stream` with the selected algorithm, answering its queries through
/// `on_query` in stream order.
pub fn run_stream(
    stream: &Stream,
    stream_id: &str,
    opts: &RunOptions,
    on_query: &mut dyn FnMut(VertexId, Option<VertexId>),
) -> Result<RunOutcome, RunError> {
    check_range(stream)?;
    let updates: Vec<UpdateOp> = stream.updates().collect();
    let m_max = crate::stream::replay_m_max(updates.iter().copied()) as u64;
    let mut harness = Harness {
        queries: queries_by_position(stream),
        on_query,
        answers: Vec::new(),
        referee: None,
        excluded: Duration::ZERO,
    };
    if opts.verify {
        let store = match stream.n {
            Some(n) => MateStore::dense(n),
            None => MateStore::ordered_map(),
        };
        harness.referee = Some(Referee::new(store));
    }

    let (counters, graph, matching, wall, setup_kind, indicator_name) = match opts.algorithm {
        Algorithm::Lookahead => {
            let config = MatcherConfig {
                universe: stream.n,
                mate: opts.mate,
                indicator: opts.indicator,
                eager_setup: opts.eager_setup,
                threshold: opts.threshold,
                phase_override: opts.phase_override,
                fault: opts.fault,
            };
            let t0 = Instant::now();
            let mut matcher = Matcher::new(config)?;
            let store = matcher.store();
            harness.answer(0, |u| store.get(u).ok().flatten());
            matcher.run_stream(updates, &mut harness)?;
            let wall = t0.elapsed().saturating_sub(harness.excluded);
            (
                matcher.counters(),
                matcher.snapshot_graph(),
                matcher.snapshot_matching(),
                wall,
                matcher.setup_kind().name(),
                opts.indicator.name(),
            )
        }
        Algorithm::Recompute => {
            let t0 = Instant::now();
            let mut baseline = Baseline::new(store_for(opts.mate, stream.n)?);
            let store = baseline.store();
            harness.answer(0, |u| store.get(u).ok().flatten());
            for (i, op) in updates.iter().enumerate() {
                baseline.step(*op);
                if let Some(referee) = &mut harness.referee {
                    let t1 = Instant::now();
                    if referee.failure.is_none() {
                        referee.apply(*op);
                        let r = check_valid_set(baseline.store(), &referee.present)
                            .and_then(|_| check_maximal(baseline.graph(), baseline.store()))
                            .and_then(|_| {
                                same_edge_set(
                                    baseline.graph(),
                                    baseline.graph().len(),
                                    &referee.present,
                                )
                            });
                        referee.record(i as u64, r);
                    }
                    harness.excluded += t1.elapsed();
                }
                let store = baseline.store();
                harness.answer(i + 1, |u| store.get(u).ok().flatten());
            }
            let wall = t0.elapsed().saturating_sub(harness.excluded);
            (
                baseline.counters(),
                baseline.graph().clone(),
                baseline.matching(),
                wall,
                "lazy",
                "none",
            )
        }
    };

    if let Some((update_index, violation)) = harness.referee.and_then(|r| r.failure) {
        return Err(RunError::Verification {
            update_index,
            violation,
        });
    }

    let updates = counters.updates_processed;
    let wall_ns = wall.as_nanos() as u64;
    let record = BenchRecord {
        stream_id: stream_id.to_string(),
        algorithm: opts.algorithm.name().to_string(),
        indicator_strategy: indicator_name.to_string(),
        mate_strategy: opts.mate.name().to_string(),
        n: stream
            .n
            .map_or_else(|| "sparse".to_string(), |n| n.to_string()),
        m_max,
        updates,
        wall_time_ns_total: wall_ns,
        amortized_ns_per_update: if updates == 0 {
            0.0
        } else {
            wall_ns as f64 / updates as f64
        },
        greedy_edge_visits: counters.greedy_edge_visits,
        list_writes: counters.list_writes,
        indicator_ops: counters.indicator_ops,
        mate_ops: counters.mate_ops,
        recursion_depth_max: counters.recursion_depth_max,
        setup_kind: setup_kind.to_string(),
    };
    Ok(RunOutcome {
        record,
        counters,
        graph,
        matching,
        answers: harness.answers,
    })
}

/// Parameters of the doubling experiment.
#[derive(Debug, Clone)]
pub struct ScalingConfig {
    /// Target `log2(m_max)` of each workload.
    pub exponents: Vec<u32>,
    pub seed: u64,
    pub p_delete: f64,
    pub threshold: usize,
    /// Extra lookahead curve with these strategies, when not dense/matrix.
    pub extra: Option<(MateStrategy, IndicatorStrategy)>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            exponents: (10..=16).collect(),
            seed: 1,
            p_delete: 0.25,
            threshold: crate::matcher::DEFAULT_THRESHOLD,
            extra: None,
        }
    }
}

/// Insert-heavy workload whose graph grows to about `2^exp` edges: `2^(exp+1)`
/// updates with a quarter of them deletes, on enough vertices that the graph
/// stays below one eighth of all pairs.
pub fn scaling_workload(exp: u32, seed: u64, p_delete: f64) -> WorkloadConfig {
    let target = 1usize << exp;
    let updates = ((target as f64) / (1.0 - 2.0 * p_delete)).round() as usize;
    let n = ((16 * target) as f64).sqrt().ceil() as usize + 1;
    WorkloadConfig::new(n, updates, seed ^ u64::from(exp) << 32).with_p_delete(p_delete)
}

/// One workload of the doubling series.
#[derive(Debug, Clone)]
pub struct ScalingPoint {
    pub exponent: u32,
    pub m_max: u64,
    pub lookahead: BenchRecord,
    pub recompute: BenchRecord,
    pub extra: Option<BenchRecord>,
}

/// Least-squares fit `y ≈ a·x + b` and its worst relative residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub a: f64,
    pub b: f64,
    pub max_rel_residual: f64,
}

pub fn fit_linear(points: &[(f64, f64)]) -> LinearFit {
    let k = points.len() as f64;
    let (sx, sy) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &(x, y)| (sx + x, sy + y));
    let (mx, my) = (sx / k, sy / k);
    let sxx: f64 = points.iter().map(|&(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = points.iter().map(|&(x, y)| (x - mx) * (y - my)).sum();
    let a = if sxx == 0.0 { 0.0 } else { sxy / sxx };
    let b = my - a * mx;
    let max_rel_residual = points
        .iter()
        .map(|&(x, y)| ((a * x + b) - y).abs() / y.abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    LinearFit {
        a,
        b,
        max_rel_residual,
    }
}

/// Ratios `w[i+1] / w[i]` of consecutive amortized costs.
pub fn doubling_ratios(work: &[f64]) -> Vec<f64> {
    work.windows(2).map(|w| w[1] / w[0]).collect()
}

#[derive(Debug, Clone)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub lookahead_ratios: Vec<f64>,
    pub recompute_ratios: Vec<f64>,
    pub extra_ratios: Vec<f64>,
    /// Lookahead amortized work against `log2(m_max)`.
    pub lookahead_fit: LinearFit,
}

impl ScalingReport {
    pub fn records(&self) -> Vec<BenchRecord> {
        self.points
            .iter()
            .flat_map(|p| {
                [Some(&p.lookahead), Some(&p.recompute), p.extra.as_ref()]
                    .into_iter()
                    .flatten()
                    .cloned()
            })
            .collect()
    }
}

/// Generates each workload and runs every curve on it, in parallel.
pub fn run_scaling(cfg: &ScalingConfig) -> Result<ScalingReport, RunError> {
    let streams: Vec<(u32, Stream)> = cfg
        .exponents
        .iter()
        .map(|&exp| {
            Ok((
                exp,
                generate(&scaling_workload(exp, cfg.seed, cfg.p_delete))?,
            ))
        })
        .collect::<Result<_, Error>>()?;

    let mut variants = vec![
        (
            Algorithm::Lookahead,
            MateStrategy::Dense,
            IndicatorStrategy::LazyMatrix,
        ),
        (
            Algorithm::Recompute,
            MateStrategy::Dense,
            IndicatorStrategy::LazyMatrix,
        ),
    ];
    if let Some((mate, ind)) = cfg.extra {
        variants.push((Algorithm::Lookahead, mate, ind));
    }
    let jobs: Vec<(usize, usize)> = (0..streams.len())
        .flat_map(|s| (0..variants.len()).map(move |v| (s, v)))
        .collect();
    let results: Vec<((usize, usize), BenchRecord)> = jobs
        .into_par_iter()
        .map(|(s, v)| {
            let (exp, stream) = &streams[s];
            let (algorithm, mate, indicator) = variants[v];
            let opts = RunOptions {
                algorithm,
                mate,
                indicator,
                threshold: cfg.threshold,
                ..RunOptions::default()
            };
            let id = format!("scale-2^{exp}");
            run_stream(stream, &id, &opts, &mut |_, _| {}).map(|o| ((s, v), o.record))
        })
        .collect::<Result<_, _>>()?;

    let pick = |s: usize, v: usize| {
        results
            .iter()
            .find(|((s2, v2), _)| *s2 == s && *v2 == v)
            .map(|(_, r)| r.clone())
    };
    let points: Vec<ScalingPoint> = streams
        .iter()
        .enumerate()
        .map(|(s, (exp, _))| {
            let lookahead = pick(s, 0).expect("lookahead run");
            ScalingPoint {
                exponent: *exp,
                m_max: lookahead.m_max,
                recompute: pick(s, 1).expect("recompute run"),
                extra: pick(s, 2),
                lookahead,
            }
        })
        .collect();

    let la: Vec<f64> = points
        .iter()
        .map(|p| p.lookahead.amortized_work())
        .collect();
    let re: Vec<f64> = points
        .iter()
        .map(|p| p.recompute.amortized_work())
        .collect();
    let ex: Vec<f64> = points
        .iter()
        .filter_map(|p| p.extra.as_ref().map(BenchRecord::amortized_work))
        .collect();
    let fit_points: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((p.m_max.max(1) as f64).log2(), p.lookahead.amortized_work()))
        .collect();
    Ok(ScalingReport {
        lookahead_ratios: doubling_ratios(&la),
        recompute_ratios: doubling_ratios(&re),
        extra_ratios: doubling_ratios(&ex),
        lookahead_fit: fit_linear(&fit_points),
        points,
    })
}
