//! Line-oriented update-stream format and the seeded workload generator.
//!
//! ```text
//! # comment
//! n 7          optional header, first non-comment line: dense universe 0..7
//! + 0 1        insert edge
//! - 0 1        delete edge
//! ? 0          query mate(0)
//! ```
//!
//! Without a header the stream is sparse and any vertex id is allowed.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, VertexId};
use crate::matcher::{UpdateKind, UpdateOp};

/// One record of a stream file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StreamEvent {
    Insert(VertexId, VertexId),
    Delete(VertexId, VertexId),
    Query(VertexId),
}

impl StreamEvent {
    /// The update this event stands for, or `None` for a query.
    pub fn update(&self) -> Option<UpdateOp> {
        match *self {
            StreamEvent::Insert(u, v) => Some(UpdateOp {
                kind: UpdateKind::Insert,
                edge: Edge::new(u, v).ok()?,
            }),
            StreamEvent::Delete(u, v) => Some(UpdateOp {
                kind: UpdateKind::Delete,
                edge: Edge::new(u, v).ok()?,
            }),
            StreamEvent::Query(_) => None,
        }
    }
}

/// A parsed stream: the declared universe (if any) and its events.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stream {
    pub n: Option<usize>,
    pub events: Vec<StreamEvent>,
}

impl Stream {
    pub fn updates(&self) -> impl Iterator<Item = UpdateOp> + '_ {
        self.events.iter().filter_map(StreamEvent::update)
    }

    pub fn update_count(&self) -> usize {
        self.events
            .iter()
            .filter(|e| !matches!(e, StreamEvent::Query(_)))
            .count()
    }

    /// Largest edge count reached while replaying the updates.
    pub fn m_max(&self) -> usize {
        replay_m_max(self.updates())
    }
}

/// Largest graph size over the replay of `updates` from an empty graph.
pub fn replay_m_max(updates: impl IntoIterator<Item = UpdateOp>) -> usize {
    let mut g = HashSet::new();
    let mut best = 0;
    for op in updates {
        match op.kind {
            UpdateKind::Insert => {
                g.insert(op.edge);
            }
            UpdateKind::Delete => {
                g.remove(&op.edge);
            }
        }
        best = best.max(g.len());
    }
    best
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_vertex(tok: Option<&str>, line: usize, n: Option<usize>) -> Result<VertexId> {
    let tok = tok.ok_or_else(|| parse_error(line, "missing vertex"))?;
    let v: u64 = tok
        .parse()
        .map_err(|_| parse_error(line, format!("bad vertex id {tok:?}")))?;
    if let Some(n) = n {
        if v >= n as u64 {
            return Err(parse_error(
                line,
                Error::VertexOutOfRange {
                    vertex: VertexId(v),
                    n,
                }
                .to_string(),
            ));
        }
    }
    Ok(VertexId(v))
}

/// Parses the stream grammar. Errors carry 1-based line numbers.
pub fn parse_stream(text: &str) -> Result<Stream> {
    let mut stream = Stream::default();
    let mut seen_record = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let tag = toks.next().unwrap_or_default();
        let event = match tag {
            "n" => {
                if seen_record {
                    return Err(parse_error(line, "header must be the first record"));
                }
                let tok = toks
                    .next()
                    .ok_or_else(|| parse_error(line, "missing vertex count"))?;
                let n = tok
                    .parse()
                    .map_err(|_| parse_error(line, format!("bad vertex count {tok:?}")))?;
                stream.n = Some(n);
                seen_record = true;
                if toks.next().is_some() {
                    return Err(parse_error(line, "trailing fields"));
                }
                continue;
            }
            "+" | "-" => {
                let u = parse_vertex(toks.next(), line, stream.n)?;
                let v = parse_vertex(toks.next(), line, stream.n)?;
                if u == v {
                    return Err(parse_error(line, Error::SelfLoop(u).to_string()));
                }
                if tag == "+" {
                    StreamEvent::Insert(u, v)
                } else {
                    StreamEvent::Delete(u, v)
                }
            }
            "?" => StreamEvent::Query(parse_vertex(toks.next(), line, stream.n)?),
            other => return Err(parse_error(line, format!("unknown record {other:?}"))),
        };
        if toks.next().is_some() {
            return Err(parse_error(line, "trailing fields"));
        }
        seen_record = true;
        stream.events.push(event);
    }
    Ok(stream)
}

/// Writes `stream` in the exact grammar `parse_stream` reads.
pub fn serialize_stream(stream: &Stream) -> String {
    let mut out = String::with_capacity(stream.events.len() * 12 + 16);
    if let Some(n) = stream.n {
        let _ = writeln!(out, "n {n}");
    }
    for ev in &stream.events {
        let _ = match ev {
            StreamEvent::Insert(u, v) => writeln!(out, "+ {u} {v}"),
            StreamEvent::Delete(u, v) => writeln!(out, "- {u} {v}"),
            StreamEvent::Query(u) => writeln!(out, "? {u}"),
        };
    }
    out
}

/// Parameters of a generated workload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadConfig {
    pub n: usize,
    pub updates: usize,
    pub seed: u64,
    /// Chance that an update deletes a present edge (when any exist).
    pub p_delete: f64,
    /// Expected queries after each update, in `[0, 10]`.
    pub query_rate: f64,
    /// Chance that an update is replaced by an idempotent no-op: inserting a
    /// present edge or deleting an absent one.
    pub noop_rate: f64,
}

impl WorkloadConfig {
    pub fn new(n: usize, updates: usize, seed: u64) -> Self {
        WorkloadConfig {
            n,
            updates,
            seed,
            p_delete: 0.0,
            query_rate: 0.0,
            noop_rate: 0.0,
        }
    }

    pub fn with_p_delete(mut self, p: f64) -> Self {
        self.p_delete = p;
        self
    }

    pub fn with_query_rate(mut self, rate: f64) -> Self {
        self.query_rate = rate;
        self
    }

    /// Injects no-ops in roughly one update out of ten.
    pub fn with_noops(mut self, on: bool) -> Self {
        self.noop_rate = if on { 0.1 } else { 0.0 };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(0.0..=1.0).contains(&self.p_delete) {
            return bad("p_delete must be in [0, 1]");
        }
        if !(0.0..=10.0).contains(&self.query_rate) {
            return bad("query_rate must be in [0, 10]");
        }
        if !(0.0..=1.0).contains(&self.noop_rate) {
            return bad("noop_rate must be in [0, 1]");
        }
        if self.n < 2 && self.updates > 0 {
            return bad("need at least two vertices to generate updates");
        }
        Ok(())
    }
}

/// Present edges with O(1) uniform sampling and removal.
#[derive(Default)]
struct TrackedGraph {
    edges: Vec<Edge>,
    index: HashMap<Edge, usize>,
}

impl TrackedGraph {
    fn contains(&self, e: &Edge) -> bool {
        self.index.contains_key(e)
    }

    fn insert(&mut self, e: Edge) {
        if !self.index.contains_key(&e) {
            self.index.insert(e, self.edges.len());
            self.edges.push(e);
        }
    }

    fn remove(&mut self, e: &Edge) {
        if let Some(i) = self.index.remove(e) {
            self.edges.swap_remove(i);
            if let Some(moved) = self.edges.get(i) {
                self.index.insert(*moved, i);
            }
        }
    }
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> Edge {
    let u = rng.gen_range(0..n as u64);
    let mut v = rng.gen_range(0..n as u64 - 1);
    if v >= u {
        v += 1;
    }
    Edge::new(u, v).expect("distinct endpoints")
}

/// Generates a reproducible workload.
///
/// The generator is ChaCha8 seeded with `seed` through `seed_from_u64`;
/// integers are drawn with `gen_range`, coin flips with `gen_bool`
/// (rand 0.8). Inserts pick a uniformly random absent pair (or repeat a
/// present edge once the graph is complete); deletes pick a uniformly random
/// present edge. Exactly `cfg.updates` update events are emitted.
pub fn generate(cfg: &WorkloadConfig) -> Result<Stream> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = cfg.n;
    let pairs = n * n.saturating_sub(1) / 2;
    let mut g = TrackedGraph::default();
    let mut events = Vec::with_capacity(cfg.updates);
    let whole = cfg.query_rate.floor() as u32;
    let frac = cfg.query_rate - cfg.query_rate.floor();

    for _ in 0..cfg.updates {
        let noop = cfg.noop_rate > 0.0 && rng.gen_bool(cfg.noop_rate);
        let delete = !g.edges.is_empty() && cfg.p_delete > 0.0 && rng.gen_bool(cfg.p_delete);
        let ev = if noop {
            if delete || g.edges.len() == pairs {
                let e = g.edges[rng.gen_range(0..g.edges.len())];
                StreamEvent::Insert(e.b(), e.a())
            } else {
                let mut e = random_pair(&mut rng, n);
                while g.contains(&e) {
                    e = random_pair(&mut rng, n);
                }
                StreamEvent::Delete(e.a(), e.b())
            }
        } else if delete {
            let e = g.edges[rng.gen_range(0..g.edges.len())];
            g.remove(&e);
            StreamEvent::Delete(e.a(), e.b())
        } else if g.edges.len() == pairs {
            let e = g.edges[rng.gen_range(0..g.edges.len())];
            StreamEvent::Insert(e.a(), e.b())
        } else {
            let mut e = random_pair(&mut rng, n);
            while g.contains(&e) {
                e = random_pair(&mut rng, n);
            }
            g.insert(e);
            if rng.gen_bool(0.5) {
                StreamEvent::Insert(e.b(), e.a())
            } else {
                StreamEvent::Insert(e.a(), e.b())
            }
        };
        events.push(ev);

        let mut queries = whole;
        if frac > 0.0 && rng.gen_bool(frac) {
            queries += 1;
        }
        for _ in 0..queries {
            events.push(StreamEvent::Query(VertexId(rng.gen_range(0..n as u64))));
        }
    }
    Ok(Stream { n: Some(n), events })
}
