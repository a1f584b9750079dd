//! Python bindings for the matcher and the stream tooling.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lookahead_matching::bench::{self, Algorithm, RunError, RunOptions};
use lookahead_matching::{
    Edge, EdgeList, Error, IndicatorStrategy, MatcherConfig, MateStore, MateStrategy, OpCounters,
    StreamEvent, UpdateOp, VertexId, WorkloadConfig,
};

create_exception!(lookahead_matching, VerificationError, PyException);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::VertexOutOfRange { .. } => PyIndexError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn pair(e: &Edge) -> (u64, u64) {
    (e.a().0, e.b().0)
}

fn mate_strategy(name: &str) -> PyResult<MateStrategy> {
    match name {
        "dense" => Ok(MateStrategy::Dense),
        "map" => Ok(MateStrategy::OrderedMap),
        _ => Err(PyValueError::new_err(format!(
            "unknown mate strategy {name:?}"
        ))),
    }
}

fn indicator_strategy(name: &str) -> PyResult<IndicatorStrategy> {
    match name {
        "matrix" => Ok(IndicatorStrategy::LazyMatrix),
        "set" => Ok(IndicatorStrategy::OrderedSet),
        _ => Err(PyValueError::new_err(format!(
            "unknown indicator strategy {name:?}"
        ))),
    }
}

fn counters_dict<'py>(py: Python<'py>, c: &OpCounters) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("updates_processed", c.updates_processed)?;
    d.set_item("greedy_edge_visits", c.greedy_edge_visits)?;
    d.set_item("list_writes", c.list_writes)?;
    d.set_item("indicator_ops", c.indicator_ops)?;
    d.set_item("mate_ops", c.mate_ops)?;
    d.set_item("recursion_depth_max", c.recursion_depth_max)?;
    d.set_item("mate_gets", c.mate_gets)?;
    d.set_item("mate_comparisons", c.mate_comparisons)?;
    d.set_item("setup_ops", c.setup_ops)?;
    d.set_item("single_phases", c.single_phases)?;
    d.set_item("batch_phases", c.batch_phases)?;
    d.set_item("lookahead_max", c.lookahead_max)?;
    d.set_item("total_work", c.total_work())?;
    Ok(d)
}

/// Maximal matching maintained under edge insertions and deletions.
///
/// Updates are buffered by `insert`/`delete` and processed by `run`, which
/// may look ahead over everything buffered so far.
#[pyclass(name = "Matcher", unsendable)]
struct PyMatcher {
    inner: lookahead_matching::Matcher,
}

#[pymethods]
impl PyMatcher {
    #[new]
    #[pyo3(signature = (n=None, *, mate=None, indicator=None, threshold=42, phase_override=None, eager_setup=false, edges=None))]
    fn new(
        n: Option<usize>,
        mate: Option<&str>,
        indicator: Option<&str>,
        threshold: usize,
        phase_override: Option<usize>,
        eager_setup: bool,
        edges: Option<Vec<(u64, u64)>>,
    ) -> PyResult<Self> {
        let base = match n {
            Some(n) => MatcherConfig::dense(n),
            None => MatcherConfig::sparse(),
        };
        let mate = match mate {
            Some(m) => mate_strategy(m)?,
            None => base.mate,
        };
        let indicator = match indicator {
            Some(i) => indicator_strategy(i)?,
            None => base.indicator,
        };
        let config = base
            .with_strategies(mate, indicator)
            .with_threshold(threshold)
            .with_phase_override(phase_override)
            .with_eager_setup(eager_setup);
        let initial = edges
            .unwrap_or_default()
            .into_iter()
            .map(|(u, v)| Edge::new(u, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?;
        let inner = lookahead_matching::Matcher::with_graph(config, initial).map_err(py_err)?;
        Ok(PyMatcher { inner })
    }

    /// Buffers the insertion of edge (u, v).
    fn insert(&mut self, u: u64, v: u64) -> PyResult<()> {
        self.inner.insert(u, v).map_err(py_err)
    }

    /// Buffers the deletion of edge (u, v).
    fn delete(&mut self, u: u64, v: u64) -> PyResult<()> {
        self.inner.delete(u, v).map_err(py_err)
    }

    /// Buffers a list of `("+" | "-", u, v)` updates and runs them.
    fn apply(&mut self, updates: Vec<(String, u64, u64)>) -> PyResult<()> {
        for (kind, u, v) in updates {
            let op = match kind.as_str() {
                "+" => UpdateOp::insert(u, v),
                "-" => UpdateOp::delete(u, v),
                _ => {
                    return Err(PyValueError::new_err(format!(
                        "unknown update kind {kind:?}"
                    )))
                }
            }
            .map_err(py_err)?;
            self.inner.push_update(op).map_err(py_err)?;
        }
        self.run()
    }

    /// Processes every buffered update.
    fn run(&mut self) -> PyResult<()> {
        self.inner.run_until_buffer_consumed().map_err(py_err)
    }

    /// Mate of `u`, or None.
    fn mate(&self, u: u64) -> PyResult<Option<u64>> {
        Ok(self.inner.mate_query(u).map_err(py_err)?.map(|v| v.0))
    }

    fn graph(&self) -> Vec<(u64, u64)> {
        self.inner
            .snapshot_graph()
            .sorted()
            .iter()
            .map(pair)
            .collect()
    }

    fn matching(&self) -> Vec<(u64, u64)> {
        self.inner
            .snapshot_matching()
            .sorted()
            .iter()
            .map(pair)
            .collect()
    }

    fn counters<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        counters_dict(py, &self.inner.counters())
    }

    #[getter]
    fn pending(&self) -> usize {
        self.inner.pending()
    }

    #[getter]
    fn setup_kind(&self) -> &'static str {
        self.inner.setup_kind().name()
    }

    fn __len__(&self) -> usize {
        self.inner.view().edge_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Matcher(edges={}, matched={}, pending={})",
            self.inner.view().edge_count(),
            self.inner.snapshot_matching().len(),
            self.inner.pending()
        )
    }
}

/// Greedy maximal matching of `edges` taken in the given order.
#[pyfunction]
fn greedy(edges: Vec<(u64, u64)>) -> PyResult<Vec<(u64, u64)>> {
    let list = EdgeList::from_edges(
        edges
            .into_iter()
            .map(|(u, v)| Edge::new(u, v))
            .collect::<Result<Vec<_>, _>>()
            .map_err(py_err)?,
    );
    let mut store = MateStore::ordered_map();
    let m = lookahead_matching::greedy(&list, &mut store);
    Ok(m.edges().iter().map(pair).collect())
}

/// Seeded random update stream, returned as stream-file text.
#[pyfunction]
#[pyo3(signature = (n, updates, seed=0, p_delete=0.3, query_rate=0.0, allow_noop=false))]
fn generate(
    n: usize,
    updates: usize,
    seed: u64,
    p_delete: f64,
    query_rate: f64,
    allow_noop: bool,
) -> PyResult<String> {
    let cfg = WorkloadConfig::new(n, updates, seed)
        .with_p_delete(p_delete)
        .with_query_rate(query_rate)
        .with_noops(allow_noop);
    let stream = lookahead_matching::generate(&cfg).map_err(py_err)?;
    Ok(lookahead_matching::serialize_stream(&stream))
}

/// Parses stream text into `(n, events)`. Each event is a `(kind, u, v)`
/// tuple where `v` is None for `?` queries.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn parse_stream(text: &str) -> PyResult<(Option<usize>, Vec<(&'static str, u64, Option<u64>)>)> {
    let s = lookahead_matching::parse_stream(text).map_err(py_err)?;
    let events = s
        .events
        .iter()
        .map(|ev| match *ev {
            StreamEvent::Insert(u, v) => ("+", u.0, Some(v.0)),
            StreamEvent::Delete(u, v) => ("-", u.0, Some(v.0)),
            StreamEvent::Query(u) => ("?", u.0, None),
        })
        .collect();
    Ok((s.n, events))
}

/// Runs stream text through one algorithm. Returns the benchmark record as a
/// dict, with the query answers under `"answers"`.
#[pyfunction]
#[pyo3(signature = (text, mode="lookahead", *, mate=None, indicator=None, threshold=42, phase_override=None, verify=false, stream_id="stream"))]
#[allow(clippy::too_many_arguments)]
fn run_stream<'py>(
    py: Python<'py>,
    text: &str,
    mode: &str,
    mate: Option<&str>,
    indicator: Option<&str>,
    threshold: usize,
    phase_override: Option<usize>,
    verify: bool,
    stream_id: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let stream = lookahead_matching::parse_stream(text).map_err(py_err)?;
    let dense = stream.n.is_some();
    let algorithm = match mode {
        "lookahead" => Algorithm::Lookahead,
        "recompute" => Algorithm::Recompute,
        _ => return Err(PyValueError::new_err(format!("unknown mode {mode:?}"))),
    };
    let opts = RunOptions {
        algorithm,
        mate: match mate {
            Some(m) => mate_strategy(m)?,
            None if dense => MateStrategy::Dense,
            None => MateStrategy::OrderedMap,
        },
        indicator: match indicator {
            Some(i) => indicator_strategy(i)?,
            None if dense => IndicatorStrategy::LazyMatrix,
            None => IndicatorStrategy::OrderedSet,
        },
        threshold,
        phase_override,
        verify,
        ..RunOptions::default()
    };
    let outcome =
        bench::run_stream(&stream, stream_id, &opts, &mut |_, _| {}).map_err(|e| match e {
            RunError::Input(e) => py_err(e),
            e @ RunError::Verification { .. } => VerificationError::new_err(e.to_string()),
        })?;
    let r = &outcome.record;
    let d = PyDict::new(py);
    d.set_item("stream_id", &r.stream_id)?;
    d.set_item("algorithm", &r.algorithm)?;
    d.set_item("indicator", &r.indicator_strategy)?;
    d.set_item("mate", &r.mate_strategy)?;
    d.set_item("n", &r.n)?;
    d.set_item("m_max", r.m_max)?;
    d.set_item("updates", r.updates)?;
    d.set_item("wall_ns", r.wall_time_ns_total)?;
    d.set_item("amortized_ns", r.amortized_ns_per_update)?;
    d.set_item("greedy_edge_visits", r.greedy_edge_visits)?;
    d.set_item("list_writes", r.list_writes)?;
    d.set_item("indicator_ops", r.indicator_ops)?;
    d.set_item("mate_ops", r.mate_ops)?;
    d.set_item("depth_max", r.recursion_depth_max)?;
    d.set_item("setup_kind", &r.setup_kind)?;
    let answers: Vec<(u64, Option<u64>)> = outcome
        .answers
        .iter()
        .map(|(u, a)| (u.0, a.map(|v: VertexId| v.0)))
        .collect();
    d.set_item("answers", answers)?;
    d.set_item(
        "matching",
        outcome
            .matching
            .sorted()
            .iter()
            .map(pair)
            .collect::<Vec<_>>(),
    )?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "lookahead_matching")]
fn lookahead_matching_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMatcher>()?;
    m.add_function(wrap_pyfunction!(greedy, m)?)?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(parse_stream, m)?)?;
    m.add_function(wrap_pyfunction!(run_stream, m)?)?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    m.add(
        "DEFAULT_THRESHOLD",
        lookahead_matching::matcher::DEFAULT_THRESHOLD,
    )?;
    Ok(())
}
