//! Python bindings for the meshflow core.
//!
//! Exact values cross the boundary as `fractions.Fraction`.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use meshflow::graph::{generate_random_topology, min_hop_distance, parse_topology, serialize_topology};
use meshflow::mtm::mtm_path_with;
use meshflow::optimizer::{throughput as throughput_of, validate};
use meshflow::oracle::{best_over_orderings, check_constraints_literal, OracleBudget};
use meshflow::rational::{format_decimal, format_fraction, parse_rational};
use meshflow::{BaselineScheduling, ConnectivityGraph, Error, NodeId, Rational, TopologySpec};

create_exception!(meshflow, MeshflowError, PyRuntimeError);
create_exception!(meshflow, NoPathError, MeshflowError);
create_exception!(meshflow, BudgetExceededError, MeshflowError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NoPath(..) => NoPathError::new_err(e.to_string()),
        Error::BudgetExceeded(_) => BudgetExceededError::new_err(e.to_string()),
        Error::Parse(_) | Error::UnknownNode(_) | Error::SameNode(_) | Error::MissingLink(..) => {
            PyValueError::new_err(e.to_string())
        }
        _ => MeshflowError::new_err(e.to_string()),
    }
}

fn fraction<'py>(py: Python<'py>, value: &Rational) -> PyResult<Bound<'py, PyAny>> {
    py.import("fractions")?
        .getattr("Fraction")?
        .call1((format_fraction(value),))
}

/// Accepts ints, `Fraction`s, decimal floats and `"p/q"` strings.
fn rational(value: &Bound<'_, PyAny>) -> PyResult<Rational> {
    let text = value.str()?.to_string();
    parse_rational(&text).ok_or_else(|| PyValueError::new_err(format!("not a rational number: {text}")))
}

#[pyclass(name = "Topology", module = "meshflow", frozen)]
struct PyTopology {
    graph: ConnectivityGraph,
}

#[pymethods]
impl PyTopology {
    /// `edges` holds `(u, v, capacity)` triples for undirected links.
    #[new]
    fn new(node_count: usize, edges: Vec<(usize, usize, Bound<'_, PyAny>)>) -> PyResult<Self> {
        let edges = edges
            .iter()
            .map(|(u, v, c)| Ok((*u, *v, rational(c)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let graph = ConnectivityGraph::from_edges(node_count, edges).map_err(to_py)?;
        Ok(PyTopology { graph })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyTopology {
            graph: parse_topology(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (nodes, links, seed, cap_min=5, cap_max=15, cap_step=1, require_connected=true))]
    fn generate(
        nodes: usize,
        links: usize,
        seed: u64,
        cap_min: u64,
        cap_max: u64,
        cap_step: u64,
        require_connected: bool,
    ) -> PyResult<Self> {
        let spec = TopologySpec {
            node_count: nodes,
            target_directed_link_count: links,
            cap_min,
            cap_max,
            cap_step,
            seed,
            require_connected,
        };
        spec.validate().map_err(to_py)?;
        Ok(PyTopology {
            graph: generate_random_topology(&spec).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serialize_topology(&self.graph).map_err(to_py)
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Directed links, twice the number of edges.
    #[getter]
    fn link_count(&self) -> usize {
        self.graph.link_count()
    }

    fn edges<'py>(&self, py: Python<'py>) -> PyResult<Vec<(usize, usize, Bound<'py, PyAny>)>> {
        self.graph
            .edges()
            .map(|(u, v, c)| Ok((u.0, v.0, fraction(py, c)?)))
            .collect()
    }

    fn capacity<'py>(&self, py: Python<'py>, u: usize, v: usize) -> PyResult<Option<Bound<'py, PyAny>>> {
        self.graph
            .capacity(NodeId(u), NodeId(v))
            .map(|c| fraction(py, c))
            .transpose()
    }

    fn is_connected(&self) -> bool {
        self.graph.is_connected()
    }

    fn min_hop_distance(&self, source: usize, destination: usize) -> PyResult<Option<usize>> {
        min_hop_distance(&self.graph, NodeId(source), NodeId(destination)).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "Topology(nodes={}, links={})",
            self.graph.node_count(),
            self.graph.link_count()
        )
    }
}

#[pyclass(name = "Solution", module = "meshflow", frozen)]
struct PySolution {
    inner: meshflow::Solution,
}

#[pymethods]
impl PySolution {
    /// Reads the text produced by [`dump`](Self::dump).
    #[staticmethod]
    fn parse(text: &str, topology: &PyTopology) -> PyResult<Self> {
        Ok(PySolution {
            inner: meshflow::Solution::parse_dump(text, &topology.graph).map_err(to_py)?,
        })
    }

    #[getter]
    fn source(&self) -> usize {
        self.inner.source.0
    }

    #[getter]
    fn destination(&self) -> usize {
        self.inner.destination.0
    }

    /// Node sequence of each accepted path, in acceptance order.
    #[getter]
    fn paths(&self) -> Vec<Vec<usize>> {
        self.inner
            .paths
            .iter()
            .map(|p| p.nodes().into_iter().map(|n| n.0).collect())
            .collect()
    }

    #[getter]
    fn bottlenecks<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyAny>>> {
        self.inner.paths.iter().map(|p| fraction(py, &p.bottleneck)).collect()
    }

    #[getter]
    fn throughput<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.throughput)
    }

    #[getter]
    fn frame_duration<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        fraction(py, &self.inner.total_duration())
    }

    #[getter]
    fn slot_count(&self) -> usize {
        self.inner.schedule.len()
    }

    /// `(slot id, duration, [(from, to, flow), ...])` per slot, in frame order.
    #[allow(clippy::type_complexity)]
    fn slots<'py>(
        &self,
        py: Python<'py>,
    ) -> PyResult<Vec<(u32, Bound<'py, PyAny>, Vec<(usize, usize, Bound<'py, PyAny>)>)>> {
        self.inner
            .schedule
            .slots()
            .iter()
            .map(|s| {
                let allocations = s
                    .allocations
                    .iter()
                    .map(|a| Ok((a.from.0, a.to.0, fraction(py, &a.flow)?)))
                    .collect::<PyResult<Vec<_>>>()?;
                Ok((s.id.0, fraction(py, &s.duration)?, allocations))
            })
            .collect()
    }

    fn dump(&self) -> String {
        self.inner.dump()
    }

    /// Violations reported by the main validator, as text.
    fn validate(&self, topology: &PyTopology) -> Vec<String> {
        validate(&self.inner, &topology.graph)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// Violations reported by the independent literal checker, as text.
    fn check_literal(&self, topology: &PyTopology) -> Vec<String> {
        check_constraints_literal(&self.inner, &topology.graph)
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Solution(paths={}, throughput={} Mbps)",
            self.inner.paths.len(),
            format_decimal(&self.inner.throughput, 3)
        )
    }
}

#[pyclass(name = "MtmResult", module = "meshflow", frozen, get_all)]
struct PyMtmResult {
    path: Vec<usize>,
    medium_time_per_bit: Py<PyAny>,
    throughput: Py<PyAny>,
}

#[pymethods]
impl PyMtmResult {
    fn __repr__(&self) -> String {
        format!("MtmResult(path={:?})", self.path)
    }
}

fn baseline(no_reuse: bool) -> BaselineScheduling {
    if no_reuse {
        BaselineScheduling::NoReuse
    } else {
        BaselineScheduling::SpatialReuse
    }
}

/// Greedy multipath solution from `source` to `destination`.
#[pyfunction]
fn solve(py: Python<'_>, topology: &PyTopology, source: usize, destination: usize) -> PyResult<PySolution> {
    let graph = &topology.graph;
    let inner = py
        .detach(|| meshflow::solve_multipath(graph, NodeId(source), NodeId(destination)))
        .map_err(to_py)?;
    Ok(PySolution { inner })
}

/// Minimum medium time single path and its scheduled throughput.
#[pyfunction]
#[pyo3(signature = (topology, source, destination, no_reuse=false))]
fn mtm(
    py: Python<'_>,
    topology: &PyTopology,
    source: usize,
    destination: usize,
    no_reuse: bool,
) -> PyResult<PyMtmResult> {
    let r = mtm_path_with(&topology.graph, NodeId(source), NodeId(destination), baseline(no_reuse)).map_err(to_py)?;
    Ok(PyMtmResult {
        path: r.path.nodes().into_iter().map(|n| n.0).collect(),
        medium_time_per_bit: fraction(py, &r.medium_time_per_bit)?.unbind(),
        throughput: fraction(py, &r.throughput)?.unbind(),
    })
}

/// `(multipath, mtm, ratio)` throughputs.
#[pyfunction]
#[pyo3(signature = (topology, source, destination, no_reuse=false))]
fn compare<'py>(
    py: Python<'py>,
    topology: &PyTopology,
    source: usize,
    destination: usize,
    no_reuse: bool,
) -> PyResult<(Bound<'py, PyAny>, Bound<'py, PyAny>, Bound<'py, PyAny>)> {
    let (s, d) = (NodeId(source), NodeId(destination));
    let graph = &topology.graph;
    let multi = py.detach(|| meshflow::solve_multipath(graph, s, d)).map_err(to_py)?;
    let single = mtm_path_with(graph, s, d, baseline(no_reuse)).map_err(to_py)?;
    let ratio = &multi.throughput / &single.throughput;
    Ok((
        fraction(py, &multi.throughput)?,
        fraction(py, &single.throughput)?,
        fraction(py, &ratio)?,
    ))
}

/// Best final throughput over orderings of up to `max_paths` distinct paths.
#[pyfunction]
#[pyo3(signature = (topology, source, destination, max_nodes=12, max_paths=4))]
fn oracle_best<'py>(
    py: Python<'py>,
    topology: &PyTopology,
    source: usize,
    destination: usize,
    max_nodes: usize,
    max_paths: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let budget = OracleBudget {
        max_nodes,
        max_paths_considered: max_paths,
        ..OracleBudget::default()
    };
    let graph = &topology.graph;
    let best = py
        .detach(|| best_over_orderings(graph, NodeId(source), NodeId(destination), &budget))
        .map_err(to_py)?;
    fraction(py, &best)
}

/// Megabits per frame over frame seconds, exactly.
#[pyfunction]
fn throughput<'py>(
    py: Python<'py>,
    megabits: &Bound<'py, PyAny>,
    seconds: &Bound<'py, PyAny>,
) -> PyResult<Bound<'py, PyAny>> {
    let tp = throughput_of(&rational(megabits)?, &rational(seconds)?).map_err(to_py)?;
    fraction(py, &tp)
}

/// Fixed-point rendering, rounded half away from zero.
#[pyfunction]
#[pyo3(signature = (value, places=3))]
fn format_mbps(value: &Bound<'_, PyAny>, places: u32) -> PyResult<String> {
    Ok(format_decimal(&rational(value)?, places))
}

#[pymodule(name = "meshflow")]
pub fn meshflow_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add_class::<PyTopology>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyMtmResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(mtm, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_best, m)?)?;
    m.add_function(wrap_pyfunction!(throughput, m)?)?;
    m.add_function(wrap_pyfunction!(format_mbps, m)?)?;
    m.add("MeshflowError", py.get_type::<MeshflowError>())?;
    m.add("NoPathError", py.get_type::<NoPathError>())?;
    m.add("BudgetExceededError", py.get_type::<BudgetExceededError>())?;
    Ok(())
}
