//! Python bindings: graph/schedule instance types and one-call solvers.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use swo::coloring::{
    self, colors_used, is_proper, BlameVariant, ColoringConfig, Graph as CoreGraph,
};
use swo::sched::{
    self, GenParams, Objective, SchedDomain, SchedInstance as CoreInstance,
};
use swo::{blame_sort, run, sticky_sort, BlameVector, EngineConfig, Prioritizer, PrioritySequence, Restart, SwoRng};

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn engine_config(
    seed: u64,
    iterations: usize,
    restart_cutoff: Option<usize>,
    noise: f64,
    prioritizer: &str,
) -> PyResult<EngineConfig> {
    let mut cfg = EngineConfig::new(seed);
    cfg.max_iterations = iterations;
    cfg.restart = match restart_cutoff {
        None => Restart::HalfN,
        Some(0) => Restart::Off,
        Some(c) => Restart::Every(c),
    };
    cfg.noise = noise;
    cfg.prioritizer = match prioritizer {
        "sticky" => Prioritizer::Sticky,
        "sort" => Prioritizer::BlameSort,
        other => return Err(value_err(format!("prioritizer must be sticky|sort, got '{other}'"))),
    };
    Ok(cfg)
}

/// An undirected graph for the coloring domain.
#[pyclass(name = "Graph", skip_from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: CoreGraph,
}

#[pymethods]
impl PyGraph {
    /// Builds a graph from `node_count` and an edge list of (u, v) pairs.
    #[new]
    fn new(node_count: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= node_count || v >= node_count) {
            return Err(value_err(format!("edge ({u}, {v}) out of range")));
        }
        Ok(Self {
            inner: CoreGraph::from_edges(node_count, &edges),
        })
    }

    #[getter]
    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    fn degree(&self, v: usize) -> PyResult<usize> {
        if v >= self.inner.node_count() {
            return Err(value_err(format!("node {v} out of range")));
        }
        Ok(self.inner.degree(v))
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        if v >= self.inner.node_count() {
            return Err(value_err(format!("node {v} out of range")));
        }
        Ok(self.inner.neighbors(v).to_vec())
    }

    /// True when `colors[v] != colors[w]` for every edge (v, w).
    fn is_proper(&self, colors: Vec<usize>) -> PyResult<bool> {
        if colors.len() != self.inner.node_count() {
            return Err(value_err("colors length must equal node count"));
        }
        Ok(is_proper(&self.inner, &colors))
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(nodes={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// Parses DIMACS .col text into a Graph.
#[pyfunction]
fn parse_dimacs(text: &str) -> PyResult<PyGraph> {
    Ok(PyGraph {
        inner: coloring::parse_dimacs(text).map_err(value_err)?,
    })
}

/// A parallel-line scheduling instance.
#[pyclass(name = "SchedInstance", skip_from_py_object)]
#[derive(Clone)]
struct PySchedInstance {
    inner: CoreInstance,
}

#[pymethods]
impl PySchedInstance {
    /// Loads an instance from its JSON text form.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: sched::instance_from_json(text).map_err(value_err)?,
        })
    }

    fn to_json(&self) -> String {
        sched::instance_to_json(&self.inner)
    }

    #[getter]
    fn task_count(&self) -> usize {
        self.inner.task_count()
    }

    #[getter]
    fn line_count(&self) -> usize {
        self.inner.line_count
    }

    fn __repr__(&self) -> String {
        format!(
            "SchedInstance(tasks={}, lines={})",
            self.inner.task_count(),
            self.inner.line_count
        )
    }
}

/// Generates a random feasible scheduling instance.
#[pyfunction]
#[pyo3(signature = (tasks, lines, seed=0, compat_density=0.5))]
fn generate_sched(
    tasks: usize,
    lines: usize,
    seed: u64,
    compat_density: f64,
) -> PyResult<PySchedInstance> {
    let params = GenParams {
        compat_density,
        ..GenParams::default()
    };
    Ok(PySchedInstance {
        inner: sched::generate_instance(tasks, lines, &params, seed).map_err(value_err)?,
    })
}

/// The three-task walkthrough instance.
#[pyfunction]
fn toy_sched() -> PySchedInstance {
    PySchedInstance {
        inner: sched::toy_instance(),
    }
}

/// Runs the solver on a scheduling instance. Returns a dict with
/// best_score, iteration_found, iterations_run, restarts, lines and starts.
#[pyfunction]
#[pyo3(signature = (instance, seed=0, iterations=1000, restart_cutoff=None, noise=0.5,
                    prioritizer="sticky", inner_iters=10, late_count=false))]
#[allow(clippy::too_many_arguments)]
fn solve_sched(
    py: Python<'_>,
    instance: &PySchedInstance,
    seed: u64,
    iterations: usize,
    restart_cutoff: Option<usize>,
    noise: f64,
    prioritizer: &str,
    inner_iters: usize,
    late_count: bool,
) -> PyResult<Py<PyDict>> {
    let cfg = engine_config(seed, iterations, restart_cutoff, noise, prioritizer)?;
    let mut domain = SchedDomain::new(&instance.inner)
        .with_inner_iters(inner_iters)
        .with_heuristic_noise(cfg.noise)
        .with_objective(if late_count {
            Objective::LateTaskCount
        } else {
            Objective::TotalCost
        });
    let result = run(&mut domain, &cfg).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let out = PyDict::new(py);
    out.set_item("best_score", result.best_score)?;
    out.set_item("iteration_found", result.iteration_found)?;
    out.set_item("iterations_run", result.iterations_run)?;
    out.set_item("restarts", result.restarts_performed)?;
    out.set_item("lines", result.best_solution.lines.clone())?;
    out.set_item("starts", result.best_solution.start.clone())?;
    Ok(out.into())
}

/// Runs the solver on a graph. Returns a dict with best_score (colors used),
/// assignment, iteration_found, iterations_run and restarts.
#[pyfunction]
#[pyo3(signature = (graph, seed=0, iterations=1000, restart_cutoff=None, noise=0.5,
                    prioritizer="sticky", grab=true, blame="all"))]
#[allow(clippy::too_many_arguments)]
fn solve_coloring(
    py: Python<'_>,
    graph: &PyGraph,
    seed: u64,
    iterations: usize,
    restart_cutoff: Option<usize>,
    noise: f64,
    prioritizer: &str,
    grab: bool,
    blame: &str,
) -> PyResult<Py<PyDict>> {
    let cfg = engine_config(seed, iterations, restart_cutoff, noise, prioritizer)?;
    let coloring_cfg = ColoringConfig {
        grab_enabled: grab,
        blame_variant: match blame {
            "all" => BlameVariant::AllOutside,
            "first" => BlameVariant::FirstOnly,
            other => return Err(value_err(format!("blame must be all|first, got '{other}'"))),
        },
        reuse_enabled: true,
    };
    let result = coloring::solve_coloring(&graph.inner, &cfg, &coloring_cfg)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let out = PyDict::new(py);
    out.set_item("best_score", result.best_score)?;
    out.set_item(
        "colors_used",
        colors_used(&result.best_solution.assignment),
    )?;
    out.set_item("assignment", result.best_solution.assignment.clone())?;
    out.set_item("iteration_found", result.iteration_found)?;
    out.set_item("iterations_run", result.iterations_run)?;
    out.set_item("restarts", result.restarts_performed)?;
    Ok(out.into())
}

/// One sticky-sort step: moves each element frontward in proportion to its
/// blame, bounded by `movement_limit`, with uniform +/- `noise` on the keys.
#[pyfunction]
#[pyo3(signature = (order, blame, movement_limit=None, noise=0.5, seed=0))]
fn sticky_sort_step(
    order: Vec<usize>,
    blame: Vec<f64>,
    movement_limit: Option<usize>,
    noise: f64,
    seed: u64,
) -> PyResult<Vec<usize>> {
    use rand::SeedableRng;
    let n = order.len();
    if blame.len() != n {
        return Err(value_err("blame length must equal order length"));
    }
    let seq = checked_sequence(order)?;
    let mut rng = SwoRng::seed_from_u64(seed);
    let out = sticky_sort(
        &seq,
        &BlameVector::new(blame),
        movement_limit.unwrap_or(n).max(1),
        noise,
        &mut rng,
    );
    Ok(out.order().to_vec())
}

/// One blame-sort step: stable descending sort of the sequence by blame.
#[pyfunction]
fn blame_sort_step(order: Vec<usize>, blame: Vec<f64>) -> PyResult<Vec<usize>> {
    if blame.len() != order.len() {
        return Err(value_err("blame length must equal order length"));
    }
    let seq = checked_sequence(order)?;
    Ok(blame_sort(&seq, &BlameVector::new(blame)).order().to_vec())
}

fn checked_sequence(order: Vec<usize>) -> PyResult<PrioritySequence> {
    let n = order.len();
    let mut seen = vec![false; n];
    for &id in &order {
        if id >= n || seen[id] {
            return Err(value_err("order must be a permutation of 0..n"));
        }
        seen[id] = true;
    }
    Ok(PrioritySequence::new(order))
}

#[pymodule]
fn swo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PySchedInstance>()?;
    m.add_function(wrap_pyfunction!(parse_dimacs, m)?)?;
    m.add_function(wrap_pyfunction!(generate_sched, m)?)?;
    m.add_function(wrap_pyfunction!(toy_sched, m)?)?;
    m.add_function(wrap_pyfunction!(solve_sched, m)?)?;
    m.add_function(wrap_pyfunction!(solve_coloring, m)?)?;
    m.add_function(wrap_pyfunction!(sticky_sort_step, m)?)?;
    m.add_function(wrap_pyfunction!(blame_sort_step, m)?)?;
    Ok(())
}
