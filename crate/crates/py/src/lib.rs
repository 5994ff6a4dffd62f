//! Python bindings. Report-like results (specs, summaries, verification
//! reports) cross the boundary as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cpslab::analysis::{self, fit_points};
use cpslab::dynamics::{self, BallisticState, Engine, Scheduler, SimConfig};
use cpslab::experiment;
use cpslab::lattice::{self, edges_to_string, parse_edges};
use cpslab::{CpsError, RngStream};

fn err(e: CpsError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn edges_arg(s: &str) -> PyResult<Vec<lattice::EdgeKind>> {
    parse_edges(s).ok_or_else(|| PyValueError::new_err("edge string may only contain R, L, B and '.'"))
}

#[pyclass(frozen, skip_from_py_object, name = "Coloring")]
#[derive(Clone)]
struct PyColoring(lattice::Coloring);

#[pymethods]
impl PyColoring {
    #[new]
    fn new(kappa: u8, sites: Vec<u8>) -> PyResult<Self> {
        lattice::Coloring::new(kappa, sites).map(Self).map_err(err)
    }

    /// Uniform product-measure coloring; one draw per site.
    #[staticmethod]
    fn uniform(n: usize, kappa: u8, seed: u64) -> PyResult<Self> {
        lattice::Coloring::uniform(n, kappa, &mut RngStream::new(seed)).map(Self).map_err(err)
    }

    #[getter]
    fn kappa(&self) -> u8 {
        self.0.kappa()
    }

    #[getter]
    fn sites(&self) -> Vec<u8> {
        self.0.sites().to_vec()
    }

    fn discordance(&self) -> f64 {
        self.0.discordance()
    }

    /// Edge-particle string, e.g. "R.LB".
    fn edges(&self) -> PyResult<String> {
        let e = lattice::embed(&self.0).map_err(err)?;
        Ok(edges_to_string(e.edges()))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.0 == other.0
    }

    fn __repr__(&self) -> String {
        format!("Coloring(kappa={}, sites={:?})", self.0.kappa(), self.0.sites())
    }
}

/// Rebuilds a coloring from its edge string and the color of site 0.
#[pyfunction]
fn reconstruct(kappa: u8, edges: &str, base_color: u8) -> PyResult<PyColoring> {
    let e = lattice::EdgeConfig::new(kappa, edges_arg(edges)?).map_err(err)?;
    lattice::reconstruct(base_color, &e).map(PyColoring).map_err(err)
}

#[pyclass(frozen, name = "Trajectory")]
struct PyTrajectory(dynamics::Trajectory);

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.snapshots.iter().map(|s| s.time).collect()
    }

    #[getter]
    fn colorings(&self) -> Vec<PyColoring> {
        self.0.snapshots.iter().map(|s| PyColoring(s.coloring.clone())).collect()
    }

    /// `(t, p, q, r)` per snapshot.
    fn densities(&self) -> Vec<(f64, f64, f64, f64)> {
        self.0
            .snapshots
            .iter()
            .map(|s| {
                let d = analysis::snapshot_densities(s);
                (s.time, d.p, d.q, d.r)
            })
            .collect()
    }

    /// `(time, edge, direction, kind)` per logged event; empty without a log.
    fn events(&self) -> Vec<(f64, usize, String, String)> {
        self.0
            .events
            .iter()
            .flat_map(|log| log.records.iter())
            .map(|r| (r.time, r.edge, r.direction.to_string(), r.kind.to_string()))
            .collect()
    }

    #[getter]
    fn firings(&self) -> u64 {
        self.0.stats.firings
    }

    #[getter]
    fn particle_count_increased(&self) -> bool {
        self.0.stats.particle_count_increased
    }
}

/// Runs the cyclic particle system from a uniform start.
#[pyfunction]
#[pyo3(signature = (kappa, n_sites, seed, t_max, snapshot_times=None, engine="edge", scheduler="rejection_free", log_events=false))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    kappa: u8,
    n_sites: usize,
    seed: u64,
    t_max: f64,
    snapshot_times: Option<Vec<f64>>,
    engine: &str,
    scheduler: &str,
    log_events: bool,
) -> PyResult<PyTrajectory> {
    let engine = match engine {
        "edge" => Engine::Edge,
        "vertex" => Engine::Vertex,
        other => return Err(PyValueError::new_err(format!("unknown engine `{other}`"))),
    };
    let scheduler = match scheduler {
        "rejection_free" => Scheduler::RejectionFree,
        "naive" => Scheduler::Naive,
        other => return Err(PyValueError::new_err(format!("unknown scheduler `{other}`"))),
    };
    let mut cfg =
        SimConfig::new(kappa, n_sites, seed, t_max).with_engine(engine).with_scheduler(scheduler).with_log(log_events);
    if let Some(times) = snapshot_times {
        cfg = cfg.with_snapshots(times);
    }
    let x0 = cfg.uniform_start().map_err(err)?;
    dynamics::run_cps(&cfg, &x0).map(PyTrajectory).map_err(err)
}

/// Rows `y0, ..., y_steps` of the cyclic cellular automaton.
#[pyfunction]
fn run_cca(y0: &PyColoring, steps: usize) -> Vec<PyColoring> {
    dynamics::run_cca(&y0.0, steps).into_iter().map(PyColoring).collect()
}

/// Collision times of ballistic annihilation from a Poisson start.
#[pyfunction]
fn run_ba(n: usize, velocities: Vec<i8>, seed: u64, t_max: f64) -> PyResult<Vec<f64>> {
    if velocities.is_empty() || velocities.iter().any(|v| !(-1..=1).contains(v)) {
        return Err(PyValueError::new_err("velocities must be a nonempty list drawn from -1, 0, 1"));
    }
    let init = BallisticState::poisson(n, &velocities, &mut RngStream::new(seed));
    let out = dynamics::run_ba(&init, t_max).map_err(err)?;
    Ok(out.collisions.iter().map(|c| c.time).collect())
}

#[pyfunction]
fn simulate_virtual_pair(gap: u64, seed: u64) -> f64 {
    dynamics::simulate_virtual_pair(gap, &mut RngStream::new(seed))
}

/// Water-filling matching as `(r_edge, l_edge)` pairs.
#[pyfunction]
fn water_fill_matching(edges: &str) -> PyResult<Vec<(usize, usize)>> {
    Ok(analysis::water_fill_matching(&edges_arg(edges)?).pairs)
}

/// `C − (2|m| + S)` from the running sums; equals twice the matching size.
#[pyfunction]
fn matched_particles(edges: &str) -> PyResult<i64> {
    Ok(analysis::running_sums(&edges_arg(edges)?).matched_particles())
}

#[pyfunction]
fn brute_force_max_matching(edges: &str) -> PyResult<usize> {
    analysis::brute_force_max_matching(&edges_arg(edges)?).map_err(err)
}

#[pyfunction]
fn cca_survival_criterion(y0: &PyColoring, x: usize, t: usize) -> PyResult<bool> {
    analysis::cca_survival_criterion(&y0.0, x, t).map_err(err)
}

/// Least-squares fit of `y ≈ c·t^(−α)`; returns `(c, alpha, residual)`.
#[pyfunction]
fn fit_power_law(points: Vec<(f64, f64)>, t_min: f64, t_max: f64) -> PyResult<(f64, f64, f64)> {
    let f = fit_points(&points, (t_min, t_max)).map_err(err)?;
    Ok((f.c, f.alpha, f.residual))
}

/// Validated spec with defaults filled in, as JSON.
#[pyfunction]
fn parse_spec(text: &str) -> PyResult<String> {
    let spec = experiment::parse_spec(text).map_err(err)?;
    serde_json::to_string(&spec).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Runs a spec, writes its artifacts and returns the summary rows as JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, text: &str) -> PyResult<String> {
    let spec = experiment::parse_spec(text).map_err(err)?;
    let outcome = py.detach(|| experiment::run_experiment(&spec)).map_err(err)?;
    serde_json::to_string(&outcome.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "cpslab")]
fn cpslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyColoring>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(reconstruct, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_cca, m)?)?;
    m.add_function(wrap_pyfunction!(run_ba, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_virtual_pair, m)?)?;
    m.add_function(wrap_pyfunction!(water_fill_matching, m)?)?;
    m.add_function(wrap_pyfunction!(matched_particles, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_max_matching, m)?)?;
    m.add_function(wrap_pyfunction!(cca_survival_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(parse_spec, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
