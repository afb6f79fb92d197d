//! Python bindings. Matrices cross the boundary as lists of rows.

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::swarm_gsp::config::{CollectiveState, Config};
use ::swarm_gsp::detection::Method;
use ::swarm_gsp::models::{
    couzin_step, dynamics_rng, init_swarm, order_metrics, swarmalator_diagnostics,
    swarmalator_step, CouzinParams, ModelKind, SimRng, SwarmState, SwarmalatorParams,
};
use ::swarm_gsp::spectral::{self, FilterSpec, GraphSignal, SignalKind};
use ::swarm_gsp::{bridge, experiment, roc, Error};

/// Real and optional imaginary parts, each a list of rows.
type SignalRows = (Vec<Vec<f64>>, Option<Vec<Vec<f64>>>);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NumericalBlowup { .. } | Error::ConvergenceFailure => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn signal_from(values: &[Vec<f64>], imag: Option<&[Vec<f64>]>) -> PyResult<GraphSignal> {
    let re = to_matrix(values)?;
    match imag {
        None => Ok(GraphSignal::real(SignalKind::Raw, re)),
        Some(im) => GraphSignal::complex(SignalKind::Raw, re, to_matrix(im)?).map_err(to_py),
    }
}

fn parse_method(name: &str) -> PyResult<Method> {
    name.parse().map_err(|e: String| PyValueError::new_err(e))
}

/// Normalized Laplacian of a symmetric, zero-diagonal adjacency matrix.
#[pyfunction]
fn normalized_laplacian(adjacency: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
    let g = spectral::WeightedGraph::new(to_matrix(&adjacency)?, 1.0).map_err(to_py)?;
    Ok(to_rows(&spectral::normalized_laplacian(&g).map_err(to_py)?))
}

/// Gaussian-kernel adjacency of agent positions. Returns
/// `(adjacency, bandwidth_sq)`.
#[pyfunction]
fn swarm_graph(positions: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, f64)> {
    let g = bridge::build_swarm_graph(&to_matrix(&positions)?).map_err(to_py)?;
    Ok((to_rows(g.adjacency()), g.bandwidth_sq()))
}

/// Area under the ROC curve, ties counted as one half.
#[pyfunction]
fn auc(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    roc::auc(&scores, &labels).map_err(to_py)
}

/// Sorted eigenpairs of a graph's normalized Laplacian.
#[pyclass(name = "SpectralBasis", module = "swarm_gsp")]
struct PySpectralBasis {
    inner: spectral::SpectralBasis,
}

#[pymethods]
impl PySpectralBasis {
    /// Eigendecomposition of an arbitrary symmetric matrix.
    #[staticmethod]
    fn from_matrix(matrix: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = spectral::eigendecompose(&to_matrix(&matrix)?).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_adjacency(adjacency: Vec<Vec<f64>>) -> PyResult<Self> {
        let g = spectral::WeightedGraph::new(to_matrix(&adjacency)?, 1.0).map_err(to_py)?;
        let inner = spectral::SpectralBasis::of_graph(&g).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_positions(positions: Vec<Vec<f64>>) -> PyResult<Self> {
        let g = bridge::build_swarm_graph(&to_matrix(&positions)?).map_err(to_py)?;
        let inner = spectral::SpectralBasis::of_graph(&g).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().iter().copied().collect()
    }

    /// Eigenvectors as columns.
    #[getter]
    fn eigenvectors(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.eigenvectors())
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    /// GFT coefficients, `(re, im)`; `im` is None for real signals.
    #[pyo3(signature = (values, imag=None))]
    fn gft(
        &self,
        values: Vec<Vec<f64>>,
        imag: Option<Vec<Vec<f64>>>,
    ) -> PyResult<SignalRows> {
        let s = spectral::gft(&self.inner, &signal_from(&values, imag.as_deref())?).map_err(to_py)?;
        Ok((to_rows(&s.re), s.im.as_ref().map(to_rows)))
    }

    /// Per-frequency power summed over signal columns.
    #[pyo3(signature = (values, imag=None))]
    fn power(&self, values: Vec<Vec<f64>>, imag: Option<Vec<Vec<f64>>>) -> PyResult<Vec<f64>> {
        let s = spectral::gft(&self.inner, &signal_from(&values, imag.as_deref())?).map_err(to_py)?;
        Ok(spectral::gft_power(&s).iter().copied().collect())
    }

    /// Keeps the 1-based frequencies in `passband`, or applies the Laplacian
    /// when `passband` is None.
    #[pyo3(signature = (values, passband=None, imag=None))]
    fn filter(
        &self,
        values: Vec<Vec<f64>>,
        passband: Option<Vec<usize>>,
        imag: Option<Vec<Vec<f64>>>,
    ) -> PyResult<SignalRows> {
        let spec = match passband {
            Some(p) => FilterSpec::indicator(p).map_err(to_py)?,
            None => FilterSpec::Lgs,
        };
        let out = spectral::apply_filter(&self.inner, &spec, &signal_from(&values, imag.as_deref())?)
            .map_err(to_py)?;
        Ok((to_rows(out.re()), out.im().map(to_rows)))
    }
}

/// A nominal swarm stepped with the shipped default parameters.
#[pyclass(name = "Swarm", module = "swarm_gsp")]
struct PySwarm {
    state: SwarmState,
    couzin: Vec<CouzinParams>,
    swarmalator: Vec<SwarmalatorParams>,
    rng: SimRng,
}

#[pymethods]
impl PySwarm {
    #[new]
    #[pyo3(signature = (model, n_agents, seed, state="torus"))]
    fn new(model: &str, n_agents: usize, seed: u64, state: &str) -> PyResult<Self> {
        let model: ModelKind = model.parse().map_err(|e: String| PyValueError::new_err(e))?;
        let collective: CollectiveState = state.parse().map_err(|e: String| PyValueError::new_err(e))?;
        let config = Config::default();
        Ok(Self {
            state: init_swarm(model, n_agents, seed, config.spatial_extent(model)),
            couzin: vec![config.couzin_params(collective); n_agents],
            swarmalator: vec![config.swarmalator_params(); n_agents],
            rng: dynamics_rng(seed),
        })
    }

    #[pyo3(signature = (steps=1))]
    fn step(&mut self, steps: usize) -> PyResult<()> {
        for _ in 0..steps {
            self.state = match &self.state {
                SwarmState::Couzin(s) => {
                    SwarmState::Couzin(couzin_step(s, &self.couzin, &mut self.rng).map_err(to_py)?)
                }
                SwarmState::Swarmalator(s) => {
                    SwarmState::Swarmalator(swarmalator_step(s, &self.swarmalator).map_err(to_py)?)
                }
            };
        }
        Ok(())
    }

    #[getter]
    fn positions(&self) -> Vec<Vec<f64>> {
        to_rows(&self.state.positions())
    }

    #[getter]
    fn velocities(&self) -> Vec<Vec<f64>> {
        to_rows(&self.state.velocities())
    }

    #[getter]
    fn phases(&self) -> Option<Vec<f64>> {
        self.state.phases().map(<[f64]>::to_vec)
    }

    #[getter]
    fn steps_taken(&self) -> u64 {
        self.state.step()
    }

    /// Graph signal of the current state: `"adjusted_position"`,
    /// `"normalized_velocity"` or `"phase_complex"`. Returns `(re, im)`.
    fn signal(&self, kind: &str) -> PyResult<SignalRows> {
        let kind = match kind {
            "adjusted_position" | "r" => SignalKind::AdjustedPosition,
            "normalized_velocity" | "u" => SignalKind::NormalizedVelocity,
            "phase_complex" | "h" => SignalKind::PhaseComplex,
            other => return Err(PyValueError::new_err(format!("unknown signal `{other}`"))),
        };
        let s = bridge::extract_signal(&self.state, kind).map_err(to_py)?;
        Ok((to_rows(s.re()), s.im().map(to_rows)))
    }

    /// Polarization and angular momentum, or circular variance and annulus
    /// ratio for swarmalators.
    fn metrics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new_bound(py);
        match &self.state {
            SwarmState::Couzin(s) => {
                let m = order_metrics(s);
                d.set_item("polarization", m.polarization)?;
                d.set_item("angular_momentum", m.angular_momentum)?;
            }
            SwarmState::Swarmalator(s) => {
                let m = swarmalator_diagnostics(s);
                d.set_item("circular_variance", m.circular_variance)?;
                d.set_item("annulus_ratio", m.annulus_ratio)?;
            }
        }
        Ok(d)
    }
}

/// Runs a detection case with the default configuration and returns AUC
/// against snapshot count as a list of dicts.
#[pyfunction]
#[pyo3(signature = (case_id, runs, snapshots, seed=1, methods=vec!["oobp".to_string(), "lgs".to_string()]))]
fn run_case<'py>(
    py: Python<'py>,
    case_id: u8,
    runs: usize,
    snapshots: usize,
    seed: u64,
    methods: Vec<String>,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config = Config::default();
    let case = config
        .case_spec(case_id)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    let methods = methods.iter().map(|m| parse_method(m)).collect::<PyResult<Vec<_>>>()?;
    let mut cfg = config.experiment_config(case.model());
    cfg.runs = runs;
    cfg.max_snapshots = snapshots;
    cfg.base_seed = seed;
    let table = py
        .allow_threads(|| experiment::run_case(&case, &cfg, &methods))
        .map_err(to_py)?;
    experiment::auc_vs_snapshots(&table)
        .into_iter()
        .map(|p| {
            let d = PyDict::new_bound(py);
            d.set_item("case_id", p.case_id)?;
            d.set_item("method", p.method.as_str())?;
            d.set_item("snapshots", p.num_snapshots)?;
            d.set_item("auc", p.auc)?;
            d.set_item("n_runs", p.n_runs)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "swarm_gsp")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpectralBasis>()?;
    m.add_class::<PySwarm>()?;
    m.add_function(wrap_pyfunction!(normalized_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(swarm_graph, m)?)?;
    m.add_function(wrap_pyfunction!(auc, m)?)?;
    m.add_function(wrap_pyfunction!(run_case, m)?)?;
    Ok(())
}
