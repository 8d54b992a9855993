//! Python module `ic_lab`.

use ic_core::bounds::{self, white_noise_family, ConcatenationQuery, DEFAULT_TOL};
use ic_core::search::{self, SearchConfig};
use ic_core::{BellFunctional, BipartiteBox, DiscreteChannel, JointDistribution, Protocol};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: ic_core::Error) -> PyErr {
    use ic_core::Error as E;
    match e {
        E::Ambiguous { .. } | E::NonConvergence { .. } | E::FitResidual { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Box", module = "ic_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBox(BipartiteBox);

#[pymethods]
impl PyBox {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        BipartiteBox::from_json(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn pr_box(p: f64) -> PyResult<Self> {
        ic_core::pr_box(p).map(Self).map_err(err)
    }

    #[staticmethod]
    fn box_3322(e: f64) -> PyResult<Self> {
        ic_core::box_3322(e).map(Self).map_err(err)
    }

    #[staticmethod]
    fn white_noise(na: usize, nb: usize, nx: usize, ny: usize) -> PyResult<Self> {
        BipartiteBox::white_noise(na, nb, nx, ny)
            .map(Self)
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// `(na, nb, nx, ny)`.
    #[getter]
    fn shape(&self) -> (usize, usize, usize, usize) {
        self.0.shape()
    }

    fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> PyResult<f64> {
        let (na, nb, nx, ny) = self.0.shape();
        if a >= na || b >= nb || x >= nx || y >= ny {
            return Err(PyValueError::new_err("index out of range"));
        }
        Ok(self.0.prob(a, b, x, y))
    }

    fn mix_with_white_noise(&self, e: f64) -> PyResult<Self> {
        self.0.mix_with_white_noise(e).map(Self).map_err(err)
    }

    /// Human-readable no-signaling violations; empty for a valid box.
    #[pyo3(signature = (tol = ic_core::boxes::NS_TOL))]
    fn violations(&self, tol: f64) -> Vec<String> {
        ic_core::validate_no_signaling(&self.0, tol)
            .violations
            .iter()
            .map(ToString::to_string)
            .collect()
    }

    /// CHSH winning probability.
    fn chsh_value(&self) -> PyResult<f64> {
        ic_core::bell_value(&self.0, &BellFunctional::chsh()).map_err(err)
    }

    fn i3322_value(&self) -> PyResult<f64> {
        ic_core::bell_value(&self.0, &BellFunctional::i3322()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Box(shape={:?})", self.0.shape())
    }
}

#[pyclass(name = "Channel", module = "ic_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyChannel(DiscreteChannel);

#[pymethods]
impl PyChannel {
    #[new]
    fn new(transition: Vec<Vec<f64>>) -> PyResult<Self> {
        let d = transition.len();
        if transition.iter().any(|r| r.len() != d) {
            return Err(PyValueError::new_err("channels are square"));
        }
        DiscreteChannel::new(d, transition.concat())
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn symmetric(d: usize, e_c: f64) -> PyResult<Self> {
        ic_core::symmetric_channel(d, e_c).map(Self).map_err(err)
    }

    #[staticmethod]
    fn identity(d: usize) -> PyResult<Self> {
        DiscreteChannel::identity(d).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        DiscreteChannel::from_json(text).map(Self).map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn d(&self) -> usize {
        self.0.d()
    }

    #[getter]
    fn transition(&self) -> Vec<Vec<f64>> {
        (0..self.0.d()).map(|i| self.0.row(i).to_vec()).collect()
    }

    /// `e_c` when the channel is symmetric, else `None`.
    fn symmetric_bias(&self) -> Option<f64> {
        self.0.symmetric_bias()
    }

    #[pyo3(signature = (tol = 1e-12))]
    fn capacity(&self, tol: f64) -> PyResult<f64> {
        self.0.capacity(tol).map_err(err)
    }

    /// `(capacity, maximizing input, iterations)` by alternating maximization.
    #[pyo3(signature = (tol = 1e-12))]
    fn iterative_capacity(&self, tol: f64) -> PyResult<(f64, Vec<f64>, usize)> {
        let c = ic_core::iterative_capacity(&self.0, tol).map_err(err)?;
        Ok((c.capacity, c.input, c.iterations))
    }
}

#[pyclass(name = "Protocol", module = "ic_lab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyProtocol(Protocol);

#[pymethods]
impl PyProtocol {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Protocol::from_json(text).map(Self).map_err(err)
    }

    #[staticmethod]
    fn van_dam() -> Self {
        Self(ic_core::van_dam_protocol())
    }

    #[staticmethod]
    fn protocol_3322() -> Self {
        Self(ic_core::protocol_3322())
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    #[getter]
    fn n_data(&self) -> usize {
        self.0.n_data
    }

    #[getter]
    fn x_table(&self) -> Vec<usize> {
        self.0.x_table.clone()
    }

    #[getter]
    fn m_table(&self) -> Vec<usize> {
        self.0.m_table.clone()
    }

    #[getter]
    fn decoder_table(&self) -> Vec<usize> {
        self.0.decoder_table.clone()
    }
}

#[pyclass(name = "BoundResult", module = "ic_lab", frozen, get_all)]
struct PyBoundResult {
    e_bound: f64,
    p_bound: f64,
    alphabet: usize,
    e_c: Option<f64>,
    margin_at_bound: f64,
    iterations: usize,
    tolerance: f64,
    bound_found: bool,
    diagnostics: Vec<String>,
}

impl From<ic_core::BoundResult> for PyBoundResult {
    fn from(r: ic_core::BoundResult) -> Self {
        Self {
            e_bound: r.e_bound,
            p_bound: r.p_bound,
            alphabet: r.alphabet,
            e_c: r.e_c,
            margin_at_bound: r.margin_at_bound,
            iterations: r.iterations,
            tolerance: r.tolerance,
            bound_found: r.bound_found,
            diagnostics: r.diagnostics,
        }
    }
}

#[pymethods]
impl PyBoundResult {
    fn __repr__(&self) -> String {
        format!(
            "BoundResult(e_bound={}, p_bound={}, e_c={:?})",
            self.e_bound, self.p_bound, self.e_c
        )
    }
}

#[pyclass(name = "Simulation", module = "ic_lab", frozen, get_all)]
struct PySimulation {
    success: Vec<f64>,
    information: Vec<f64>,
    ic_sum: f64,
}

#[pyfunction]
fn fano_information(d: usize, e: f64) -> PyResult<f64> {
    ic_core::fano_information(d, e).map_err(err)
}

#[pyfunction]
fn binary_entropy(q: f64) -> PyResult<f64> {
    ic_core::binary_entropy(q).map_err(err)
}

/// Mutual information in bits of a joint probability table.
#[pyfunction]
fn mutual_information(table: Vec<Vec<f64>>) -> PyResult<f64> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(PyValueError::new_err("table rows differ in length"));
    }
    let joint = JointDistribution::new(rows, cols, table.concat()).map_err(err)?;
    Ok(ic_core::mutual_information(&joint))
}

#[pyfunction]
fn closed_form_capacity(d: usize, e_c: f64) -> PyResult<f64> {
    ic_core::closed_form_capacity(d, e_c).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, d, e_c, tol = DEFAULT_TOL))]
fn solve_symmetric_bound(n: usize, d: usize, e_c: f64, tol: f64) -> PyResult<PyBoundResult> {
    ic_core::solve_symmetric_bound(n, d, e_c, tol)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, d, tol = DEFAULT_TOL))]
fn optimize_channel_bias(n: usize, d: usize, tol: f64) -> PyResult<PyBoundResult> {
    ic_core::optimize_channel_bias(n, d, tol)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (n, d, k, tol = DEFAULT_TOL))]
fn concatenation_bound(n: usize, d: usize, k: u32, tol: f64) -> PyResult<PyBoundResult> {
    let q = ConcatenationQuery::new(n, d, k).map_err(err)?;
    ic_core::concatenation_bound(q, tol)
        .map(Into::into)
        .map_err(err)
}

/// Bound on `e` for white-noise mixtures of `box` run through `protocol`.
#[pyfunction]
#[pyo3(signature = (protocol, r#box, channel, tol = DEFAULT_TOL))]
fn protocol_bound(
    protocol: &PyProtocol,
    r#box: &PyBox,
    channel: &PyChannel,
    tol: f64,
) -> PyResult<PyBoundResult> {
    let family = white_noise_family(&r#box.0);
    ic_core::protocol_bound(&protocol.0, &family, &channel.0, tol)
        .map(Into::into)
        .map_err(err)
}

/// `(bound, slope, residual)` of the `e_c -> 0` extrapolation.
#[pyfunction]
#[pyo3(signature = (protocol, r#box, d, tol = 1e-6))]
fn limit_bound(
    protocol: &PyProtocol,
    r#box: &PyBox,
    d: usize,
    tol: f64,
) -> PyResult<(PyBoundResult, f64, f64)> {
    let family = white_noise_family(&r#box.0);
    let lim = ic_core::limit_bound(&protocol.0, &family, d, tol).map_err(err)?;
    Ok((lim.bound.into(), lim.slope, lim.residual))
}

#[pyfunction]
fn result1_holds(n: usize, d: usize, e: f64, k: u32) -> PyResult<bool> {
    ic_core::result1_witness(n, d, e, k)
        .map(|r| r.implication_holds)
        .map_err(err)
}

/// `(d, e_c_opt, e, e_concat, concat_depth)`.
type Table1Tuple = (usize, f64, f64, f64, u32);

#[pyfunction]
#[pyo3(signature = (tol = DEFAULT_TOL))]
fn table1(tol: f64) -> PyResult<Vec<Table1Tuple>> {
    let rows = ic_core::table1(tol).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.d, r.e_c_opt, r.e, r.e_concat, r.concat_depth))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (grid, tol = DEFAULT_TOL))]
fn sweep_fig1(grid: Vec<f64>, tol: f64) -> PyResult<Vec<(f64, f64)>> {
    bounds::sweep_fig1(&grid, tol).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (protocol, r#box, channel))]
fn simulate(protocol: &PyProtocol, r#box: &PyBox, channel: &PyChannel) -> PyResult<PySimulation> {
    let s = ic_core::simulate(&protocol.0, &r#box.0, &channel.0).map_err(err)?;
    Ok(PySimulation {
        success: s.success,
        information: s.information,
        ic_sum: s.ic_sum,
    })
}

#[pyfunction]
#[pyo3(signature = (protocol, r#box, channel))]
fn ic_check(protocol: &PyProtocol, r#box: &PyBox, channel: &PyChannel) -> PyResult<f64> {
    ic_core::ic_check(&protocol.0, &r#box.0, &channel.0).map_err(err)
}

/// Simulated annealing; `config` is a JSON object of search settings.
#[pyfunction]
#[pyo3(signature = (r#box, channel, n_data = 2, seed = 0, config = None))]
fn anneal_protocol(
    py: Python<'_>,
    r#box: &PyBox,
    channel: &PyChannel,
    n_data: usize,
    seed: u64,
    config: Option<&str>,
) -> PyResult<(PyProtocol, f64)> {
    let mut cfg: SearchConfig = match config {
        Some(text) => {
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?
        }
        None => SearchConfig::default(),
    };
    cfg.seed = seed;
    let (bx, ch) = (r#box.0.clone(), channel.0.clone());
    let out = py
        .detach(move || search::anneal_protocol(&bx, &ch, n_data, &cfg))
        .map_err(err)?;
    Ok((PyProtocol(out.protocol), out.score))
}

#[pyfunction]
#[pyo3(signature = (r#box, channel, n_data = 2))]
fn exhaustive_protocol_search(
    r#box: &PyBox,
    channel: &PyChannel,
    n_data: usize,
) -> PyResult<(PyProtocol, f64)> {
    let (p, score) =
        search::exhaustive_protocol_search(&r#box.0, &channel.0, n_data).map_err(err)?;
    Ok((PyProtocol(p), score))
}

#[pymodule]
fn ic_lab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBox>()?;
    m.add_class::<PyChannel>()?;
    m.add_class::<PyProtocol>()?;
    m.add_class::<PyBoundResult>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(fano_information, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_capacity, m)?)?;
    m.add_function(wrap_pyfunction!(solve_symmetric_bound, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_channel_bias, m)?)?;
    m.add_function(wrap_pyfunction!(concatenation_bound, m)?)?;
    m.add_function(wrap_pyfunction!(protocol_bound, m)?)?;
    m.add_function(wrap_pyfunction!(limit_bound, m)?)?;
    m.add_function(wrap_pyfunction!(result1_holds, m)?)?;
    m.add_function(wrap_pyfunction!(table1, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_fig1, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(ic_check, m)?)?;
    m.add_function(wrap_pyfunction!(anneal_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_protocol_search, m)?)?;
    m.add("TSIRELSON_P", ic_core::TSIRELSON_P)?;
    m.add("QUANTUM_3322_E", ic_core::QUANTUM_3322_E)?;
    Ok(())
}
