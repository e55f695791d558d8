//! Python bindings: the main types and operations of the toolkit.
//!
//! Build with `cargo build --release -p igp-dde-py`; the resulting
//! `libigp_dde_py.so` imports as the `igp_dde_py` module (see
//! `python/smoke_test.py` for a loader).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use igp_dde::branch::{sweep as core_sweep, SweepSettings};
use igp_dde::critical_delay::{hopf_e1, hopf_e2, hopf_e3, hopf_e4, CriticalDelay};
use igp_dde::dde_sim::{
    classify_endstate as core_classify, integrate as core_integrate, History,
    Trajectory as CoreTrajectory,
};
use igp_dde::model::{
    equilibria as core_equilibria, equilibrium, rhs as core_rhs, EquilibriumKind,
    ModelParams as CoreParams, StateTriple,
};
use igp_dde::presets;
use igp_dde::spectrum_oracle::find_crossing as core_find_crossing;
use igp_dde::stability::{char_poly, tau0_stability as core_tau0};
use igp_dde::Error;

fn py_err(err: Error) -> PyErr {
    match err {
        Error::InvalidInput(_) | Error::NotApplicable(_) | Error::UndefinedEquilibrium(_)
        | Error::InvalidStep(_) => PyValueError::new_err(err.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_kind(kind: &str) -> PyResult<EquilibriumKind> {
    kind.parse().map_err(py_err)
}

/// Rate constants plus the delay.
#[pyclass(name = "ModelParams", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModelParams {
    inner: CoreParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (a0, a1, a2, a3, b0, b1, b3, c0, c1, c2, tau=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        a0: f64,
        a1: f64,
        a2: f64,
        a3: f64,
        b0: f64,
        b1: f64,
        b3: f64,
        c0: f64,
        c1: f64,
        c2: f64,
        tau: f64,
    ) -> PyResult<Self> {
        CoreParams::new([a0, a1, a2, a3], [b0, b1, b3], [c0, c1, c2], tau)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// Built-in parameter set: "example1" | "example2" | "example3".
    #[staticmethod]
    fn preset(name: &str) -> PyResult<Self> {
        presets::by_name(name)
            .map(|p| Self { inner: p.params })
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))
    }

    /// Conventional constant initial history of a preset.
    #[staticmethod]
    fn preset_history(name: &str) -> PyResult<(f64, f64, f64)> {
        presets::by_name(name)
            .map(|p| (p.history.x, p.history.y, p.history.z))
            .ok_or_else(|| PyValueError::new_err(format!("unknown preset {name:?}")))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        CoreParams::from_json(text)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn with_tau(&self, tau: f64) -> PyResult<Self> {
        let inner = self.inner.with_tau(tau);
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau
    }

    fn __repr__(&self) -> String {
        format!("ModelParams({})", self.inner.to_json().replace(['\n', ' '], ""))
    }
}

/// One labeled steady state.
#[pyclass(name = "Equilibrium", frozen)]
struct PyEquilibrium {
    #[pyo3(get)]
    kind: String,
    #[pyo3(get)]
    coords: (f64, f64, f64),
    #[pyo3(get)]
    exists: bool,
    #[pyo3(get)]
    defined: bool,
}

#[pymethods]
impl PyEquilibrium {
    fn __repr__(&self) -> String {
        format!(
            "Equilibrium(kind={}, coords=({:.6}, {:.6}, {:.6}), exists={})",
            self.kind, self.coords.0, self.coords.1, self.coords.2, self.exists
        )
    }
}

/// Zero-delay stability verdict.
#[pyclass(name = "Tau0Verdict", frozen)]
struct PyTau0Verdict {
    #[pyo3(get)]
    eq_kind: String,
    #[pyo3(get)]
    stable: bool,
    #[pyo3(get)]
    marginal: bool,
    /// List of (name, value, holds) tuples.
    #[pyo3(get)]
    criteria: Vec<(String, f64, bool)>,
}

/// Critical delay, crossing frequency, and transversality data.
#[pyclass(name = "HopfReport", frozen)]
struct PyHopfReport {
    #[pyo3(get)]
    eq_kind: String,
    /// None when no crossing exists (see `absolutely_stable`).
    #[pyo3(get)]
    tau_critical: Option<f64>,
    #[pyo3(get)]
    absolutely_stable: bool,
    #[pyo3(get)]
    omega: Option<f64>,
    #[pyo3(get)]
    tau_sequence: Vec<f64>,
    #[pyo3(get)]
    transversality_sign: Option<i8>,
    #[pyo3(get)]
    hypotheses: Vec<(String, f64, bool)>,
    #[pyo3(get)]
    outside_sufficient_condition: bool,
}

#[pymethods]
impl PyHopfReport {
    fn __repr__(&self) -> String {
        format!(
            "HopfReport(eq_kind={}, tau_critical={:?}, omega={:?})",
            self.eq_kind, self.tau_critical, self.omega
        )
    }
}

/// Integrated solution.
#[pyclass(name = "Trajectory", frozen)]
struct PyTrajectory {
    inner: CoreTrajectory,
    params: CoreParams,
}

#[pymethods]
impl PyTrajectory {
    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn clamp_warnings(&self) -> u64 {
        self.inner.clamp_warnings()
    }

    fn times(&self) -> Vec<f64> {
        (0..self.inner.len()).map(|i| self.inner.time(i)).collect()
    }

    fn states(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .states()
            .iter()
            .map(|s| (s.x, s.y, s.z))
            .collect()
    }

    fn last(&self) -> (f64, f64, f64) {
        let s = self.inner.last();
        (s.x, s.y, s.z)
    }

    /// Dense-output sample of the resource density.
    fn sample_x(&self, t: f64) -> f64 {
        self.inner.sample_x(t)
    }

    /// Qualitative fate of the trailing window relative to an equilibrium:
    /// "converged" | "oscillating" | "diverged" | "undecided".
    #[pyo3(signature = (eq_kind, transient_fraction=0.8))]
    fn classify(&self, eq_kind: &str, transient_fraction: f64) -> PyResult<String> {
        let kind = parse_kind(eq_kind)?;
        let eq = equilibrium(&self.params, kind);
        Ok(core_classify(&self.inner, &eq, transient_fraction).to_string())
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Vector field with the delayed resource density supplied explicitly.
#[pyfunction]
fn rhs(
    params: &PyModelParams,
    state: (f64, f64, f64),
    delayed_x: f64,
) -> PyResult<(f64, f64, f64)> {
    let out = core_rhs(
        &params.inner,
        &StateTriple::new(state.0, state.1, state.2),
        delayed_x,
    )
    .map_err(py_err)?;
    Ok((out.x, out.y, out.z))
}

/// The five equilibria E0..E4 with existence flags.
#[pyfunction]
fn equilibria(params: &PyModelParams) -> Vec<PyEquilibrium> {
    core_equilibria(&params.inner)
        .iter()
        .map(|eq| PyEquilibrium {
            kind: eq.kind.to_string(),
            coords: (eq.coords[0], eq.coords[1], eq.coords[2]),
            exists: eq.exists,
            defined: eq.defined,
        })
        .collect()
}

/// Routh-Hurwitz verdict at zero delay for one equilibrium kind.
#[pyfunction]
fn tau0_stability(params: &PyModelParams, eq_kind: &str) -> PyResult<PyTau0Verdict> {
    let kind = parse_kind(eq_kind)?;
    let eq = equilibrium(&params.inner, kind);
    let verdict = core_tau0(&params.inner, &eq).map_err(py_err)?;
    Ok(PyTau0Verdict {
        eq_kind: verdict.eq_kind.to_string(),
        stable: verdict.stable,
        marginal: verdict.marginal,
        criteria: verdict
            .criteria
            .into_iter()
            .map(|c| (c.name, c.value, c.holds))
            .collect(),
    })
}

/// Hopf threshold report for one equilibrium kind; raises ValueError when
/// the hypotheses fail.
#[pyfunction]
fn hopf(params: &PyModelParams, eq_kind: &str) -> PyResult<PyHopfReport> {
    let kind = parse_kind(eq_kind)?;
    let report = match kind {
        EquilibriumKind::E0 => {
            return Err(PyValueError::new_err(
                "extinction equilibrium is unstable for every delay",
            ))
        }
        EquilibriumKind::E1 => hopf_e1(&params.inner),
        EquilibriumKind::E2 => hopf_e2(&params.inner),
        EquilibriumKind::E3 => hopf_e3(&params.inner),
        EquilibriumKind::E4 => hopf_e4(&params.inner),
    }
    .map_err(py_err)?;
    Ok(PyHopfReport {
        eq_kind: report.eq_kind.to_string(),
        tau_critical: report.tau_critical(),
        absolutely_stable: matches!(report.critical, CriticalDelay::AbsolutelyStable),
        omega: report.omega,
        tau_sequence: report.tau_sequence.clone(),
        transversality_sign: report.transversality_sign,
        hypotheses: report
            .hypotheses
            .into_iter()
            .map(|c| (c.name, c.value, c.holds))
            .collect(),
        outside_sufficient_condition: report.outside_sufficient_condition,
    })
}

/// Integrates from a constant history (method of steps, fixed-step RK4).
#[pyfunction]
#[pyo3(signature = (params, history, t_end, dt=None))]
fn integrate(
    params: &PyModelParams,
    history: (f64, f64, f64),
    t_end: f64,
    dt: Option<f64>,
) -> PyResult<PyTrajectory> {
    let p = params.inner;
    let dt = dt.unwrap_or(if p.tau > 0.0 { p.tau / 40.0 } else { 0.05 });
    let hist =
        History::constant(StateTriple::new(history.0, history.1, history.2)).map_err(py_err)?;
    let traj = core_integrate(&p, &hist, t_end, dt).map_err(py_err)?;
    Ok(PyTrajectory {
        inner: traj,
        params: p,
    })
}

/// Brute-force crossing search on the rightmost characteristic root;
/// returns (tau_star, omega_star).
#[pyfunction]
fn find_crossing(
    params: &PyModelParams,
    eq_kind: &str,
    tau_lo: f64,
    tau_hi: f64,
) -> PyResult<(f64, f64)> {
    let kind = parse_kind(eq_kind)?;
    let eq = equilibrium(&params.inner, kind);
    let qp = char_poly(&params.inner, &eq).map_err(py_err)?;
    core_find_crossing(|tau| qp.with_tau(tau), tau_lo, tau_hi).map_err(py_err)
}

/// Delay sweep; returns one dict per grid point with keys
/// tau, eq_stable, classification, amplitude, period.
#[pyfunction]
#[pyo3(signature = (params, eq_kind, tau_grid, t_end=None))]
fn sweep(
    py: Python<'_>,
    params: &PyModelParams,
    eq_kind: &str,
    tau_grid: Vec<f64>,
    t_end: Option<f64>,
) -> PyResult<Vec<Py<pyo3::types::PyDict>>> {
    use pyo3::types::PyDict;
    let kind = parse_kind(eq_kind)?;
    let mut settings = SweepSettings::default();
    if let Some(t_end) = t_end {
        settings.t_end = t_end;
        settings.t_end_near_hopf = 2.0 * t_end;
    }
    let diagram = core_sweep(&params.inner, kind, &tau_grid, &settings).map_err(py_err)?;
    diagram
        .points
        .iter()
        .map(|p| {
            let dict = PyDict::new(py);
            dict.set_item("tau", p.tau)?;
            dict.set_item("eq_stable", p.eq_stable)?;
            dict.set_item("classification", p.classification.to_string())?;
            dict.set_item("amplitude", (p.amplitude[0], p.amplitude[1], p.amplitude[2]))?;
            dict.set_item("period", p.period)?;
            Ok(dict.unbind())
        })
        .collect()
}

#[pymodule]
fn igp_dde_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyEquilibrium>()?;
    m.add_class::<PyTau0Verdict>()?;
    m.add_class::<PyHopfReport>()?;
    m.add_class::<PyTrajectory>()?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(tau0_stability, m)?)?;
    m.add_function(wrap_pyfunction!(hopf, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(find_crossing, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
