//! Python bindings: the `hpqc` module.

use std::collections::BTreeMap;
use std::path::PathBuf;

use hpqc_core::allocator::{
    LogoffOutcome, Mainframe as CoreMainframe, PersistHandle, SessionId, SessionMode,
};
use hpqc_core::geometry::{CellCoord, LatticeDims, LogicalFootprint};
use hpqc_core::protocol::MeasurementInstruction;
use hpqc_core::resources::ChipCostModel;
use hpqc_core::runner::verify::{desk_mainframe, run_verify, Suite};
use hpqc_core::runner::{self, RunReport, Scenario};
use hpqc_core::stabilizer::PauliBasis;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn machine_fields(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn parse_basis(name: &str) -> PyResult<PauliBasis> {
    match name {
        "X" | "x" => Ok(PauliBasis::X),
        "Y" | "y" => Ok(PauliBasis::Y),
        "Z" | "z" => Ok(PauliBasis::Z),
        "A" | "a" => Ok(PauliBasis::AncillaA),
        "ancilla_y" => Ok(PauliBasis::AncillaY),
        other => Err(value_err(format!("unknown basis {other:?}"))),
    }
}

/// Chips and logical qubits for a `width` x `depth` region.
#[pyfunction]
#[pyo3(signature = (width, depth, footprint = (20, 40), chips_per_logical = 3000))]
fn estimate(
    width: u64,
    depth: u64,
    footprint: (u64, u64),
    chips_per_logical: u64,
) -> PyResult<BTreeMap<String, String>> {
    let fp = LogicalFootprint::new(footprint.0, footprint.1).map_err(value_err)?;
    let model = ChipCostModel::new(chips_per_logical, fp).map_err(value_err)?;
    let e = runner::estimate(width, depth, model).map_err(value_err)?;
    Ok(machine_fields(&e.machine()))
}

#[pyclass(module = "hpqc", name = "ScenarioReport", frozen)]
struct PyScenarioReport {
    report: RunReport,
}

#[pymethods]
impl PyScenarioReport {
    #[getter]
    fn passed(&self) -> bool {
        self.report.passed()
    }

    #[getter]
    fn failures(&self) -> Vec<String> {
        self.report.failures.clone()
    }

    #[getter]
    fn consumed(&self) -> u128 {
        self.report.budget.consumed()
    }

    #[getter]
    fn log_cross_sum(&self) -> u128 {
        self.report.log_cross_sum
    }

    fn fields(&self) -> BTreeMap<String, String> {
        self.report.fields().into_iter().collect()
    }

    fn machine(&self) -> String {
        self.report.machine()
    }

    fn text(&self) -> String {
        self.report.text()
    }

    fn __repr__(&self) -> String {
        let verdict = if self.report.passed() { "PASS" } else { "FAIL" };
        format!("<ScenarioReport {} {verdict}>", self.report.name)
    }
}

/// Run a scenario file. The seed falls back to the file's own seed.
#[pyfunction]
#[pyo3(signature = (path, seed = None))]
fn run_scenario(path: PathBuf, seed: Option<u64>) -> PyResult<PyScenarioReport> {
    let scenario = Scenario::load(&path).map_err(value_err)?;
    let seed = runner::resolve_seed(seed, scenario.seed, None).map_err(value_err)?;
    let base = path.parent().map(|p| p.to_path_buf());
    let report = runner::run_scenario(&scenario, seed, base.as_deref()).map_err(value_err)?;
    Ok(PyScenarioReport { report })
}

/// Run verification suites. Returns `(passed, text)`.
#[pyfunction]
#[pyo3(signature = (suites = None, trials = 200, seed = 0))]
fn verify(suites: Option<Vec<String>>, trials: u64, seed: u64) -> PyResult<(bool, String)> {
    let suites: Vec<Suite> = match suites {
        None => Suite::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Suite>().map_err(value_err))
            .collect::<PyResult<_>>()?,
    };
    let report = run_verify(&suites, trials, seed);
    Ok((report.passed(), report.text()))
}

/// A desk-scale mainframe with two user regions per column pair and one
/// logical qubit per cell.
#[pyclass(module = "hpqc", name = "Mainframe")]
struct PyMainframe {
    inner: CoreMainframe,
}

fn mainframe_err(e: hpqc_core::allocator::MainframeError) -> PyErr {
    PyRuntimeError::new_err(format!("{}: {e}", e.kind()))
}

#[pymethods]
impl PyMainframe {
    #[new]
    #[pyo3(signature = (seed, width, depth, layers = 1, users_per_column = 1))]
    fn new(seed: u64, width: u64, depth: u64, layers: u64, users_per_column: u64) -> PyResult<Self> {
        let dims = LatticeDims::new(width, depth, layers).map_err(value_err)?;
        let inner = desk_mainframe(seed, dims, users_per_column).map_err(mainframe_err)?;
        Ok(Self { inner })
    }

    #[pyo3(signature = (user, logical = 1, secure = false))]
    fn admit(&mut self, user: &str, logical: u64, secure: bool) -> PyResult<u64> {
        let mode = if secure { SessionMode::SecureQuantum } else { SessionMode::Trusted };
        let id = self.inner.admit(user, mode, logical).map_err(mainframe_err)?;
        Ok(id.0)
    }

    /// Returns the region as `(x, y, z, width, depth, layers)`.
    #[pyo3(signature = (session, logical = 1))]
    fn allocate(&mut self, session: u64, logical: u64) -> PyResult<(u64, u64, u64, u64, u64, u64)> {
        let r = self.inner.allocate(SessionId(session), logical).map_err(mainframe_err)?;
        Ok((r.origin.x, r.origin.y, r.origin.z, r.dims.width(), r.dims.depth(), r.dims.layers()))
    }

    fn sever(&mut self, session: u64) -> PyResult<()> {
        self.inner.sever(SessionId(session)).map_err(mainframe_err)?;
        Ok(())
    }

    fn start(&mut self, session: u64) -> PyResult<()> {
        self.inner.start(SessionId(session)).map_err(mainframe_err)
    }

    /// Returns the persistence handle, or `None` for a wiping logoff.
    #[pyo3(signature = (session, persist = false))]
    fn logoff(&mut self, session: u64, persist: bool) -> PyResult<Option<u64>> {
        match self.inner.logoff(SessionId(session), persist).map_err(mainframe_err)? {
            LogoffOutcome::Closed => Ok(None),
            LogoffOutcome::Persisted(rec) => Ok(Some(rec.handle.0)),
        }
    }

    fn reattach(&mut self, handle: u64, session: u64) -> PyResult<()> {
        self.inner
            .reattach(PersistHandle(handle), SessionId(session))
            .map_err(mainframe_err)?;
        Ok(())
    }

    fn advance_layers(&mut self, layers: u64) -> PyResult<u128> {
        self.inner.advance_layers(layers).map_err(mainframe_err)
    }

    /// Brokers a Bell link; returns the entropy across each user/corridor cut.
    fn bell(&mut self, a: u64, b: u64) -> PyResult<Option<(usize, usize)>> {
        let link = self.inner.bell_broker(SessionId(a), SessionId(b)).map_err(mainframe_err)?;
        Ok(link.cut_entropy)
    }

    fn region_entropy(&self, session: u64) -> PyResult<Option<usize>> {
        self.inner.region_entropy(SessionId(session)).map_err(mainframe_err)
    }

    fn state(&self, session: u64) -> PyResult<String> {
        let s = self.inner.session(SessionId(session)).map_err(mainframe_err)?;
        Ok(s.state.to_string())
    }

    /// Measures `(x, y, z, basis)` cells in the session's region and returns
    /// eigenvalues as +1 / -1.
    fn measure(&mut self, session: u64, cells: Vec<(u64, u64, u64, String)>) -> PyResult<Vec<i8>> {
        let id = SessionId(session);
        let stream = cells
            .iter()
            .map(|(x, y, z, b)| Ok(MeasurementInstruction::new(CellCoord::new(*x, *y, *z), parse_basis(b)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let mode = self.inner.session(id).map_err(mainframe_err)?.mode;
        let outcomes = match mode {
            SessionMode::Trusted => self.inner.run_trusted(id, &stream),
            SessionMode::SecureQuantum => self.inner.run_secure(id, &stream),
        }
        .map_err(mainframe_err)?;
        Ok(outcomes.iter().map(|o| o.value()).collect())
    }

    #[getter]
    fn consumed(&self) -> u128 {
        self.inner.budget().consumed()
    }

    #[getter]
    fn layer(&self) -> u64 {
        self.inner.layer()
    }

    fn event_log(&self) -> String {
        self.inner.log().to_text()
    }

    fn check_invariants(&self) -> Vec<String> {
        self.inner.check_invariants()
    }
}

#[pymodule]
fn hpqc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(estimate, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<PyScenarioReport>()?;
    m.add_class::<PyMainframe>()?;
    Ok(())
}
