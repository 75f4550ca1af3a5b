//! Python bindings: event logs, Alpha+++ and classical Alpha discovery,
//! accepting Petri nets with replay and export.

use alphappp::petri::DotOptions;
use alphappp::{
    AcceptingPetriNet, CsvMapping, DfThreshold, DiscoveryConfig, Dfg, Error, EventLog, Trace, VariantFilter,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

fn py_err(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn from_json<'py>(py: Python<'py>, json: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (json,))
}

fn names(trace: &Trace) -> Vec<String> {
    trace.activities().iter().map(|a| a.to_string()).collect()
}

/// Overrides on top of a preset (or the first preset when none is named).
#[allow(clippy::too_many_arguments)]
pub fn build_config(
    preset: Option<&str>,
    d: Option<f64>,
    d_mode: Option<&str>,
    n: Option<u64>,
    b: Option<f64>,
    t: Option<f64>,
    r: Option<f64>,
    problem_threshold: Option<f64>,
    candidate_size_cap: Option<usize>,
) -> alphappp::Result<DiscoveryConfig> {
    let mut cfg = match preset {
        Some(p) => alphappp::preset(p)?,
        None => DiscoveryConfig::default(),
    };
    let value = d.unwrap_or(cfg.d.value);
    cfg.d = match d_mode {
        None => DfThreshold { value, ..cfg.d },
        Some("relative") => DfThreshold::relative(value),
        Some("absolute") => DfThreshold::absolute(value),
        Some(other) => {
            return Err(Error::InvalidConfig(format!(
                "d_mode must be `relative` or `absolute`, got `{other}`"
            )))
        }
    };
    cfg.n = n.unwrap_or(cfg.n);
    cfg.b = b.unwrap_or(cfg.b);
    cfg.t = t.unwrap_or(cfg.t);
    cfg.r = r.unwrap_or(cfg.r);
    cfg.problem_threshold = problem_threshold.unwrap_or(cfg.problem_threshold);
    if candidate_size_cap.is_some() {
        cfg.candidate_size_cap = candidate_size_cap;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A multiset of traces.
#[pyclass(name = "EventLog", module = "alphappp_py", frozen)]
pub struct PyEventLog {
    inner: EventLog,
}

#[pymethods]
impl PyEventLog {
    /// `EventLog([(["a", "b"], 3), (["a", "c"], 1)])`
    #[new]
    fn new(variants: Vec<(Vec<String>, u64)>) -> Self {
        let inner = EventLog::from_variants(variants.into_iter().map(|(t, c)| (Trace::from_names(t), c)));
        PyEventLog { inner }
    }

    /// Reads .xes, .xes.gz, .csv or canonical .json.
    #[staticmethod]
    #[pyo3(signature = (path, case_col=None, activity_col=None, timestamp_col=None, timestamp_format=None, delimiter=None))]
    fn read(
        py: Python<'_>,
        path: std::path::PathBuf,
        case_col: Option<String>,
        activity_col: Option<String>,
        timestamp_col: Option<String>,
        timestamp_format: Option<String>,
        delimiter: Option<char>,
    ) -> PyResult<Self> {
        let mut m = CsvMapping::default();
        if case_col.is_some() || activity_col.is_some() || timestamp_col.is_some() {
            m.timestamp_col = timestamp_col.filter(|c| !c.is_empty());
        }
        if let Some(c) = case_col {
            m.case_col = c;
        }
        if let Some(c) = activity_col {
            m.activity_col = c;
        }
        m.format = timestamp_format;
        if let Some(d) = delimiter {
            m.delimiter = d;
        }
        let inner = py.detach(|| EventLog::read_file(&path, Some(&m))).map_err(py_err)?;
        Ok(PyEventLog { inner })
    }

    /// Parses in-memory bytes; the format is picked from `name`'s extension.
    #[staticmethod]
    fn parse(data: &[u8], name: &str) -> PyResult<Self> {
        let inner = EventLog::parse_bytes(data, name, None).map_err(py_err)?;
        Ok(PyEventLog { inner })
    }

    #[staticmethod]
    fn from_json(json: &str) -> PyResult<Self> {
        Ok(PyEventLog {
            inner: EventLog::from_json(json).map_err(py_err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(py_err)
    }

    /// `{events, activities, traces, variants}`
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let json = serde_json::to_string(&self.inner.stats()).expect("stats serialize");
        from_json(py, &json)
    }

    /// Variants with counts, most frequent first.
    fn variants(&self) -> Vec<(Vec<String>, u64)> {
        self.inner
            .variants_by_frequency()
            .into_iter()
            .map(|(t, c)| (names(t), c))
            .collect()
    }

    fn activities(&self) -> Vec<String> {
        self.inner.activities().iter().map(|a| a.to_string()).collect()
    }

    fn top_variants(&self, k: usize) -> PyResult<Self> {
        self.filtered(VariantFilter::TopK(k))
    }

    fn coverage(&self, fraction: f64) -> PyResult<Self> {
        self.filtered(VariantFilter::Coverage(fraction))
    }

    /// Directly-follows arcs of the endpoint-augmented log.
    fn dfg(&self) -> Vec<(String, String, u64)> {
        let dfg = Dfg::from_log(&self.inner.ensure_augmented());
        dfg.arcs().map(|(a, b, w)| (a.to_string(), b.to_string(), w)).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.num_traces() as usize
    }

    fn __repr__(&self) -> String {
        let s = self.inner.stats();
        format!("EventLog(traces={}, variants={}, events={})", s.traces, s.variants, s.events)
    }
}

impl PyEventLog {
    fn filtered(&self, f: VariantFilter) -> PyResult<Self> {
        Ok(PyEventLog {
            inner: self.inner.filter_variants(f).map_err(py_err)?,
        })
    }
}

/// Accepting Petri net.
#[pyclass(name = "PetriNet", module = "alphappp_py", frozen)]
pub struct PyPetriNet {
    inner: AcceptingPetriNet,
}

#[pymethods]
impl PyPetriNet {
    #[getter]
    fn num_places(&self) -> usize {
        self.inner.net.num_places()
    }

    #[getter]
    fn num_transitions(&self) -> usize {
        self.inner.net.num_transitions()
    }

    /// Transition labels; silent transitions appear as `None`.
    fn transitions(&self) -> Vec<Option<String>> {
        self.inner
            .net
            .transitions()
            .map(|(_, t)| t.label().map(str::to_string))
            .collect()
    }

    fn to_pnml(&self) -> String {
        self.inner.to_pnml()
    }

    #[pyo3(signature = (fragments=false))]
    fn to_dot(&self, fragments: bool) -> String {
        self.inner.to_dot(&DotOptions { fragments })
    }

    /// Net structure as plain Python data.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let json = serde_json::to_string(&self.inner).expect("net serializes");
        from_json(py, &json)
    }

    /// Whole-net token replay of one trace of activity names.
    fn replay(&self, trace: Vec<String>) -> bool {
        self.inner.replay(Trace::from_names(trace).activities()).fits
    }

    /// Share of traces (with multiplicity) that replay.
    fn fitting_fraction(&self, log: &PyEventLog) -> f64 {
        self.inner.fitting_fraction(&log.inner)
    }

    /// Labels of transitions without any place, in greedy removal order
    /// (rarest in `log` first).
    fn disconnected(&self, log: &PyEventLog) -> Vec<String> {
        let counts = log.inner.activity_multiset();
        self.inner
            .greedy_removal_order(&counts)
            .into_iter()
            .filter_map(|t| self.inner.net.transition(t).and_then(|x| x.label()).map(str::to_string))
            .collect()
    }

    /// Copy without the first `k` transitions of the greedy order.
    fn remove_disconnected(&self, log: &PyEventLog, k: usize) -> PyResult<PyPetriNet> {
        let counts = log.inner.activity_multiset();
        let victims: Vec<_> = self.inner.greedy_removal_order(&counts).into_iter().take(k).collect();
        Ok(PyPetriNet {
            inner: self.inner.remove_transitions(&victims).map_err(py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "PetriNet(places={}, transitions={})",
            self.inner.net.num_places(),
            self.inner.net.num_transitions()
        )
    }
}

/// Alpha+++ discovery. Returns the net and the stage report as a dict.
#[pyfunction]
#[pyo3(signature = (log, preset=None, *, d=None, d_mode=None, n=None, b=None, t=None, r=None, problem_threshold=None, candidate_size_cap=None))]
#[allow(clippy::too_many_arguments)]
fn discover<'py>(
    py: Python<'py>,
    log: &PyEventLog,
    preset: Option<&str>,
    d: Option<f64>,
    d_mode: Option<&str>,
    n: Option<u64>,
    b: Option<f64>,
    t: Option<f64>,
    r: Option<f64>,
    problem_threshold: Option<f64>,
    candidate_size_cap: Option<usize>,
) -> PyResult<(PyPetriNet, Bound<'py, PyAny>)> {
    let cfg = build_config(preset, d, d_mode, n, b, t, r, problem_threshold, candidate_size_cap).map_err(py_err)?;
    let log = &log.inner;
    let (net, report) = py.detach(|| alphappp::discover_alphappp(log, &cfg)).map_err(py_err)?;
    let report = from_json(py, &serde_json::to_string(&report).expect("report serializes"))?;
    Ok((PyPetriNet { inner: net }, report))
}

/// Classical Alpha on the unaugmented log.
#[pyfunction]
fn discover_alpha(py: Python<'_>, log: &PyEventLog) -> PyResult<PyPetriNet> {
    let log = &log.inner;
    let net = py.detach(|| alphappp::discover_alpha_classic(log)).map_err(py_err)?;
    Ok(PyPetriNet { inner: net })
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    alphappp::PRESET_NAMES.to_vec()
}

#[pymodule]
fn alphappp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEventLog>()?;
    m.add_class::<PyPetriNet>()?;
    m.add_function(wrap_pyfunction!(discover, m)?)?;
    m.add_function(wrap_pyfunction!(discover_alpha, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    Ok(())
}
