//! Python bindings. Import as `infrasense_py`.

use std::path::PathBuf;

use infrasense::aggregation::{snapshot_geojson, MatchPolicy, SegmentStore};
use infrasense::config::PipelineConfig;
use infrasense::dissemination::{
    decode_packet as core_decode, encode_packet as core_encode, read_scenario, AnomalyReport, SimConfig, Simulation,
};
use infrasense::features::{extract_features, FeatureId};
use infrasense::geo::LatLon;
use infrasense::pipeline::{analyze_trace, Analysis};
use infrasense::rail::{cant_angle as core_cant, TrackConstants};
use infrasense::road::{simulate_quarter_car as core_qc, IndicatorKind, QuarterCar, RoadProfile};
use infrasense::synth::{synthesize, write_trace_csv, SynthSpec};
use infrasense::trace::{parse_trace, Axis, TraceFormat};
use infrasense::transforms::{self, BandSelection, EmdConfig, Scheme, Wavelet, WaveletDecomposition};
use infrasense::Error;
use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

create_exception!(infrasense_py, InfrasenseError, PyException, "Raised for every library error; the message starts with the error kind.");

fn err(e: Error) -> PyErr {
    InfrasenseError::new_err(format!("{}: {e}", e.kind()))
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).expect("json serializes");
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

#[pyclass(name = "Trace", module = "infrasense_py", skip_from_py_object)]
#[derive(Clone)]
struct PyTrace {
    inner: infrasense::trace::Trace,
}

#[pymethods]
impl PyTrace {
    /// Read a CSV or JSONL trace file.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let (inner, _) = parse_trace(&path, TraceFormat::from_path(&path)).map_err(err)?;
        Ok(PyTrace { inner })
    }

    /// Generate a synthetic ride from a TOML spec string.
    #[staticmethod]
    fn synthesize(spec: &str) -> PyResult<Self> {
        let spec = SynthSpec::from_toml_str(spec).map_err(err)?;
        Ok(PyTrace { inner: synthesize(&spec).map_err(err)? })
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.nominal_rate
    }

    #[getter]
    fn duration(&self) -> f64 {
        self.inner.duration()
    }

    #[getter]
    fn n_fixes(&self) -> usize {
        self.inner.fixes.len()
    }

    #[getter]
    fn has_gyro(&self) -> bool {
        self.inner.has_gyro()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn times(&self) -> Vec<f64> {
        self.inner.times()
    }

    /// Accelerometer axis `"x"`, `"y"` or `"z"`, m/s².
    fn accel(&self, axis: &str) -> PyResult<Vec<f64>> {
        let axis = match axis {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            other => return Err(InfrasenseError::new_err(format!("domain: unknown axis `{other}`"))),
        };
        Ok(self.inner.accel_axis(axis))
    }

    fn to_csv(&self) -> PyResult<String> {
        let mut out = Vec::new();
        write_trace_csv(&mut out, &self.inner).map_err(err)?;
        Ok(String::from_utf8(out).expect("csv is utf-8"))
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(samples={}, fixes={}, rate={} Hz)",
            self.inner.samples.len(),
            self.inner.fixes.len(),
            self.inner.nominal_rate
        )
    }
}

#[pyclass(name = "Config", module = "infrasense_py", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: PipelineConfig,
}

#[pymethods]
impl PyConfig {
    #[new]
    #[pyo3(signature = (toml = ""))]
    fn new(toml: &str) -> PyResult<Self> {
        Ok(PyConfig { inner: PipelineConfig::from_toml_str(toml).map_err(err)? })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PyConfig { inner: PipelineConfig::load(&path).map_err(err)? })
    }

    #[getter]
    fn context(&self) -> String {
        self.inner.context.to_string()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    fn to_dict(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        json_to_py(py, &serde_json::to_value(&self.inner).expect("config serializes"))
    }
}

#[pyclass(name = "Indicator", module = "infrasense_py", get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyIndicator {
    kind: String,
    sub_kind: String,
    lat: f64,
    lon: f64,
    t: f64,
    severity: u8,
    confidence: f64,
    value: f64,
    unit: String,
}

impl From<&infrasense::road::Indicator> for PyIndicator {
    fn from(i: &infrasense::road::Indicator) -> Self {
        PyIndicator {
            kind: i.kind.to_string(),
            sub_kind: i.sub_kind.clone(),
            lat: i.lat,
            lon: i.lon,
            t: i.t,
            severity: i.severity,
            confidence: i.confidence,
            value: i.value,
            unit: i.unit.clone(),
        }
    }
}

impl PyIndicator {
    fn to_core(&self) -> PyResult<infrasense::road::Indicator> {
        Ok(infrasense::road::Indicator {
            kind: parse::<IndicatorKind>(&self.kind)?,
            sub_kind: self.sub_kind.clone(),
            lat: self.lat,
            lon: self.lon,
            t: self.t,
            severity: self.severity,
            confidence: self.confidence,
            value: self.value,
            unit: self.unit.clone(),
        })
    }
}

#[pymethods]
impl PyIndicator {
    #[new]
    #[pyo3(signature = (kind, lat, lon, t, value, severity = 0, confidence = 1.0, sub_kind = String::new(), unit = String::new()))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        kind: &str,
        lat: f64,
        lon: f64,
        t: f64,
        value: f64,
        severity: u8,
        confidence: f64,
        sub_kind: String,
        unit: String,
    ) -> PyResult<Self> {
        parse::<IndicatorKind>(kind)?;
        Ok(PyIndicator { kind: kind.into(), sub_kind, lat, lon, t, severity, confidence, value, unit })
    }

    fn __repr__(&self) -> String {
        format!(
            "Indicator({} {} at ({:.6}, {:.6}), t={:.2}, value={:.3} {})",
            self.kind, self.sub_kind, self.lat, self.lon, self.t, self.value, self.unit
        )
    }
}

#[pyclass(name = "Analysis", module = "infrasense_py")]
struct PyAnalysis {
    inner: Analysis,
}

#[pymethods]
impl PyAnalysis {
    #[getter]
    fn context(&self) -> String {
        self.inner.context.to_string()
    }

    #[getter]
    fn indicators(&self) -> Vec<PyIndicator> {
        self.inner.indicators.iter().map(PyIndicator::from).collect()
    }

    #[getter]
    fn notes(&self) -> Vec<String> {
        self.inner.notes.clone()
    }

    #[getter]
    fn forward_determined(&self) -> bool {
        self.inner.forward_determined
    }

    /// `(start_m, index_m_per_km)` per reported road segment.
    fn roughness(&self) -> Vec<(f64, f64)> {
        self.inner
            .roughness
            .as_ref()
            .map(|r| r.reports.iter().map(|s| (s.start, s.index)).collect())
            .unwrap_or_default()
    }

    /// `(s, cant_mm, curvature)` per rail geometry point.
    fn geometry(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .geometry
            .as_ref()
            .map(|g| g.points.iter().map(|p| (p.s, p.cant_height, p.curvature)).collect())
            .unwrap_or_default()
    }

    fn features_csv(&self) -> PyResult<String> {
        let mut out = Vec::new();
        self.inner.features.write_csv(&mut out).map_err(err)?;
        Ok(String::from_utf8(out).expect("csv is utf-8"))
    }
}

/// Run the road or rail service bundle selected by the config.
#[pyfunction]
#[pyo3(signature = (trace, config = None))]
fn analyze(trace: &PyTrace, config: Option<&PyConfig>) -> PyResult<PyAnalysis> {
    let cfg = config.map(|c| c.inner.clone()).unwrap_or_default();
    Ok(PyAnalysis { inner: analyze_trace(&trace.inner, &cfg).map_err(err)? })
}

/// Decimated DWT. Returns `(approx, details)` with `details[0]` the finest level.
#[pyfunction]
#[pyo3(signature = (signal, levels, wavelet = "db4"))]
fn wavedec(signal: Vec<f64>, levels: usize, wavelet: &str) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let d = transforms::wavedec(&signal, parse(wavelet)?, levels).map_err(err)?;
    Ok((d.approx, d.details))
}

/// Inverse of `wavedec`; `length` is the original signal length.
#[pyfunction]
#[pyo3(signature = (approx, details, length, wavelet = "db4"))]
fn waverec(approx: Vec<f64>, details: Vec<Vec<f64>>, length: usize, wavelet: &str) -> PyResult<Vec<f64>> {
    let mut level_lengths = Vec::with_capacity(details.len());
    let mut n = length;
    for _ in 0..details.len() {
        level_lengths.push(n);
        n = n.div_ceil(2);
    }
    let dec = WaveletDecomposition {
        details,
        approx,
        wavelet: parse(wavelet)?,
        scheme: Scheme::Decimated,
        level_lengths,
        original_len: length,
    };
    transforms::waverec(&dec).map_err(err)
}

/// Stationary wavelet transform followed by a reconstruction from the kept
/// bands. `keep` lists 1-based detail levels; `None` keeps all of them.
#[pyfunction]
#[pyo3(signature = (signal, levels, keep = None, keep_approx = true, wavelet = "db4"))]
fn swt_band(signal: Vec<f64>, levels: usize, keep: Option<Vec<usize>>, keep_approx: bool, wavelet: &str) -> PyResult<Vec<f64>> {
    let dec = transforms::swt(&signal, parse::<Wavelet>(wavelet)?, levels).map_err(err)?;
    let sel = BandSelection { details: keep.unwrap_or_else(|| (1..=levels).collect()), approx: keep_approx };
    transforms::swt_band_reconstruct(&dec, &sel).map_err(err)
}

/// Empirical mode decomposition. Returns `(imfs, residue)`.
#[pyfunction]
#[pyo3(signature = (signal, max_imfs = 10, sift_stop = 0.05))]
fn emd(signal: Vec<f64>, max_imfs: usize, sift_stop: f64) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let cfg = EmdConfig { max_imfs, sift_stop, ..Default::default() };
    let set = transforms::emd(&signal, &cfg).map_err(err)?;
    Ok((set.imfs, set.residue))
}

/// Window statistics by name; all ten when `names` is omitted.
#[pyfunction]
#[pyo3(signature = (window, names = None))]
fn features(window: Vec<f64>, names: Option<Vec<String>>) -> PyResult<Vec<(String, f64)>> {
    let set: Vec<FeatureId> = match names {
        Some(n) => n.iter().map(|s| parse::<FeatureId>(s)).collect::<PyResult<_>>()?,
        None => FeatureId::ALL.to_vec(),
    };
    let v = extract_features(&window, &set).map_err(err)?;
    Ok(set.iter().map(|id| id.to_string()).zip(v.values).collect())
}

/// Cant angle in radians for a rail elevation difference in mm.
#[pyfunction]
#[pyo3(signature = (h_mm, rail_center_width = 1500.0))]
fn cant_angle(h_mm: f64, rail_center_width: f64) -> PyResult<f64> {
    let consts = TrackConstants { rail_center_width, ..Default::default() };
    core_cant(h_mm, &consts).map_err(err)
}

/// Sprung-mass acceleration of the default quarter-car over a profile
/// sampled every `spacing` meters.
#[pyfunction]
#[pyo3(signature = (elevations, spacing, speed, rate = 100.0))]
fn simulate_quarter_car(elevations: Vec<f64>, spacing: f64, speed: f64, rate: f64) -> PyResult<Vec<f64>> {
    core_qc(&RoadProfile { spacing, elevations }, speed, &QuarterCar::default(), rate).map_err(err)
}

/// Pack reports `(lat, lon, kind, severity, confidence)` into a 32-character SSID.
#[pyfunction]
fn encode_packet(origin: (f64, f64), reports: Vec<(f64, f64, u8, u8, f64)>) -> PyResult<String> {
    let origin = LatLon::new(origin.0, origin.1).map_err(err)?;
    let reports: Vec<AnomalyReport> = reports
        .into_iter()
        .map(|(lat, lon, kind, severity, confidence)| AnomalyReport {
            location: LatLon { lat, lon },
            kind,
            severity,
            confidence,
        })
        .collect();
    Ok(core_encode(origin, &reports).map_err(err)?.ssid)
}

#[pyfunction]
fn decode_packet(py: Python<'_>, ssid: &str) -> PyResult<Py<PyAny>> {
    let p = core_decode(ssid).map_err(err)?;
    let entries: Vec<_> = p
        .entries
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let loc = p.entry_location(i).expect("entry exists");
            serde_json::json!({
                "d_north": e.d_north, "d_east": e.d_east, "kind": e.kind,
                "severity": e.severity, "confidence": e.confidence,
                "lat": loc.lat, "lon": loc.lon,
            })
        })
        .collect();
    let v = serde_json::json!({
        "version": p.version, "flags": p.flags, "checksum": p.checksum,
        "origin": [p.origin().lat, p.origin().lon], "entries": entries,
    });
    json_to_py(py, &v)
}

#[pyclass(name = "SegmentStore", module = "infrasense_py")]
struct PySegmentStore {
    inner: SegmentStore,
}

#[pymethods]
impl PySegmentStore {
    /// In-memory store, or a journal-backed one when `path` is given.
    #[new]
    #[pyo3(signature = (path = None, radius = 15.0, half_life = 30.0 * 86_400.0))]
    fn new(path: Option<PathBuf>, radius: f64, half_life: f64) -> PyResult<Self> {
        let policy = MatchPolicy { radius, half_life };
        let inner = match path {
            Some(p) => SegmentStore::open(&p, policy),
            None => SegmentStore::new(policy),
        }
        .map_err(err)?;
        Ok(PySegmentStore { inner })
    }

    /// Match and fuse one indicator; returns the anchor id, or `None` when
    /// the value was rejected.
    #[pyo3(signature = (indicator, device = None))]
    fn add(&mut self, indicator: &PyIndicator, device: Option<&str>) -> PyResult<Option<u64>> {
        self.inner.add(&indicator.to_core()?, device).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// GeoJSON FeatureCollection of the anchors, optionally of one kind.
    #[pyo3(signature = (kind = None))]
    fn snapshot(&self, py: Python<'_>, kind: Option<&str>) -> PyResult<Py<PyAny>> {
        let kind = kind.map(parse::<IndicatorKind>).transpose()?;
        let states = self.inner.snapshot(kind, None).map_err(err)?;
        json_to_py(py, &snapshot_geojson(&states))
    }

    fn flush(&mut self) -> PyResult<()> {
        self.inner.flush().map_err(err)
    }
}

/// Run the beacon simulator over a JSONL scenario string. Returns the
/// delivery log as `(t, from_id, to_id, checksum)` tuples.
#[pyfunction]
#[pyo3(signature = (scenario, seed = 0, duration = 300.0, period = 10.0, range = 50.0, dt = 1.0))]
fn simulate(scenario: &str, seed: u64, duration: f64, period: f64, range: f64, dt: f64) -> PyResult<Vec<(f64, String, String, u16)>> {
    let specs = read_scenario(scenario.as_bytes()).map_err(err)?;
    let mut sim = Simulation::new(&specs, SimConfig { dt, range, period, duration }, seed).map_err(err)?;
    sim.run();
    Ok(sim
        .log()
        .iter()
        .map(|d| (d.step as f64 * dt, sim.nodes[d.from].id.clone(), sim.nodes[d.to].id.clone(), d.checksum))
        .collect())
}

#[pymodule]
fn infrasense_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("InfrasenseError", m.py().get_type::<InfrasenseError>())?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyIndicator>()?;
    m.add_class::<PyAnalysis>()?;
    m.add_class::<PySegmentStore>()?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(wavedec, m)?)?;
    m.add_function(wrap_pyfunction!(waverec, m)?)?;
    m.add_function(wrap_pyfunction!(swt_band, m)?)?;
    m.add_function(wrap_pyfunction!(emd, m)?)?;
    m.add_function(wrap_pyfunction!(features, m)?)?;
    m.add_function(wrap_pyfunction!(cant_angle, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_quarter_car, m)?)?;
    m.add_function(wrap_pyfunction!(encode_packet, m)?)?;
    m.add_function(wrap_pyfunction!(decode_packet, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
