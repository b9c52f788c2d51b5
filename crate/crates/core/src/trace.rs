//! Trace data model and inertial preprocessing.
//!
//! A [`Trace`] holds one ride: device-frame accelerometer samples (gravity
//! included), optional gyroscope readings, and GPS fixes. The declared
//! sampling rate of a phone is not trusted, so parsing infers it from the
//! median sample spacing and [`resample`] puts everything on a uniform grid
//! before fixed-length windowing.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use nalgebra::{Rotation3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::LatLon;

pub type Vec3 = [f64; 3];

/// Standard gravity, m/s².
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Accuracy assigned to fixes whose `acc` column is empty, meters.
pub const DEFAULT_FIX_ACCURACY_M: f64 = 10.0;

/// Forward-axis inference ignores epochs slower than this, m/s.
pub const FORWARD_SPEED_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertialSample {
    pub t: f64,
    pub accel: Vec3,
    pub gyro: Option<Vec3>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoFix {
    pub t: f64,
    pub lat: f64,
    pub lon: f64,
    /// Ground speed, m/s.
    pub speed: f64,
    /// Estimated horizontal error, m.
    pub accuracy: f64,
}

impl GeoFix {
    pub fn location(&self) -> LatLon {
        LatLon {
            lat: self.lat,
            lon: self.lon,
        }
    }

    fn is_valid(&self) -> bool {
        self.location().is_valid()
            && self.t.is_finite()
            && self.speed.is_finite()
            && self.speed >= 0.0
            && self.accuracy.is_finite()
            && self.accuracy > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub samples: Vec<InertialSample>,
    pub fixes: Vec<GeoFix>,
    /// Declared (or inferred) sampling rate, Hz.
    pub nominal_rate: f64,
    pub meta: String,
}

impl Trace {
    pub fn new(
        mut samples: Vec<InertialSample>,
        mut fixes: Vec<GeoFix>,
        nominal_rate: f64,
        meta: impl Into<String>,
    ) -> Result<Self> {
        if !(nominal_rate.is_finite() && nominal_rate > 0.0) {
            return Err(Error::Domain(format!("nominal rate must be positive, got {nominal_rate}")));
        }
        if samples.len() < 2 {
            return Err(Error::EmptyTrace(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        fixes.sort_by(|a, b| a.t.total_cmp(&b.t));
        Ok(Trace {
            samples,
            fixes,
            nominal_rate,
            meta: meta.into(),
        })
    }

    pub fn has_gyro(&self) -> bool {
        !self.samples.is_empty() && self.samples.iter().all(|s| s.gyro.is_some())
    }

    pub fn start_time(&self) -> f64 {
        self.samples.first().map_or(0.0, |s| s.t)
    }

    pub fn end_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn accel_axis(&self, axis: Axis) -> Vec<f64> {
        self.samples.iter().map(|s| s.accel[axis.index()]).collect()
    }

    /// Gyro readings for one axis; `None` when any sample lacks gyro.
    pub fn gyro_axis(&self, axis: Axis) -> Option<Vec<f64>> {
        self.samples
            .iter()
            .map(|s| s.gyro.map(|g| g[axis.index()]))
            .collect()
    }

    /// Ground speed interpolated at every sample time (0 when no fixes).
    pub fn speed_at_samples(&self) -> Vec<f64> {
        let times: Vec<f64> = self.fixes.iter().map(|f| f.t).collect();
        let speeds: Vec<f64> = self.fixes.iter().map(|f| f.speed).collect();
        self.samples
            .iter()
            .map(|s| interp_clamped(&times, &speeds, s.t).unwrap_or(0.0))
            .collect()
    }

    /// Location interpolated linearly between the fixes bracketing `t`.
    pub fn location_at(&self, t: f64) -> Option<LatLon> {
        interpolate_fix_location(&self.fixes, t)
    }
}

/// Linear interpolation of a fix stream's position at `t`, clamped to the
/// first/last fix outside the covered interval.
pub fn interpolate_fix_location(fixes: &[GeoFix], t: f64) -> Option<LatLon> {
    let times: Vec<f64> = fixes.iter().map(|f| f.t).collect();
    let lat: Vec<f64> = fixes.iter().map(|f| f.lat).collect();
    let lon: Vec<f64> = fixes.iter().map(|f| f.lon).collect();
    Some(LatLon {
        lat: interp_clamped(&times, &lat, t)?,
        lon: interp_clamped(&times, &lon, t)?,
    })
}

/// Piecewise-linear interpolation over sorted `xs`, clamped at both ends.
pub(crate) fn interp_clamped(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    let n = xs.len();
    if n == 0 {
        return None;
    }
    if x <= xs[0] {
        return Some(ys[0]);
    }
    if x >= xs[n - 1] {
        return Some(ys[n - 1]);
    }
    let j = xs.partition_point(|&v| v <= x);
    let (x0, x1) = (xs[j - 1], xs[j]);
    let (y0, y1) = (ys[j - 1], ys[j]);
    if x1 == x0 {
        return Some(y0);
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Jsonl,
}

impl TraceFormat {
    /// Guess from the file extension; anything other than `.jsonl`/`.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") | Some("ndjson") => TraceFormat::Jsonl,
            _ => TraceFormat::Csv,
        }
    }
}

/// Bookkeeping produced by [`parse_trace`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ParseReport {
    pub rows_read: usize,
    pub rows_dropped: usize,
    pub reordered: usize,
    pub fixes: usize,
    pub fixes_dropped: usize,
}

const REQUIRED_COLUMNS: [&str; 4] = ["t", "ax", "ay", "az"];
const COLUMNS: [&str; 11] = ["t", "ax", "ay", "az", "gx", "gy", "gz", "lat", "lon", "speed", "acc"];

/// One decoded row before validation; `None` means an empty cell.
#[derive(Default)]
struct RawRow([Option<f64>; 11]);

impl RawRow {
    fn get(&self, name: &str) -> Option<f64> {
        COLUMNS.iter().position(|c| *c == name).and_then(|i| self.0[i])
    }
}

enum RowOutcome {
    Sample(InertialSample, Option<GeoFix>, bool),
    Dropped,
}

fn convert_row(row: &RawRow) -> RowOutcome {
    let (Some(t), Some(ax), Some(ay), Some(az)) = (row.get("t"), row.get("ax"), row.get("ay"), row.get("az")) else {
        return RowOutcome::Dropped;
    };
    if ![t, ax, ay, az].iter().all(|v| v.is_finite()) {
        return RowOutcome::Dropped;
    }
    let gyro = match (row.get("gx"), row.get("gy"), row.get("gz")) {
        (Some(x), Some(y), Some(z)) => {
            if ![x, y, z].iter().all(|v| v.is_finite()) {
                return RowOutcome::Dropped;
            }
            Some([x, y, z])
        }
        _ => None,
    };
    let mut fix_dropped = false;
    let fix = match (row.get("lat"), row.get("lon")) {
        (Some(lat), Some(lon)) => {
            let fix = GeoFix {
                t,
                lat,
                lon,
                speed: row.get("speed").unwrap_or(0.0),
                accuracy: row.get("acc").filter(|a| *a > 0.0).unwrap_or(DEFAULT_FIX_ACCURACY_M),
            };
            if fix.is_valid() {
                Some(fix)
            } else {
                fix_dropped = true;
                None
            }
        }
        _ => None,
    };
    RowOutcome::Sample(
        InertialSample {
            t,
            accel: [ax, ay, az],
            gyro,
        },
        fix,
        fix_dropped,
    )
}

fn parse_cell(cell: &str) -> std::result::Result<Option<f64>, ()> {
    let cell = cell.trim();
    if cell.is_empty() {
        return Ok(None);
    }
    cell.parse::<f64>().map(Some).map_err(|_| ())
}

fn read_csv_rows(path: &Path) -> Result<Vec<Option<RawRow>>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let mut index = [None; 11];
    for (i, h) in headers.iter().enumerate() {
        if let Some(c) = COLUMNS.iter().position(|c| *c == h) {
            index[c] = Some(i);
        }
    }
    let missing: Vec<&str> = REQUIRED_COLUMNS
        .iter()
        .enumerate()
        .filter(|(i, _)| index[*i].is_none())
        .map(|(_, c)| *c)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Schema(format!("missing required columns: {}", missing.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let mut raw = RawRow::default();
        let mut ok = true;
        for (c, idx) in index.iter().enumerate() {
            if let Some(i) = idx {
                match parse_cell(record.get(*i).unwrap_or("")) {
                    Ok(v) => raw.0[c] = v,
                    Err(()) => ok = false,
                }
            }
        }
        rows.push(ok.then_some(raw));
    }
    Ok(rows)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Schema(format!("{other:?}")),
        }
    } else {
        Error::Schema(format!("{}: {e}", path.display()))
    }
}

fn read_jsonl_rows(path: &Path) -> Result<Vec<Option<RawRow>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    let mut saw_required = [false; 4];
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::Schema(format!("line {}: {e}", lineno + 1)))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Schema(format!("line {}: expected a JSON object", lineno + 1)))?;
        let mut raw = RawRow::default();
        let mut ok = true;
        for (c, name) in COLUMNS.iter().enumerate() {
            match obj.get(*name) {
                None | Some(serde_json::Value::Null) => {}
                Some(serde_json::Value::Number(n)) => {
                    if c < 4 {
                        saw_required[c] = true;
                    }
                    raw.0[c] = n.as_f64();
                }
                Some(serde_json::Value::String(s)) => match parse_cell(s) {
                    Ok(v) => {
                        if c < 4 {
                            saw_required[c] = true;
                        }
                        raw.0[c] = v;
                    }
                    Err(()) => ok = false,
                },
                Some(_) => ok = false,
            }
        }
        rows.push(ok.then_some(raw));
    }
    if !rows.is_empty() && saw_required.iter().any(|s| !s) {
        let missing: Vec<&str> = REQUIRED_COLUMNS
            .iter()
            .zip(saw_required)
            .filter(|(_, s)| !s)
            .map(|(c, _)| *c)
            .collect();
        return Err(Error::Schema(format!("missing required keys: {}", missing.join(","))));
    }
    Ok(rows)
}

/// Parse a recorded trace. Rows with unparsable or non-finite values are
/// dropped and counted; the sampling rate is inferred from the median spacing.
pub fn parse_trace(path: &Path, format: TraceFormat) -> Result<(Trace, ParseReport)> {
    let rows = match format {
        TraceFormat::Csv => read_csv_rows(path)?,
        TraceFormat::Jsonl => read_jsonl_rows(path)?,
    };
    let mut report = ParseReport {
        rows_read: rows.len(),
        ..Default::default()
    };
    let mut samples = Vec::with_capacity(rows.len());
    let mut fixes = Vec::new();
    for row in rows {
        match row.as_ref().map(convert_row) {
            Some(RowOutcome::Sample(s, fix, fix_dropped)) => {
                samples.push(s);
                if let Some(f) = fix {
                    fixes.push(f);
                }
                report.fixes_dropped += fix_dropped as usize;
            }
            _ => report.rows_dropped += 1,
        }
    }
    if samples.len() < 2 {
        return Err(Error::EmptyTrace(format!(
            "{} usable rows in {} (need at least 2)",
            samples.len(),
            path.display()
        )));
    }
    report.reordered = samples.windows(2).filter(|w| w[1].t < w[0].t).count();
    samples.sort_by(|a, b| a.t.total_cmp(&b.t));
    report.fixes = fixes.len();
    let rate = infer_rate(&samples)?;
    let meta = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("trace")
        .to_string();
    Ok((Trace::new(samples, fixes, rate, meta)?, report))
}

/// Rate implied by the median positive spacing of sorted samples.
pub fn infer_rate(samples: &[InertialSample]) -> Result<f64> {
    let mut dts: Vec<f64> = samples
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .filter(|d| *d > 0.0)
        .collect();
    if dts.is_empty() {
        return Err(Error::Schema("all samples share one timestamp".into()));
    }
    let dt = median(&mut dts);
    Ok(1.0 / dt)
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Centered moving average; the window shrinks at the edges.
fn moving_average(x: &[f64], width: usize) -> Vec<f64> {
    if width <= 1 {
        return x.to_vec();
    }
    let left = width / 2;
    let right = width - 1 - left;
    let mut prefix = vec![0.0; x.len() + 1];
    for (i, v) in x.iter().enumerate() {
        prefix[i + 1] = prefix[i] + v;
    }
    (0..x.len())
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(x.len() - 1);
            (prefix[hi + 1] - prefix[lo]) / (hi + 1 - lo) as f64
        })
        .collect()
}

/// Uniform resampling by linear interpolation. When decimating by a factor of
/// two or more the channels are first smoothed by a moving average whose width
/// equals the rounded decimation factor.
pub fn resample(trace: &Trace, rate: f64) -> Result<Trace> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::Domain(format!("resample rate must be positive, got {rate}")));
    }
    if trace.samples.len() < 2 {
        return Err(Error::EmptyTrace("need at least 2 samples".into()));
    }
    let span = trace.duration();
    if span <= 2.0 / rate {
        return Err(Error::InsufficientData(format!(
            "trace spans {span} s, need more than {} s at {rate} Hz",
            2.0 / rate
        )));
    }
    let times = trace.times();
    let factor = trace.nominal_rate / rate;
    let width = if factor >= 2.0 { factor.round() as usize } else { 1 };
    let with_gyro = trace.has_gyro();
    let mut channels: Vec<Vec<f64>> = (0..3)
        .map(|k| moving_average(&trace.samples.iter().map(|s| s.accel[k]).collect::<Vec<_>>(), width))
        .collect();
    if with_gyro {
        for k in 0..3 {
            let g: Vec<f64> = trace.samples.iter().map(|s| s.gyro.unwrap()[k]).collect();
            channels.push(moving_average(&g, width));
        }
    }

    let t0 = times[0];
    let count = (span * rate + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut j = 0usize;
    for k in 0..count {
        let t = t0 + k as f64 / rate;
        while j + 2 < times.len() && times[j + 1] <= t {
            j += 1;
        }
        let (ta, tb) = (times[j], times[j + 1]);
        let w = if tb > ta { ((t - ta) / (tb - ta)).clamp(0.0, 1.0) } else { 0.0 };
        let lerp = |c: &Vec<f64>| c[j] + w * (c[j + 1] - c[j]);
        let accel = [lerp(&channels[0]), lerp(&channels[1]), lerp(&channels[2])];
        let gyro = with_gyro.then(|| [lerp(&channels[3]), lerp(&channels[4]), lerp(&channels[5])]);
        out.push(InertialSample { t, accel, gyro });
    }
    Trace::new(out, trace.fixes.clone(), rate, trace.meta.clone())
}

/// `α = τ / (τ + dt)` for the gravity low-pass filter.
pub fn alpha_from_timeconstant(tau: f64, dt: f64) -> Result<f64> {
    if !(tau.is_finite() && tau > 0.0 && dt.is_finite() && dt > 0.0) {
        return Err(Error::Domain(format!(
            "time constant and step must be positive (tau={tau}, dt={dt})"
        )));
    }
    Ok(tau / (tau + dt))
}

/// Running gravity estimate of the exponential low-pass filter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GravityState {
    pub g: Vec3,
    pub alpha: f64,
}

impl GravityState {
    pub fn new(g: Vec3, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(GravityState { g, alpha })
    }

    /// Fold one accelerometer reading into the estimate and return the
    /// linear (gravity-free) acceleration `a - g'`.
    pub fn update(&mut self, accel: Vec3) -> Vec3 {
        let mut linear = [0.0; 3];
        for k in 0..3 {
            self.g[k] = self.alpha * self.g[k] + (1.0 - self.alpha) * accel[k];
            linear[k] = accel[k] - self.g[k];
        }
        linear
    }
}

/// Value-passing form of [`GravityState::update`].
pub fn update_gravity(state: GravityState, accel: Vec3) -> (GravityState, Vec3) {
    let mut next = state;
    let linear = next.update(accel);
    (next, linear)
}

/// Linear acceleration for a whole sample stream; the filter is seeded with
/// the first reading.
pub fn linear_acceleration(samples: &[InertialSample], alpha: f64) -> Result<Vec<Vec3>> {
    let Some(first) = samples.first() else {
        return Ok(Vec::new());
    };
    let mut state = GravityState::new(first.accel, alpha)?;
    Ok(samples.iter().map(|s| state.update(s.accel)).collect())
}

/// Trapezoidal integral of one gyro axis over `[t0, t1]`, radians. Interval
/// endpoints falling between samples are linearly interpolated.
pub fn integrate_gyro(samples: &[InertialSample], axis: Axis, t0: f64, t1: f64) -> Result<f64> {
    if samples.iter().any(|s| s.gyro.is_none()) || samples.is_empty() {
        return Err(Error::Capability("gyroscope readings are required".into()));
    }
    let (start, end) = (samples[0].t, samples[samples.len() - 1].t);
    if !(t0 <= t1) || t0 < start || t1 > end {
        return Err(Error::Domain(format!(
            "interval [{t0}, {t1}] outside trace span [{start}, {end}]"
        )));
    }
    if t0 == t1 {
        return Ok(0.0);
    }
    let times: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let w: Vec<f64> = samples.iter().map(|s| s.gyro.unwrap()[axis.index()]).collect();
    let at = |t: f64| interp_clamped(&times, &w, t).unwrap();

    let mut total = 0.0;
    let mut prev_t = t0;
    let mut prev_w = at(t0);
    let first = times.partition_point(|&t| t <= t0);
    for i in first..times.len() {
        if times[i] >= t1 {
            break;
        }
        total += 0.5 * (prev_w + w[i]) * (times[i] - prev_t);
        prev_t = times[i];
        prev_w = w[i];
    }
    total += 0.5 * (prev_w + at(t1)) * (t1 - prev_t);
    Ok(total)
}

/// Result of [`reorient`].
#[derive(Debug, Clone, PartialEq)]
pub struct Reoriented {
    pub trace: Trace,
    /// Device-to-vehicle rotation (row-major), proper orthogonal.
    pub rotation: [[f64; 3]; 3],
    /// False when no forward-motion epoch allowed the heading axis to be fixed;
    /// only the vertical axis is then meaningful.
    pub forward_determined: bool,
}

/// Rotate a trace into the vehicle frame: z up (a device at rest reads
/// `(0, 0, +9.81)`, i.e. gravity points along −z), x along the direction of
/// travel when it can be inferred.
///
/// The forward axis is the regression direction of horizontal acceleration on
/// the GPS longitudinal acceleration (`dv/dt`) over epochs faster than
/// 3 m/s. Traces that never accelerate measurably keep their yaw.
pub fn reorient(trace: &Trace) -> Result<Reoriented> {
    if trace.samples.len() < 2 || trace.duration() < 2.0 {
        return Err(Error::InsufficientData(format!(
            "reorientation needs at least 2 s of data, got {} s",
            trace.duration()
        )));
    }
    let n = trace.samples.len() as f64;
    let mut mean = Vector3::zeros();
    for s in &trace.samples {
        mean += Vector3::from(s.accel);
    }
    mean /= n;
    if mean.norm() < 1e-6 {
        return Err(Error::Numeric("mean specific force vanishes; cannot find vertical".into()));
    }
    let up = Vector3::z();
    let level = Rotation3::rotation_between(&mean, &up).unwrap_or_else(|| {
        Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::x()), std::f64::consts::PI)
    });

    let speeds = trace.speed_at_samples();
    let times = trace.times();
    let mut sxy = Vector3::zeros();
    let mut sww = 0.0;
    if trace.fixes.len() >= 2 {
        let fix_t: Vec<f64> = trace.fixes.iter().map(|f| f.t).collect();
        let fix_v: Vec<f64> = trace.fixes.iter().map(|f| f.speed).collect();
        let dvdt: Vec<f64> = (0..fix_t.len())
            .map(|i| {
                let (a, b) = (i.saturating_sub(1), (i + 1).min(fix_t.len() - 1));
                let dt = fix_t[b] - fix_t[a];
                if dt > 0.0 { (fix_v[b] - fix_v[a]) / dt } else { 0.0 }
            })
            .collect();
        for (i, s) in trace.samples.iter().enumerate() {
            let a = level * Vector3::from(s.accel);
            if speeds[i] <= FORWARD_SPEED_THRESHOLD {
                continue;
            }
            let w = interp_clamped(&fix_t, &dvdt, times[i]).unwrap_or(0.0);
            sxy += Vector3::new(a.x, a.y, 0.0) * w;
            sww += w * w;
        }
    }
    let mut forward_determined = false;
    let mut rotation = level;
    if sww > 1e-6 * n {
        let slope = sxy / sww;
        if slope.norm() > 0.5 {
            let yaw = slope.y.atan2(slope.x);
            rotation = Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::z()), -yaw) * level;
            forward_determined = true;
        }
    }

    let samples = trace
        .samples
        .iter()
        .map(|s| {
            let accel = rotation * Vector3::from(s.accel);
            let gyro = s.gyro.map(|g| {
                let r = rotation * Vector3::from(g);
                [r.x, r.y, r.z]
            });
            InertialSample {
                t: s.t,
                accel: [accel.x, accel.y, accel.z],
                gyro,
            }
        })
        .collect();
    let m = rotation.matrix();
    let rows = [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ];
    Ok(Reoriented {
        trace: Trace::new(samples, trace.fixes.clone(), trace.nominal_rate, trace.meta.clone())?,
        rotation: rows,
        forward_determined,
    })
}

/// Vertical linear acceleration of an already reoriented trace.
pub fn vertical_linear(trace: &Trace, tau: f64) -> Result<Vec<f64>> {
    let alpha = alpha_from_timeconstant(tau, 1.0 / trace.nominal_rate)?;
    Ok(linear_acceleration(&trace.samples, alpha)?
        .into_iter()
        .map(|l| l[2])
        .collect())
}
