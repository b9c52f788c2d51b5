//! Overlapping windows and the per-window statistics library.
//!
//! A signal is cut into windows of `m` samples advancing by `hop` samples;
//! each window becomes a [`FeatureVector`] and the whole signal a
//! [`FeatureMatrix`]. Moments are population moments (divide by `m`),
//! kurtosis is non-excess (a Gaussian scores 3) and RMS keeps its square root
//! so that `RMS = Energy / sqrt(m)`.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::median;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePlan {
    /// Window length, seconds.
    pub window_len: f64,
    /// Fraction of a window shared with the next one, in `[0, 1)`.
    pub overlap: f64,
    /// Sampling rate of the signal, Hz.
    pub rate: f64,
}

impl FramePlan {
    pub fn new(window_len: f64, overlap: f64, rate: f64) -> Result<Self> {
        let plan = FramePlan {
            window_len,
            overlap,
            rate,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.window_len.is_finite() && self.window_len > 0.0) {
            return Err(Error::Domain(format!("window length must be positive, got {}", self.window_len)));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::Domain(format!("rate must be positive, got {}", self.rate)));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::Domain(format!("overlap must lie in [0,1), got {}", self.overlap)));
        }
        if self.window_size() < 2 {
            return Err(Error::Domain("window must hold at least 2 samples".into()));
        }
        if self.hop() < 1 {
            return Err(Error::Domain("overlap too large: hop rounds to zero".into()));
        }
        Ok(())
    }

    /// Window size `m` in samples.
    pub fn window_size(&self) -> usize {
        (self.window_len * self.rate).round() as usize
    }

    pub fn hop(&self) -> usize {
        (self.window_size() as f64 * (1.0 - self.overlap)).round() as usize
    }

    pub fn window_count(&self, n: usize) -> usize {
        let m = self.window_size();
        if n < m {
            0
        } else {
            (n - m) / self.hop() + 1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<'a> {
    pub index: usize,
    pub start: usize,
    pub samples: &'a [f64],
}

/// Cut `signal` into full windows; an incomplete tail is dropped.
pub fn frame_signal<'a>(signal: &'a [f64], plan: &FramePlan) -> Result<Vec<Frame<'a>>> {
    plan.validate()?;
    let m = plan.window_size();
    if signal.len() < m {
        return Err(Error::InsufficientData(format!(
            "signal of {} samples is shorter than the {m}-sample window",
            signal.len()
        )));
    }
    let hop = plan.hop();
    Ok((0..plan.window_count(signal.len()))
        .map(|index| {
            let start = index * hop;
            Frame {
                index,
                start,
                samples: &signal[start..start + m],
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureId {
    Mean,
    Mad,
    Rms,
    Var,
    Sd,
    Energy,
    Skewness,
    Kurtosis,
    Peak2Peak,
    Peak2Rms,
}

impl FeatureId {
    pub const ALL: [FeatureId; 10] = [
        FeatureId::Mean,
        FeatureId::Mad,
        FeatureId::Rms,
        FeatureId::Var,
        FeatureId::Sd,
        FeatureId::Energy,
        FeatureId::Skewness,
        FeatureId::Kurtosis,
        FeatureId::Peak2Peak,
        FeatureId::Peak2Rms,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureId::Mean => "mean",
            FeatureId::Mad => "mad",
            FeatureId::Rms => "rms",
            FeatureId::Var => "var",
            FeatureId::Sd => "sd",
            FeatureId::Energy => "energy",
            FeatureId::Skewness => "skewness",
            FeatureId::Kurtosis => "kurtosis",
            FeatureId::Peak2Peak => "peak2peak",
            FeatureId::Peak2Rms => "peak2rms",
        }
    }
}

impl fmt::Display for FeatureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FeatureId::ALL
            .into_iter()
            .find(|id| id.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown feature `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub names: Vec<FeatureId>,
    pub window_index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Zero dispersion or zero RMS forced some features to their fallback 0.
    pub degenerate: bool,
}

impl FeatureVector {
    pub fn get(&self, id: FeatureId) -> Option<f64> {
        self.names.iter().position(|n| *n == id).map(|i| self.values[i])
    }
}

/// All statistics of one window, computed in one pass over sorted copies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowStats {
    pub mean: f64,
    pub mad: f64,
    pub rms: f64,
    pub var: f64,
    pub sd: f64,
    pub energy: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub peak2peak: f64,
    pub peak2rms: f64,
    pub degenerate: bool,
}

impl WindowStats {
    pub fn compute(x: &[f64]) -> Result<Self> {
        let m = x.len();
        if m < 2 {
            return Err(Error::InsufficientData(format!("window needs at least 2 samples, got {m}")));
        }
        let n = m as f64;
        let mean = x.iter().sum::<f64>() / n;
        let sum_sq: f64 = x.iter().map(|v| v * v).sum();
        let energy = sum_sq.sqrt();
        let rms = (sum_sq / n).sqrt();
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        let (mut lo, mut hi, mut peak) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
        for &v in x {
            lo = lo.min(v);
            hi = hi.max(v);
            peak = peak.max(v.abs());
        }
        let mut sorted = x.to_vec();
        let med = median(&mut sorted);
        let mut dev: Vec<f64> = x.iter().map(|v| (v - med).abs()).collect();
        let mad = median(&mut dev);

        let mut degenerate = false;
        let (skewness, kurtosis) = if sd > 0.0 {
            let (mut s3, mut s4) = (0.0, 0.0);
            for &v in x {
                let z = (v - mean) / sd;
                s3 += z * z * z;
                s4 += z * z * z * z;
            }
            (s3 / n, s4 / n)
        } else {
            degenerate = true;
            (0.0, 0.0)
        };
        let peak2rms = if rms > 0.0 {
            peak / rms
        } else {
            degenerate = true;
            0.0
        };
        Ok(WindowStats {
            mean,
            mad,
            rms,
            var,
            sd,
            energy,
            skewness,
            kurtosis,
            peak2peak: hi - lo,
            peak2rms,
            degenerate,
        })
    }

    pub fn get(&self, id: FeatureId) -> f64 {
        match id {
            FeatureId::Mean => self.mean,
            FeatureId::Mad => self.mad,
            FeatureId::Rms => self.rms,
            FeatureId::Var => self.var,
            FeatureId::Sd => self.sd,
            FeatureId::Energy => self.energy,
            FeatureId::Skewness => self.skewness,
            FeatureId::Kurtosis => self.kurtosis,
            FeatureId::Peak2Peak => self.peak2peak,
            FeatureId::Peak2Rms => self.peak2rms,
        }
    }
}

/// Features of a single window, in the order of `set`.
pub fn extract_features(window: &[f64], set: &[FeatureId]) -> Result<FeatureVector> {
    let stats = WindowStats::compute(window)?;
    Ok(FeatureVector {
        values: set.iter().map(|id| stats.get(*id)).collect(),
        names: set.to_vec(),
        window_index: 0,
        t_start: 0.0,
        t_end: 0.0,
        degenerate: stats.degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub names: Vec<FeatureId>,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<FeatureId>, rows: Vec<FeatureVector>) -> Result<Self> {
        if rows.iter().any(|r| r.names != names || r.values.len() != names.len()) {
            return Err(Error::Schema("feature matrix rows must share one name tuple".into()));
        }
        Ok(FeatureMatrix { names, rows })
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column_index(&self, id: FeatureId) -> Option<usize> {
        self.names.iter().position(|n| *n == id)
    }

    pub fn column(&self, id: FeatureId) -> Option<Vec<f64>> {
        let c = self.column_index(id)?;
        Some(self.rows.iter().map(|r| r.values[c]).collect())
    }

    /// CSV with columns `window_index,t_start,t_end,<features...>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["window_index".to_string(), "t_start".into(), "t_end".into()];
        header.extend(self.names.iter().map(|n| n.name().to_string()));
        w.write_record(&header).map_err(csv_err)?;
        for row in &self.rows {
            let mut rec = vec![row.window_index.to_string(), row.t_start.to_string(), row.t_end.to_string()];
            rec.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Format(e.to_string()))?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Frame `signal` and compute one feature row per window. `t0` is the time of
/// the first sample.
pub fn feature_matrix(signal: &[f64], plan: &FramePlan, set: &[FeatureId], t0: f64) -> Result<FeatureMatrix> {
    let frames = frame_signal(signal, plan)?;
    let mut rows = Vec::with_capacity(frames.len());
    for frame in frames {
        let mut row = extract_features(frame.samples, set)?;
        row.window_index = frame.index;
        row.t_start = t0 + frame.start as f64 / plan.rate;
        row.t_end = t0 + (frame.start + frame.samples.len()) as f64 / plan.rate;
        rows.push(row);
    }
    FeatureMatrix::new(set.to_vec(), rows)
}

/// Per-column min-max scaling. The returned flags mark constant columns,
/// which are mapped to 0.
pub fn normalize_features(matrix: &FeatureMatrix) -> Result<(FeatureMatrix, Vec<bool>)> {
    if matrix.n_rows() < 2 {
        return Err(Error::InsufficientData("normalization needs at least 2 rows".into()));
    }
    let mut out = matrix.clone();
    let mut constant = vec![false; matrix.n_cols()];
    for c in 0..matrix.n_cols() {
        let (lo, hi) = matrix
            .rows
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.values[c]), hi.max(r.values[c])));
        let span = hi - lo;
        constant[c] = span <= 0.0;
        for row in &mut out.rows {
            row.values[c] = if constant[c] { 0.0 } else { (row.values[c] - lo) / span };
        }
    }
    Ok((out, constant))
}
