use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trace::{interp_clamped, Trace};
use crate::transforms::{select_levels, swt, swt_band_reconstruct, BandSelection, Wavelet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessConfig {
    /// Retained road wavelengths `[shortest, longest]`, meters.
    pub band: [f64; 2],
    /// Travelled distance per report, meters.
    pub segment_length: f64,
    pub wavelet: Wavelet,
    /// Segments whose mean speed is at or below this are skipped, m/s.
    pub min_speed: f64,
    pub max_levels: usize,
}

impl Default for RoughnessConfig {
    fn default() -> Self {
        RoughnessConfig {
            band: [0.5, 50.0],
            segment_length: 100.0,
            wavelet: Wavelet::Db4,
            min_speed: 2.0,
            max_levels: 10,
        }
    }
}

impl RoughnessConfig {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.band;
        if !(lo >= 0.05 && hi <= 50.0 && lo < hi) {
            return Err(Error::Config(format!(
                "roughness band [{lo}, {hi}] m must be an increasing interval inside [0.05, 50]"
            )));
        }
        if !(self.segment_length.is_finite() && self.segment_length > 0.0) {
            return Err(Error::Config("segment_length must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoughnessReport {
    /// Distance at the segment start, meters.
    pub start: f64,
    pub segment_length: f64,
    /// Accumulated band-limited vertical travel per distance, m/km.
    pub index: f64,
    pub band: [f64; 2],
    pub mean_speed: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedSegment {
    pub start: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RoughnessOutcome {
    pub reports: Vec<RoughnessReport>,
    pub skipped: Vec<SkippedSegment>,
}

/// Running trapezoidal integral starting at zero.
pub fn cumulative_trapezoid(x: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    for (i, v) in x.iter().enumerate() {
        if i > 0 {
            acc += 0.5 * (x[i - 1] + v) * dt;
        }
        out.push(acc);
    }
    out
}

/// Remove the least-squares line over the sample index.
pub fn detrend_linear(x: &mut [f64]) {
    let n = x.len();
    if n < 2 {
        if let Some(v) = x.first_mut() {
            *v = 0.0;
        }
        return;
    }
    let nf = n as f64;
    let mean_i = (nf - 1.0) / 2.0;
    let mean_x = x.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, v) in x.iter().enumerate() {
        let di = i as f64 - mean_i;
        sxy += di * (v - mean_x);
        sxx += di * di;
    }
    let slope = sxy / sxx;
    for (i, v) in x.iter_mut().enumerate() {
        *v -= mean_x + slope * (i as f64 - mean_i);
    }
}

fn segment_index(accel: &[f64], rate: f64, mean_speed: f64, cfg: &RoughnessConfig) -> std::result::Result<f64, String> {
    let n = accel.len();
    if n < 16 {
        return Err(format!("only {n} samples in segment"));
    }
    let nyquist = rate / 2.0;
    let f_lo = mean_speed / cfg.band[1];
    let f_hi = (mean_speed / cfg.band[0]).min(nyquist);
    let depth = cfg.max_levels.min((usize::BITS - 1 - n.leading_zeros()) as usize);
    let levels = select_levels(rate, f_lo, f_hi, depth);
    let Some(&deepest) = levels.iter().max() else {
        return Err(format!("band {f_lo:.3}-{f_hi:.3} Hz not resolvable at {rate} Hz"));
    };
    let mean = accel.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = accel.iter().map(|a| a - mean).collect();
    let dec = swt(&centered, cfg.wavelet, deepest).map_err(|e| e.to_string())?;
    let band = swt_band_reconstruct(&dec, &BandSelection { details: levels, approx: false }).map_err(|e| e.to_string())?;
    let dt = 1.0 / rate;
    let mut velocity = cumulative_trapezoid(&band, dt);
    detrend_linear(&mut velocity);
    let mut displacement = cumulative_trapezoid(&velocity, dt);
    detrend_linear(&mut displacement);
    Ok(displacement.windows(2).map(|w| (w[1] - w[0]).abs()).sum())
}

/// IRI-style roughness ratio per travelled-distance segment of a reoriented
/// trace: the vertical acceleration is restricted to the SWT levels whose
/// nominal band maps into the wavelength band at the segment's mean speed,
/// double-integrated with a linear detrend after each pass, and the summed
/// absolute vertical travel is divided by the segment length. An incomplete
/// trailing segment is not reported.
pub fn roughness_index(trace: &Trace, cfg: &RoughnessConfig) -> Result<RoughnessOutcome> {
    cfg.validate()?;
    if trace.fixes.is_empty() {
        return Err(Error::Capability("roughness needs GPS speed to map frequency to wavelength".into()));
    }
    let rate = trace.nominal_rate;
    let times = trace.times();
    let speeds = trace.speed_at_samples();
    let distance = cumulative_trapezoid_nonuniform(&times, &speeds);
    let vertical = trace.accel_axis(crate::trace::Axis::Z);

    let mut out = RoughnessOutcome::default();
    let total = *distance.last().unwrap_or(&0.0);
    // tolerate summation round-off on an exact multiple
    let segments = (total / cfg.segment_length + 1e-9).floor() as usize;
    if segments == 0 {
        out.skipped.push(SkippedSegment {
            start: 0.0,
            reason: format!("travelled {total:.1} m, less than one {} m segment", cfg.segment_length),
        });
        return Ok(out);
    }
    let fix_t: Vec<f64> = trace.fixes.iter().map(|f| f.t).collect();
    let fix_lat: Vec<f64> = trace.fixes.iter().map(|f| f.lat).collect();
    let fix_lon: Vec<f64> = trace.fixes.iter().map(|f| f.lon).collect();
    let mut begin = 0usize;
    for k in 0..segments {
        let start = k as f64 * cfg.segment_length;
        let stop = start + cfg.segment_length;
        let end = distance.partition_point(|d| *d < stop).min(times.len() - 1);
        let range = begin..=end;
        begin = end;
        let mean_speed = speeds[range.clone()].iter().sum::<f64>() / range.clone().count() as f64;
        if mean_speed <= cfg.min_speed {
            out.skipped.push(SkippedSegment {
                start,
                reason: format!("mean speed {mean_speed:.2} m/s at or below {} m/s", cfg.min_speed),
            });
            continue;
        }
        match segment_index(&vertical[range.clone()], rate, mean_speed, cfg) {
            Ok(travel) => {
                let covered = distance[*range.end()] - distance[*range.start()];
                let (t_start, t_end) = (times[*range.start()], times[*range.end()]);
                let mid = 0.5 * (t_start + t_end);
                out.reports.push(RoughnessReport {
                    start,
                    segment_length: covered,
                    index: travel / covered * 1000.0,
                    band: cfg.band,
                    mean_speed,
                    t_start,
                    t_end,
                    lat: interp_clamped(&fix_t, &fix_lat, mid).unwrap_or(0.0),
                    lon: interp_clamped(&fix_t, &fix_lon, mid).unwrap_or(0.0),
                });
            }
            Err(reason) => out.skipped.push(SkippedSegment { start, reason }),
        }
    }
    Ok(out)
}

fn cumulative_trapezoid_nonuniform(t: &[f64], v: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(t.len());
    let mut acc = 0.0;
    for i in 0..t.len() {
        if i > 0 {
            acc += 0.5 * (v[i - 1] + v[i]) * (t[i] - t[i - 1]);
        }
        out.push(acc);
    }
    out
}
