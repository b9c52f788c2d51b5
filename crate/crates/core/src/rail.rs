//! Railway track geometry from a reoriented coach trace: cant from the
//! band-limited roll angle, twist over base lengths, and curve events.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::road::{cumulative_trapezoid, detrend_linear, Indicator, IndicatorKind};
use crate::trace::{interp_clamped, Axis, Trace};
use crate::transforms::{select_levels, swt, swt_band_reconstruct, BandSelection, Wavelet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConstants {
    /// mm
    pub gauge: f64,
    /// Distance between rail-head centres (2b₀), mm.
    pub rail_center_width: f64,
}

impl Default for TrackConstants {
    fn default() -> Self {
        TrackConstants { gauge: 1435.0, rail_center_width: 1500.0 }
    }
}

impl TrackConstants {
    pub fn validate(&self) -> Result<()> {
        if !(self.gauge > 0.0 && self.rail_center_width > 0.0) {
            return Err(Error::Config("gauge and rail_center_width must be positive".into()));
        }
        Ok(())
    }
}

/// Cant angle φ = asin(h / 2b₀) for a rail elevation `h_mm`.
pub fn cant_angle(h_mm: f64, consts: &TrackConstants) -> Result<f64> {
    consts.validate()?;
    let ratio = h_mm / consts.rail_center_width;
    if !ratio.is_finite() || ratio.abs() > 1.0 {
        return Err(Error::Domain(format!(
            "rail elevation {h_mm} mm exceeds 2b0 = {} mm",
            consts.rail_center_width
        )));
    }
    Ok(ratio.asin())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RailConfig {
    pub track: TrackConstants,
    /// Retained roll wavelengths, meters.
    pub roll_band: [f64; 2],
    pub twist_bases: Vec<f64>,
    /// 1/m
    pub curvature_threshold: f64,
    /// Samples at or below this speed carry no geometry, m/s.
    pub min_speed: f64,
    pub wavelet: Wavelet,
}

impl Default for RailConfig {
    fn default() -> Self {
        RailConfig {
            track: TrackConstants::default(),
            roll_band: [10.0, 200.0],
            twist_bases: vec![3.0, 5.0],
            curvature_threshold: 1.0 / 5000.0,
            min_speed: 3.0,
            wavelet: Wavelet::Db4,
        }
    }
}

impl RailConfig {
    pub fn validate(&self) -> Result<()> {
        self.track.validate()?;
        let [lo, hi] = self.roll_band;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::Config(format!("roll_band [{lo}, {hi}] must be an increasing positive interval")));
        }
        if self.twist_bases.iter().any(|b| !(*b > 0.0)) {
            return Err(Error::Config("twist bases must be positive".into()));
        }
        if !(self.curvature_threshold > 0.0) {
            return Err(Error::Config("curvature_threshold must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackGeometryPoint {
    /// Distance along track, m.
    pub s: f64,
    pub t: f64,
    /// rad
    pub cant_angle: f64,
    /// mm
    pub cant_height: f64,
    /// Signed, 1/m (positive turning left).
    pub curvature: f64,
    pub lat_acc: f64,
    pub vert_acc: f64,
    pub lat: f64,
    pub lon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedSpan {
    pub t_start: f64,
    pub t_end: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackGeometry {
    pub points: Vec<TrackGeometryPoint>,
    pub excluded: Vec<ExcludedSpan>,
}

fn excluded_spans(times: &[f64], speeds: &[f64], min_speed: f64) -> Vec<ExcludedSpan> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < times.len() {
        if speeds[i] > min_speed {
            i += 1;
            continue;
        }
        let start = i;
        while i < times.len() && speeds[i] <= min_speed {
            i += 1;
        }
        out.push(ExcludedSpan {
            t_start: times[start],
            t_end: times[i - 1],
            reason: format!("speed at or below {min_speed} m/s"),
        });
    }
    out
}

/// Track geometry profile from roll and yaw rates. The roll angle is the
/// integrated x-gyro restricted to the SWT levels covering the configured
/// wavelength band at the mean moving speed.
pub fn cant_from_roll(trace: &Trace, cfg: &RailConfig) -> Result<TrackGeometry> {
    cfg.validate()?;
    let wx = trace
        .gyro_axis(Axis::X)
        .ok_or_else(|| Error::Capability("track geometry needs a gyroscope".into()))?;
    let wz = trace.gyro_axis(Axis::Z).expect("gyro present");
    if trace.fixes.is_empty() {
        return Err(Error::Capability("track geometry needs GPS speed".into()));
    }
    let times = trace.times();
    let speeds = trace.speed_at_samples();
    let excluded = excluded_spans(&times, &speeds, cfg.min_speed);
    let moving: Vec<usize> = (0..times.len()).filter(|&i| speeds[i] > cfg.min_speed).collect();
    if moving.is_empty() {
        return Ok(TrackGeometry { points: Vec::new(), excluded });
    }
    let mean_speed = moving.iter().map(|&i| speeds[i]).sum::<f64>() / moving.len() as f64;

    let rate = trace.nominal_rate;
    let mut roll = cumulative_trapezoid(&wx, 1.0 / rate);
    detrend_linear(&mut roll);
    let n = roll.len();
    let depth = 12.min((usize::BITS - 1 - n.max(2).leading_zeros()) as usize);
    let levels = select_levels(rate, mean_speed / cfg.roll_band[1], mean_speed / cfg.roll_band[0], depth);
    let roll = if levels.is_empty() {
        vec![0.0; n]
    } else {
        let dec = swt(&roll, cfg.wavelet, *levels.iter().max().unwrap())?;
        swt_band_reconstruct(&dec, &BandSelection { details: levels, approx: false })?
    };

    let mut s = vec![0.0; n];
    for i in 1..n {
        s[i] = s[i - 1] + 0.5 * (speeds[i] + speeds[i - 1]) * (times[i] - times[i - 1]);
    }
    let ay = trace.accel_axis(Axis::Y);
    let az = trace.accel_axis(Axis::Z);
    let g = az.iter().sum::<f64>() / n as f64;
    let fix_t: Vec<f64> = trace.fixes.iter().map(|f| f.t).collect();
    let fix_lat: Vec<f64> = trace.fixes.iter().map(|f| f.lat).collect();
    let fix_lon: Vec<f64> = trace.fixes.iter().map(|f| f.lon).collect();
    let b = cfg.track.rail_center_width;
    let points = moving
        .into_iter()
        .map(|i| TrackGeometryPoint {
            s: s[i],
            t: times[i],
            cant_angle: roll[i],
            cant_height: b * roll[i].sin(),
            curvature: wz[i] / speeds[i],
            lat_acc: ay[i],
            vert_acc: az[i] - g,
            lat: interp_clamped(&fix_t, &fix_lat, times[i]).unwrap_or(0.0),
            lon: interp_clamped(&fix_t, &fix_lon, times[i]).unwrap_or(0.0),
        })
        .collect();
    Ok(TrackGeometry { points, excluded })
}

/// Cant change per meter over `base`: `(h(s + base) − h(s)) / base` at every
/// point whose forward partner lies inside the profile. mm/m.
pub fn twist(points: &[TrackGeometryPoint], base: f64) -> Result<Vec<(f64, f64)>> {
    if !(base.is_finite() && base > 0.0) {
        return Err(Error::Domain(format!("twist base must be positive, got {base}")));
    }
    let s: Vec<f64> = points.iter().map(|p| p.s).collect();
    let h: Vec<f64> = points.iter().map(|p| p.cant_height).collect();
    let Some(&last) = s.last() else {
        return Ok(Vec::new());
    };
    Ok(points
        .iter()
        .take_while(|p| p.s + base <= last + 1e-9)
        .map(|p| {
            let ahead = interp_clamped(&s, &h, p.s + base).unwrap();
            (p.s, (ahead - p.cant_height) / base)
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveEvent {
    pub s_start: f64,
    pub s_end: f64,
    pub class: String,
    pub mean_radius: f64,
    pub entry: TrackGeometryPoint,
    pub exit: TrackGeometryPoint,
}

impl CurveEvent {
    pub fn length(&self) -> f64 {
        self.s_end - self.s_start
    }
}

fn length_class(len: f64) -> &'static str {
    if len < 100.0 {
        "short"
    } else if len <= 500.0 {
        "medium"
    } else {
        "long"
    }
}

/// Contiguous runs above the curvature threshold. A gap in `s` longer than
/// `max_gap` (an excluded span) also ends a run.
pub fn curve_events(points: &[TrackGeometryPoint], threshold: f64) -> Vec<CurveEvent> {
    const MAX_GAP: f64 = 10.0;
    let mut out = Vec::new();
    let mut i = 0;
    while i < points.len() {
        if points[i].curvature.abs() <= threshold {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < points.len()
            && points[i + 1].curvature.abs() > threshold
            && points[i + 1].s - points[i].s <= MAX_GAP
        {
            i += 1;
        }
        let run = &points[start..=i];
        let mean_k = run.iter().map(|p| p.curvature.abs()).sum::<f64>() / run.len() as f64;
        let len = run[run.len() - 1].s - run[0].s;
        out.push(CurveEvent {
            s_start: run[0].s,
            s_end: run[run.len() - 1].s,
            class: length_class(len).into(),
            mean_radius: 1.0 / mean_k,
            entry: run[0],
            exit: run[run.len() - 1],
        });
        i += 1;
    }
    out
}

/// Curve events as curvature indicators, located at the run midpoint.
pub fn classify_curves(points: &[TrackGeometryPoint], threshold: f64) -> Vec<Indicator> {
    curve_events(points, threshold)
        .into_iter()
        .map(|e| {
            let mid = 0.5 * (e.s_start + e.s_end);
            let p = points.iter().find(|p| p.s >= mid).unwrap_or(&e.exit);
            let mean_k = 1.0 / e.mean_radius;
            Indicator {
                kind: IndicatorKind::Curvature,
                sub_kind: e.class.clone(),
                lat: p.lat,
                lon: p.lon,
                t: p.t,
                severity: (mean_k * 1e4).round().clamp(0.0, 255.0) as u8,
                confidence: (1.0 - threshold / mean_k).clamp(0.0, 1.0),
                value: e.mean_radius,
                unit: "m".into(),
            }
        })
        .collect()
}

/// Cant observations where the coach enters and leaves each curve.
pub fn cant_at_curve_boundaries(points: &[TrackGeometryPoint], threshold: f64) -> Vec<Indicator> {
    curve_events(points, threshold)
        .into_iter()
        .flat_map(|e| [("entry", e.entry), ("exit", e.exit)])
        .map(|(side, p)| Indicator {
            kind: IndicatorKind::Cant,
            sub_kind: side.into(),
            lat: p.lat,
            lon: p.lon,
            t: p.t,
            severity: (p.cant_height.abs() / 10.0).round().clamp(0.0, 255.0) as u8,
            confidence: 1.0,
            value: p.cant_height,
            unit: "mm".into(),
        })
        .collect()
}

/// Profile CSV: `s,cant_mm,twist<base>...,curvature`; twist is empty where the
/// forward partner falls outside the profile.
pub fn write_profile_csv<W: Write>(out: W, points: &[TrackGeometryPoint], bases: &[f64]) -> Result<()> {
    let twists = bases.iter().map(|b| twist(points, *b)).collect::<Result<Vec<_>>>()?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["s".to_string(), "cant_mm".to_string()];
    header.extend(bases.iter().map(|b| format!("twist{b}")));
    header.push("curvature".into());
    let io = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(&header).map_err(io)?;
    for (i, p) in points.iter().enumerate() {
        let mut rec = vec![p.s.to_string(), p.cant_height.to_string()];
        rec.extend(twists.iter().map(|t| t.get(i).map(|(_, v)| v.to_string()).unwrap_or_default()));
        rec.push(p.curvature.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
