use std::fmt;

use serde::{Deserialize, Serialize};

use super::indicator::{severity_from_score, Indicator, IndicatorKind};
use crate::error::{Error, Result};
use crate::trace::{interpolate_fix_location, Axis, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ManeuverConfig {
    /// Yaw rate that opens an event, rad/s.
    pub omega_on: f64,
    /// Yaw rate below which an event may close, rad/s.
    pub omega_off: f64,
    /// Minimum time above `omega_on` for an event to count, s.
    pub min_active: f64,
    /// Time the yaw rate must stay below `omega_off` before an event closes,
    /// so zero crossings between lobes do not split it, s.
    pub release: f64,
    pub lane_change_max_duration: f64,
    /// Peak lateral acceleration separating a swerve from a lane change, m/s².
    pub swerve_lateral: f64,
}

impl Default for ManeuverConfig {
    fn default() -> Self {
        ManeuverConfig {
            omega_on: 0.06,
            omega_off: 0.03,
            min_active: 0.3,
            release: 1.0,
            lane_change_max_duration: 6.0,
            swerve_lateral: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuverClass {
    Turn,
    UTurn,
    LaneChange,
    Swerve,
    CurvySegment,
    /// Yaw event matching none of the other shapes (e.g. a gentle bend).
    Curve,
}

impl ManeuverClass {
    pub fn name(self) -> &'static str {
        match self {
            ManeuverClass::Turn => "turn",
            ManeuverClass::UTurn => "u_turn",
            ManeuverClass::LaneChange => "lane_change",
            ManeuverClass::Swerve => "swerve",
            ManeuverClass::CurvySegment => "curvy_segment",
            ManeuverClass::Curve => "curve",
        }
    }
}

impl fmt::Display for ManeuverClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YawEvent {
    pub t_start: f64,
    pub t_end: f64,
    /// Net heading change, radians.
    pub delta_psi: f64,
    /// Number of alternating-sign yaw-rate lobes.
    pub lobes: usize,
    pub peak_yaw_rate: f64,
    pub peak_lateral: f64,
    pub class: ManeuverClass,
}

impl YawEvent {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

fn classify(delta_psi: f64, lobes: usize, duration: f64, peak_lateral: f64, cfg: &ManeuverConfig) -> ManeuverClass {
    let deg = delta_psi.to_degrees().abs();
    if deg >= 150.0 {
        ManeuverClass::UTurn
    } else if lobes >= 3 {
        ManeuverClass::CurvySegment
    } else if lobes == 1 && deg >= 60.0 {
        ManeuverClass::Turn
    } else if lobes == 2 && deg < 15.0 && peak_lateral > cfg.swerve_lateral {
        ManeuverClass::Swerve
    } else if lobes == 2 && deg < 15.0 && duration < cfg.lane_change_max_duration {
        ManeuverClass::LaneChange
    } else {
        ManeuverClass::Curve
    }
}

/// Count alternating lobes: runs of one sign among samples above `omega_off`,
/// kept only when the run peaks above `omega_on`.
fn count_lobes(w: &[f64], cfg: &ManeuverConfig) -> usize {
    let mut signs: Vec<f64> = Vec::new();
    let mut run_sign = 0.0;
    let mut run_peak = 0.0f64;
    let close = |sign: f64, peak: f64, signs: &mut Vec<f64>| {
        if sign != 0.0 && peak >= cfg.omega_on && signs.last() != Some(&sign) {
            signs.push(sign);
        }
    };
    for &v in w {
        if v.abs() < cfg.omega_off {
            continue;
        }
        let s = v.signum();
        if s != run_sign {
            close(run_sign, run_peak, &mut signs);
            run_sign = s;
            run_peak = 0.0;
        }
        run_peak = run_peak.max(v.abs());
    }
    close(run_sign, run_peak, &mut signs);
    signs.len()
}

/// Hysteresis yaw-event detection on the vehicle-frame z gyro.
pub fn detect_yaw_events(trace: &Trace, cfg: &ManeuverConfig) -> Result<Vec<YawEvent>> {
    let w = trace
        .gyro_axis(Axis::Z)
        .ok_or_else(|| Error::Capability("maneuver classification needs a gyroscope".into()))?;
    let times = trace.times();
    let speeds = trace.speed_at_samples();
    let lateral: Vec<f64> = if trace.fixes.is_empty() {
        trace.samples.iter().map(|s| s.accel[1].abs()).collect()
    } else {
        w.iter().zip(&speeds).map(|(w, v)| (w * v).abs()).collect()
    };
    let n = w.len();
    let mut events = Vec::new();
    let mut i = 0;
    let mut floor = 0;
    while i < n {
        if w[i].abs() <= cfg.omega_on {
            i += 1;
            continue;
        }
        let mut start = i;
        while start > floor && w[start - 1].abs() >= cfg.omega_off {
            start -= 1;
        }
        let mut last_active = i;
        let mut j = i;
        while j < n {
            if w[j].abs() >= cfg.omega_off {
                last_active = j;
            } else if times[j] - times[last_active] >= cfg.release {
                break;
            }
            j += 1;
        }
        let end = last_active;
        let active: f64 = (start..end)
            .filter(|&k| w[k].abs() > cfg.omega_on)
            .map(|k| times[k + 1] - times[k])
            .sum();
        if active >= cfg.min_active && end > start {
            let delta_psi: f64 = (start..end).map(|k| 0.5 * (w[k] + w[k + 1]) * (times[k + 1] - times[k])).sum();
            let lobes = count_lobes(&w[start..=end], cfg);
            let peak_yaw_rate = w[start..=end].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let peak_lateral = lateral[start..=end].iter().fold(0.0f64, |m, v| m.max(*v));
            let (t_start, t_end) = (times[start], times[end]);
            events.push(YawEvent {
                t_start,
                t_end,
                delta_psi,
                lobes,
                peak_yaw_rate,
                peak_lateral,
                class: classify(delta_psi, lobes, t_end - t_start, peak_lateral, cfg),
            });
        }
        floor = end + 1;
        i = end + 1;
    }
    Ok(events)
}

/// Classify yaw events of a reoriented trace into maneuver indicators. Events
/// are located at their temporal midpoint; without fixes the location falls
/// back to (0, 0).
pub fn classify_maneuvers(trace: &Trace, cfg: &ManeuverConfig) -> Result<Vec<Indicator>> {
    let events = detect_yaw_events(trace, cfg)?;
    Ok(events
        .into_iter()
        .map(|e| {
            let mid = 0.5 * (e.t_start + e.t_end);
            let loc = interpolate_fix_location(&trace.fixes, mid).unwrap_or(crate::geo::LatLon { lat: 0.0, lon: 0.0 });
            let score = e.peak_yaw_rate / cfg.omega_on;
            Indicator {
                kind: IndicatorKind::Maneuver,
                sub_kind: e.class.name().into(),
                lat: loc.lat,
                lon: loc.lon,
                t: e.t_start,
                severity: severity_from_score(score),
                confidence: (1.0 - 1.0 / score).clamp(0.0, 1.0),
                value: e.delta_psi.to_degrees(),
                unit: "deg".into(),
            }
        })
        .collect())
}
