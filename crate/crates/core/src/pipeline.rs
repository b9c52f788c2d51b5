//! Trace → indicators orchestration shared by the CLI and the bindings.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{Context, PipelineConfig};
use crate::error::{Error, Result};
use crate::export::{indicators_geojson, roughness_csv, to_pretty_json};
use crate::features::{feature_matrix, FeatureId, FeatureMatrix};
use crate::rail::{cant_at_curve_boundaries, cant_from_roll, classify_curves, write_profile_csv, TrackGeometry};
use crate::road::{classify_maneuvers, detect_anomalies, roughness_index, Indicator, RoughnessOutcome};
use crate::trace::{parse_trace, reorient, resample, vertical_linear, ParseReport, Trace, TraceFormat};

#[derive(Debug, Clone)]
pub struct Analysis {
    pub context: Context,
    /// Trace after resampling and reorientation.
    pub trace: Trace,
    pub forward_determined: bool,
    pub features: FeatureMatrix,
    pub indicators: Vec<Indicator>,
    pub roughness: Option<RoughnessOutcome>,
    pub geometry: Option<TrackGeometry>,
    /// Services that were skipped, with the reason.
    pub notes: Vec<String>,
}

fn is_uniform(trace: &Trace) -> bool {
    let dt = 1.0 / trace.nominal_rate;
    trace.samples.windows(2).all(|w| ((w[1].t - w[0].t) - dt).abs() <= 0.01 * dt)
}

/// Run the configured service bundle over one trace.
pub fn analyze_trace(trace: &Trace, cfg: &PipelineConfig) -> Result<Analysis> {
    cfg.validate()?;
    let trace = match cfg.rate {
        Some(rate) => resample(trace, rate)?,
        None if !is_uniform(trace) => resample(trace, trace.nominal_rate)?,
        None => trace.clone(),
    };
    let rate = trace.nominal_rate;
    let oriented = reorient(&trace)?;
    let rt = oriented.trace;
    let mut notes = Vec::new();
    if !oriented.forward_determined {
        notes.push("reorient: heading axis not determined; yaw left as recorded".to_string());
    }

    let vertical = vertical_linear(&rt, cfg.gravity.tau)?;
    let plan = cfg.frame_plan(rate)?;
    let mut set = cfg.features.set.clone();
    if cfg.context == Context::Road {
        for id in &cfg.road.anomaly.features {
            if !set.contains(id) {
                set.push(*id);
            }
        }
    }
    let t0 = rt.samples[0].t;
    let all = feature_matrix(&vertical, &plan, &set, t0)?;
    let features = select_columns(&all, &cfg.features.set)?;

    let mut indicators = Vec::new();
    let mut roughness = None;
    let mut geometry = None;
    match cfg.context {
        Context::Road => {
            if rt.fixes.is_empty() {
                notes.push("anomaly: skipped, no GPS fixes to locate windows".into());
            } else if all.n_rows() < cfg.road.anomaly.min_windows {
                notes.push(format!(
                    "anomaly: skipped, {} windows (need {})",
                    all.n_rows(),
                    cfg.road.anomaly.min_windows
                ));
            } else {
                let out = detect_anomalies(&all, &rt.fixes, &cfg.road.anomaly)?;
                if out.degenerate {
                    notes.push("anomaly: every fused feature column is constant".into());
                }
                indicators.extend(out.indicators);
            }
            if rt.has_gyro() {
                indicators.extend(classify_maneuvers(&rt, &cfg.road.maneuver)?);
            } else {
                notes.push("maneuver: skipped, no gyroscope".into());
            }
            if rt.fixes.is_empty() {
                notes.push("roughness: skipped, no GPS speed".into());
            } else {
                let r = roughness_index(&rt, &cfg.road.roughness)?;
                for s in &r.skipped {
                    notes.push(format!("roughness: segment at {:.0} m skipped, {}", s.start, s.reason));
                }
                roughness = Some(r);
            }
        }
        Context::Rail => {
            let g = cant_from_roll(&rt, &cfg.rail)?;
            for span in &g.excluded {
                notes.push(format!("geometry: {:.2}-{:.2} s excluded, {}", span.t_start, span.t_end, span.reason));
            }
            indicators.extend(classify_curves(&g.points, cfg.rail.curvature_threshold));
            indicators.extend(cant_at_curve_boundaries(&g.points, cfg.rail.curvature_threshold));
            geometry = Some(g);
        }
    }
    indicators.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.kind.cmp(&b.kind)));
    Ok(Analysis {
        context: cfg.context,
        trace: rt,
        forward_determined: oriented.forward_determined,
        features,
        indicators,
        roughness,
        geometry,
        notes,
    })
}

fn select_columns(m: &FeatureMatrix, set: &[FeatureId]) -> Result<FeatureMatrix> {
    if m.names == set {
        return Ok(m.clone());
    }
    let idx: Vec<usize> = set.iter().map(|id| m.column_index(*id).expect("column computed")).collect();
    let rows = m
        .rows
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.values = idx.iter().map(|i| r.values[*i]).collect();
            r.names = set.to_vec();
            r
        })
        .collect();
    FeatureMatrix::new(set.to_vec(), rows)
}

#[derive(Debug, Clone, Serialize)]
struct InputRecord<'a> {
    path: String,
    sha256: String,
    parse: &'a ParseReport,
}

/// Render every output file of an analysis, manifest included, in memory.
pub fn render_outputs(
    analysis: &Analysis,
    cfg: &PipelineConfig,
    input: &Path,
    input_bytes: &[u8],
    parse: &ParseReport,
) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files = Vec::new();
    files.push(("indicators.geojson".to_string(), to_pretty_json(&indicators_geojson(&analysis.indicators))));
    let mut features = Vec::new();
    analysis.features.write_csv(&mut features)?;
    files.push(("features.csv".to_string(), features));
    match analysis.context {
        Context::Road => {
            let reports = analysis.roughness.as_ref().map(|r| r.reports.as_slice()).unwrap_or(&[]);
            files.push(("roughness.csv".to_string(), roughness_csv(reports)?));
        }
        Context::Rail => {
            let mut geo = Vec::new();
            let points = analysis.geometry.as_ref().map(|g| g.points.as_slice()).unwrap_or(&[]);
            write_profile_csv(&mut geo, points, &cfg.rail.twist_bases)?;
            files.push(("geometry.csv".to_string(), geo));
        }
    }
    let mut per_kind: BTreeMap<String, usize> = BTreeMap::new();
    for i in &analysis.indicators {
        *per_kind.entry(i.kind.to_string()).or_default() += 1;
    }
    let hash: String = Sha256::digest(input_bytes).iter().map(|b| format!("{b:02x}")).collect();
    let manifest = json!({
        "tool": "infrasense",
        "version": env!("CARGO_PKG_VERSION"),
        "context": analysis.context,
        "config_hash": cfg.hash(),
        "config": cfg,
        "input": InputRecord { path: input.display().to_string(), sha256: hash, parse },
        "counts": {
            "samples": analysis.trace.samples.len(),
            "fixes": analysis.trace.fixes.len(),
            "windows": analysis.features.n_rows(),
            "indicators": analysis.indicators.len(),
            "by_kind": per_kind,
        },
        "rate": analysis.trace.nominal_rate,
        "forward_determined": analysis.forward_determined,
        "notes": analysis.notes,
        "outputs": files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    });
    files.push(("manifest.json".to_string(), to_pretty_json(&manifest)));
    Ok(files)
}

/// Parse, analyze and render a trace file; nothing touches the disk.
pub fn analyze_file(path: &Path, cfg: &PipelineConfig) -> Result<(Analysis, Vec<(String, Vec<u8>)>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let (trace, report) = parse_trace(path, TraceFormat::from_path(path))?;
    let analysis = analyze_trace(&trace, cfg)?;
    let files = render_outputs(&analysis, cfg, path, &bytes, &report)?;
    Ok((analysis, files))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{haversine_m, LatLon};
    use crate::road::IndicatorKind;
    use crate::synth::{synthesize, Pulse, RateLobe, SynthSpec};

    #[test]
    fn pothole_found_near_truth() {
        let mut spec = SynthSpec::constant(60.0, 100.0, 10.0);
        spec.noise = 0.05;
        spec.seed = 4;
        spec.heading = 45.0;
        spec.pulses.push(Pulse { position: 300.0, length: 0.5, depth: -0.05 });
        let trace = synthesize(&spec).unwrap();
        let a = analyze_trace(&trace, &PipelineConfig::default()).unwrap();
        let anomalies: Vec<_> = a.indicators.iter().filter(|i| i.kind == IndicatorKind::Anomaly).collect();
        assert_eq!(anomalies.len(), 1, "{anomalies:?}");
        let truth = crate::geo::advance(LatLon { lat: spec.origin[0], lon: spec.origin[1] }, 45.0, 300.0);
        let d = haversine_m(anomalies[0].location(), truth);
        assert!(d < 10.0, "{d} m off");
        assert!(a.roughness.is_some());
    }

    #[test]
    fn turn_is_classified() {
        let mut spec = SynthSpec::constant(30.0, 100.0, 10.0);
        spec.noise = 0.02;
        spec.yaw.push(RateLobe { start: 10.0, duration: 6.0, angle: 90.0 });
        let a = analyze_trace(&synthesize(&spec).unwrap(), &PipelineConfig::default()).unwrap();
        let m: Vec<_> = a.indicators.iter().filter(|i| i.kind == IndicatorKind::Maneuver).collect();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].sub_kind, "turn");
    }

    #[test]
    fn rail_context_outputs_geometry() {
        let mut spec = SynthSpec::constant(60.0, 100.0, 20.0);
        spec.yaw.push(RateLobe { start: 10.0, duration: 30.0, angle: 60.0 });
        spec.gyro_noise = 0.001;
        let cfg = PipelineConfig::from_toml_str("context = \"rail\"").unwrap();
        let a = analyze_trace(&synthesize(&spec).unwrap(), &cfg).unwrap();
        assert!(a.geometry.is_some());
        assert!(a.indicators.iter().any(|i| i.kind == IndicatorKind::Curvature));
        let files = render_outputs(&a, &cfg, Path::new("x.csv"), b"", &ParseReport::default()).unwrap();
        let names: Vec<_> = files.iter().map(|f| f.0.as_str()).collect();
        assert_eq!(names, vec!["indicators.geojson", "features.csv", "geometry.csv", "manifest.json"]);
    }

    #[test]
    fn no_gyro_no_fix_notes() {
        let mut spec = SynthSpec::constant(20.0, 100.0, 10.0);
        spec.gyro = false;
        spec.noise = 0.02;
        let mut trace = synthesize(&spec).unwrap();
        trace.fixes.clear();
        let a = analyze_trace(&trace, &PipelineConfig::default()).unwrap();
        assert!(a.indicators.is_empty());
        assert_eq!(a.notes.iter().filter(|n| n.contains("skipped")).count(), 3);
    }
}
