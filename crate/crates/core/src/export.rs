//! Output formats and the all-or-nothing directory writer.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::road::{Indicator, RoughnessReport};

/// GeoJSON FeatureCollection with one Point per indicator.
pub fn indicators_geojson(indicators: &[Indicator]) -> Value {
    let features: Vec<Value> = indicators
        .iter()
        .map(|i| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [i.lon, i.lat]},
                "properties": {
                    "kind": i.kind,
                    "sub_kind": i.sub_kind,
                    "t": i.t,
                    "severity": i.severity,
                    "confidence": i.confidence,
                    "value": i.value,
                    "unit": i.unit,
                },
            })
        })
        .collect();
    json!({"type": "FeatureCollection", "features": features})
}

fn indicator_from_feature(f: &Value) -> Result<Indicator> {
    let coords = f["geometry"]["coordinates"]
        .as_array()
        .filter(|c| c.len() >= 2)
        .ok_or_else(|| Error::Schema("feature without point coordinates".into()))?;
    let mut props = f["properties"].clone();
    let obj = props
        .as_object_mut()
        .ok_or_else(|| Error::Schema("feature without properties".into()))?;
    obj.insert("lon".into(), coords[0].clone());
    obj.insert("lat".into(), coords[1].clone());
    serde_json::from_value(props).map_err(|e| Error::Schema(format!("indicator feature: {e}")))
}

/// Read indicators from a GeoJSON FeatureCollection or from JSONL with one
/// indicator object per line.
pub fn read_indicators(path: &Path) -> Result<Vec<Indicator>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let trimmed = text.trim_start();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    if let Ok(v) = serde_json::from_str::<Value>(trimmed) {
        if v["type"] == "FeatureCollection" {
            let features = v["features"]
                .as_array()
                .ok_or_else(|| Error::Schema(format!("{}: `features` is not an array", path.display())))?;
            return features.iter().map(indicator_from_feature).collect();
        }
    }
    let mut out = Vec::new();
    for (i, line) in BufReader::new(text.as_bytes()).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::Schema(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

pub fn roughness_csv(reports: &[RoughnessReport]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["start_m", "length_m", "index_m_per_km", "mean_speed", "t_start", "t_end", "lat", "lon"])
        .map_err(err)?;
    for r in reports {
        w.write_record(
            [r.start, r.segment_length, r.index, r.mean_speed, r.t_start, r.t_end, r.lat, r.lon].map(|v| v.to_string()),
        )
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| Error::Format(e.to_string()))
}

pub fn to_pretty_json(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("json serializes");
    out.push(b'\n');
    out
}

/// Write every `(name, bytes)` pair into `dir`. Files are first written as
/// hidden temporaries and renamed only once all of them exist, so a failure
/// leaves no partial output under the final names.
pub fn write_all_atomic(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut staged: Vec<(PathBuf, PathBuf)> = Vec::new();
    let cleanup = |staged: &[(PathBuf, PathBuf)]| {
        for (tmp, _) in staged {
            let _ = fs::remove_file(tmp);
        }
    };
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        let res = fs::File::create(&tmp).and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        });
        staged.push((tmp.clone(), dir.join(name)));
        if let Err(e) = res {
            cleanup(&staged);
            return Err(Error::io(tmp, e));
        }
    }
    for (tmp, dst) in &staged {
        fs::rename(tmp, dst).map_err(|e| Error::io(dst.clone(), e))?;
    }
    Ok(())
}
