use serde::{Deserialize, Serialize};

use super::indicator::{severity_from_score, Indicator, IndicatorKind};
use crate::error::{Error, Result};
use crate::features::{FeatureId, FeatureMatrix};
use crate::trace::{interpolate_fix_location, median, GeoFix};

/// Consistency constant turning a MAD into a Gaussian standard deviation.
const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalyConfig {
    /// A window is anomalous when its mean robust z-score exceeds `k`.
    pub k: f64,
    pub features: Vec<FeatureId>,
    pub min_windows: usize,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        AnomalyConfig {
            k: 3.0,
            features: vec![FeatureId::Peak2Peak, FeatureId::Mad],
            min_windows: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyOutcome {
    pub indicators: Vec<Indicator>,
    /// Fused score of every window, in row order.
    pub scores: Vec<f64>,
    /// Every selected feature column was constant.
    pub degenerate: bool,
}

/// Robust z-scores of a column, or `None` when the column has no spread.
fn robust_z(column: &[f64]) -> Option<Vec<f64>> {
    let mut tmp = column.to_vec();
    let med = median(&mut tmp);
    let mut dev: Vec<f64> = column.iter().map(|v| (v - med).abs()).collect();
    let mad = median(&mut dev);
    let mut scale = MAD_SCALE * mad;
    if scale <= 0.0 {
        // more than half the column sits on the median; fall back to the mean
        // absolute deviation (Gaussian-consistent factor sqrt(pi/2))
        let mean_abs = dev.iter().sum::<f64>() / dev.len() as f64;
        scale = 1.2533 * mean_abs;
    }
    (scale > 0.0).then(|| column.iter().map(|v| (v - med) / scale).collect())
}

/// Unsupervised point-anomaly detection: per-feature robust z-scores are
/// averaged per window; runs of consecutive windows above `k` merge into one
/// indicator placed at the run's highest-scoring window center.
pub fn detect_anomalies(matrix: &FeatureMatrix, fixes: &[GeoFix], cfg: &AnomalyConfig) -> Result<AnomalyOutcome> {
    if matrix.n_rows() < cfg.min_windows {
        return Err(Error::InsufficientData(format!(
            "anomaly detection needs at least {} windows, got {}",
            cfg.min_windows,
            matrix.n_rows()
        )));
    }
    if cfg.features.is_empty() {
        return Err(Error::Config("anomaly feature subset is empty".into()));
    }
    let mut columns = Vec::with_capacity(cfg.features.len());
    for id in &cfg.features {
        let col = matrix
            .column(*id)
            .ok_or_else(|| Error::Schema(format!("feature matrix lacks `{id}`")))?;
        columns.push(robust_z(&col));
    }
    let rows = matrix.n_rows();
    let degenerate = columns.iter().all(Option::is_none);
    let count = cfg.features.len() as f64;
    let scores: Vec<f64> = (0..rows)
        .map(|r| columns.iter().flatten().map(|z| z[r]).sum::<f64>() / count)
        .collect();
    if degenerate {
        return Ok(AnomalyOutcome {
            indicators: Vec::new(),
            scores,
            degenerate,
        });
    }

    let mut indicators = Vec::new();
    let mut r = 0;
    while r < rows {
        if scores[r] <= cfg.k {
            r += 1;
            continue;
        }
        let mut best = r;
        let mut end = r;
        while end + 1 < rows
            && scores[end + 1] > cfg.k
            && matrix.rows[end + 1].window_index == matrix.rows[end].window_index + 1
        {
            end += 1;
            if scores[end] > scores[best] {
                best = end;
            }
        }
        let row = &matrix.rows[best];
        let t = 0.5 * (row.t_start + row.t_end);
        let loc = interpolate_fix_location(fixes, t)
            .ok_or_else(|| Error::Capability("geo fixes are required to locate anomalies".into()))?;
        let score = scores[best];
        indicators.push(Indicator {
            kind: IndicatorKind::Anomaly,
            sub_kind: "point".into(),
            lat: loc.lat,
            lon: loc.lon,
            t,
            severity: severity_from_score(score),
            confidence: (1.0 - cfg.k / score).clamp(0.0, 1.0),
            value: score,
            unit: "z".into(),
        });
        r = end + 1;
    }
    Ok(AnomalyOutcome {
        indicators,
        scores,
        degenerate,
    })
}
