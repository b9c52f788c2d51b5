use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::LatLon;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndicatorKind {
    Anomaly,
    Maneuver,
    Roughness,
    Cant,
    Twist,
    Curvature,
}

impl IndicatorKind {
    pub const ALL: [IndicatorKind; 6] = [
        IndicatorKind::Anomaly,
        IndicatorKind::Maneuver,
        IndicatorKind::Roughness,
        IndicatorKind::Cant,
        IndicatorKind::Twist,
        IndicatorKind::Curvature,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IndicatorKind::Anomaly => "anomaly",
            IndicatorKind::Maneuver => "maneuver",
            IndicatorKind::Roughness => "roughness",
            IndicatorKind::Cant => "cant",
            IndicatorKind::Twist => "twist",
            IndicatorKind::Curvature => "curvature",
        }
    }
}

impl fmt::Display for IndicatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IndicatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IndicatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Format(format!("unknown indicator kind `{s}`")))
    }
}

/// A located, timestamped maintenance observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Indicator {
    pub kind: IndicatorKind,
    pub sub_kind: String,
    pub lat: f64,
    pub lon: f64,
    pub t: f64,
    pub severity: u8,
    pub confidence: f64,
    pub value: f64,
    pub unit: String,
}

impl Indicator {
    pub fn location(&self) -> LatLon {
        LatLon {
            lat: self.lat,
            lon: self.lon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.location().validate()?;
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Domain(format!("confidence {} outside [0,1]", self.confidence)));
        }
        Ok(())
    }
}

/// Map a non-negative score onto the 0–255 severity scale (16 per unit).
pub(crate) fn severity_from_score(score: f64) -> u8 {
    (16.0 * score).round().clamp(0.0, 255.0) as u8
}
