//! Small spherical-earth helpers shared by aggregation, dissemination and the
//! synthetic trace generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean earth radius (IUGG), meters.
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        let p = LatLon { lat, lon };
        p.validate()?;
        Ok(p)
    }

    pub fn is_valid(&self) -> bool {
        self.lat.is_finite() && self.lon.is_finite() && self.lat.abs() <= 90.0 && self.lon.abs() <= 180.0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "invalid WGS84 location ({}, {})",
                self.lat, self.lon
            )))
        }
    }
}

/// Great-circle distance in meters (haversine).
pub fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

/// North/east offset of `p` from `origin` in a local tangent plane, meters.
pub fn local_offset_m(origin: LatLon, p: LatLon) -> (f64, f64) {
    let mut dlon = p.lon - origin.lon;
    if dlon > 180.0 {
        dlon -= 360.0;
    } else if dlon < -180.0 {
        dlon += 360.0;
    }
    let north = (p.lat - origin.lat).to_radians() * EARTH_RADIUS_M;
    let east = dlon.to_radians() * EARTH_RADIUS_M * origin.lat.to_radians().cos();
    (north, east)
}

/// Inverse of [`local_offset_m`].
pub fn offset_to_latlon(origin: LatLon, north_m: f64, east_m: f64) -> LatLon {
    let lat = origin.lat + (north_m / EARTH_RADIUS_M).to_degrees();
    let cos = origin.lat.to_radians().cos().max(1e-12);
    let mut lon = origin.lon + (east_m / (EARTH_RADIUS_M * cos)).to_degrees();
    if lon > 180.0 {
        lon -= 360.0;
    } else if lon < -180.0 {
        lon += 360.0;
    }
    LatLon { lat, lon }
}

/// Point reached after travelling `distance_m` from `origin` along a constant
/// heading (degrees clockwise from north), flat-earth approximation.
pub fn advance(origin: LatLon, heading_deg: f64, distance_m: f64) -> LatLon {
    let h = heading_deg.to_radians();
    offset_to_latlon(origin, distance_m * h.cos(), distance_m * h.sin())
}
