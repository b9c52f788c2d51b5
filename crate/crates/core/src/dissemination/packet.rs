use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use crc::{Crc, CRC_16_IBM_3740};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{local_offset_m, offset_to_latlon, LatLon};
use crate::road::{Indicator, IndicatorKind};

pub const PACKET_VERSION: u8 = 1;
pub const PACKET_BYTES: usize = 24;
pub const SSID_CHARS: usize = 32;
pub const MAX_ENTRIES: usize = 3;
/// Offset quantum, m.
pub const OFFSET_STEP_M: f64 = 10.0;
/// At least one offset hit the ±127 step range.
pub const FLAG_CLAMPED: u8 = 0b0001;
/// More than three reports were offered.
pub const FLAG_TRUNCATED: u8 = 0b0010;

// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF
const CRC16: Crc<u16> = Crc::<u16>::new(&CRC_16_IBM_3740);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PacketEntry {
    /// Northward offset from the origin in 10 m steps.
    pub d_north: i8,
    pub d_east: i8,
    /// 4-bit anomaly type.
    pub kind: u8,
    /// 4-bit severity.
    pub severity: u8,
    /// Confidence scaled to 0–255.
    pub confidence: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SsidPacket {
    pub version: u8,
    pub flags: u8,
    /// Degrees × 1e6.
    pub lat_e6: i32,
    pub lon_e6: i32,
    pub entries: Vec<PacketEntry>,
    pub checksum: u16,
}

impl SsidPacket {
    /// Build a packet and compute its checksum.
    pub fn new(version: u8, flags: u8, lat_e6: i32, lon_e6: i32, entries: Vec<PacketEntry>) -> Result<Self> {
        if version > 0xF || flags > 0xF {
            return Err(Error::Domain(format!("version {version} / flags {flags} exceed 4 bits")));
        }
        if entries.len() > MAX_ENTRIES {
            return Err(Error::Domain(format!("{} entries, at most {MAX_ENTRIES} fit", entries.len())));
        }
        if entries.iter().any(|e| e.kind > 0xF || e.severity > 0xF) {
            return Err(Error::Domain("entry type and severity are 4-bit fields".into()));
        }
        if lat_e6.unsigned_abs() > 90_000_000 || lon_e6.unsigned_abs() > 180_000_000 {
            return Err(Error::Domain(format!("origin ({lat_e6}, {lon_e6}) e-6 deg out of range")));
        }
        let mut p = SsidPacket { version, flags, lat_e6, lon_e6, entries, checksum: 0 };
        p.checksum = CRC16.checksum(&p.body());
        Ok(p)
    }

    fn body(&self) -> [u8; PACKET_BYTES - 2] {
        let mut b = [0u8; PACKET_BYTES - 2];
        b[0] = (self.version << 4) | self.flags;
        b[1] = self.entries.len() as u8;
        b[2..6].copy_from_slice(&self.lat_e6.to_le_bytes());
        b[6..10].copy_from_slice(&self.lon_e6.to_le_bytes());
        for (i, e) in self.entries.iter().enumerate() {
            let o = 10 + 4 * i;
            b[o] = e.d_north as u8;
            b[o + 1] = e.d_east as u8;
            b[o + 2] = (e.kind << 4) | e.severity;
            b[o + 3] = e.confidence;
        }
        b
    }

    pub fn to_bytes(&self) -> [u8; PACKET_BYTES] {
        let mut out = [0u8; PACKET_BYTES];
        out[..22].copy_from_slice(&self.body());
        out[22..].copy_from_slice(&self.checksum.to_le_bytes());
        out
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self> {
        if b.len() != PACKET_BYTES {
            return Err(Error::Format(format!("packet must be {PACKET_BYTES} bytes, got {}", b.len())));
        }
        let found = u16::from_le_bytes([b[22], b[23]]);
        let computed = CRC16.checksum(&b[..22]);
        if found != computed {
            return Err(Error::Integrity { found, computed });
        }
        if b[1] > MAX_ENTRIES as u8 {
            return Err(Error::Format(format!("count byte {:#04x} invalid", b[1])));
        }
        let count = b[1] as usize;
        if b[10 + 4 * count..22].iter().any(|v| *v != 0) {
            return Err(Error::Format("unused entry slots are not zero".into()));
        }
        let entries = (0..count)
            .map(|i| {
                let o = 10 + 4 * i;
                PacketEntry {
                    d_north: b[o] as i8,
                    d_east: b[o + 1] as i8,
                    kind: b[o + 2] >> 4,
                    severity: b[o + 2] & 0xF,
                    confidence: b[o + 3],
                }
            })
            .collect();
        let p = SsidPacket::new(
            b[0] >> 4,
            b[0] & 0xF,
            i32::from_le_bytes(b[2..6].try_into().unwrap()),
            i32::from_le_bytes(b[6..10].try_into().unwrap()),
            entries,
        )
        .map_err(|e| Error::Format(e.to_string()))?;
        debug_assert_eq!(p.checksum, found);
        Ok(p)
    }

    pub fn encode(&self) -> String {
        URL_SAFE_NO_PAD.encode(self.to_bytes())
    }

    pub fn origin(&self) -> LatLon {
        LatLon { lat: self.lat_e6 as f64 * 1e-6, lon: self.lon_e6 as f64 * 1e-6 }
    }

    /// Decoded location of entry `i`.
    pub fn entry_location(&self, i: usize) -> Option<LatLon> {
        let e = self.entries.get(i)?;
        Some(offset_to_latlon(self.origin(), e.d_north as f64 * OFFSET_STEP_M, e.d_east as f64 * OFFSET_STEP_M))
    }

    pub fn max_severity(&self) -> u8 {
        self.entries.iter().map(|e| e.severity).max().unwrap_or(0)
    }
}

/// A report to be packed: location, 4-bit type and severity, confidence in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub location: LatLon,
    pub kind: u8,
    pub severity: u8,
    pub confidence: f64,
}

impl AnomalyReport {
    /// Type is the indicator kind's ordinal; the 0–255 severity is mapped onto 4 bits.
    pub fn from_indicator(ind: &Indicator) -> Self {
        let kind = IndicatorKind::ALL.iter().position(|k| *k == ind.kind).unwrap_or(0) as u8;
        AnomalyReport {
            location: ind.location(),
            kind,
            severity: (ind.severity as f64 / 17.0).round() as u8,
            confidence: ind.confidence,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodeOutcome {
    pub ssid: String,
    pub packet: SsidPacket,
    /// Entries whose offset was clamped to the representable range.
    pub clamped: usize,
    /// Reports dropped beyond the first three by severity.
    pub truncated: usize,
}

fn quantize(meters: f64) -> (i8, bool) {
    let q = (meters / OFFSET_STEP_M).round();
    let c = q.clamp(-127.0, 127.0);
    (c as i8, c != q)
}

/// Pack up to three reports around `origin`, keeping the most severe ones.
pub fn encode_packet(origin: LatLon, reports: &[AnomalyReport]) -> Result<EncodeOutcome> {
    origin.validate()?;
    let mut order: Vec<&AnomalyReport> = reports.iter().collect();
    order.sort_by(|a, b| b.severity.cmp(&a.severity));
    let truncated = order.len().saturating_sub(MAX_ENTRIES);
    order.truncate(MAX_ENTRIES);
    let mut clamped = 0;
    let mut entries = Vec::with_capacity(order.len());
    for r in order {
        r.location.validate()?;
        if r.kind > 0xF || r.severity > 0xF {
            return Err(Error::Domain(format!("report type {} / severity {} exceed 4 bits", r.kind, r.severity)));
        }
        if !(0.0..=1.0).contains(&r.confidence) {
            return Err(Error::Domain(format!("confidence {} outside [0,1]", r.confidence)));
        }
        let (n, e) = local_offset_m(origin, r.location);
        let (d_north, cn) = quantize(n);
        let (d_east, ce) = quantize(e);
        clamped += usize::from(cn || ce);
        entries.push(PacketEntry {
            d_north,
            d_east,
            kind: r.kind,
            severity: r.severity,
            confidence: (r.confidence * 255.0).round() as u8,
        });
    }
    let mut flags = 0;
    if clamped > 0 {
        flags |= FLAG_CLAMPED;
    }
    if truncated > 0 {
        flags |= FLAG_TRUNCATED;
    }
    let packet = SsidPacket::new(
        PACKET_VERSION,
        flags,
        (origin.lat * 1e6).round() as i32,
        (origin.lon * 1e6).round() as i32,
        entries,
    )?;
    Ok(EncodeOutcome { ssid: packet.encode(), packet, clamped, truncated })
}

/// Parse a 32-character beacon. Length and alphabet problems are format
/// errors; a checksum mismatch is an integrity error.
pub fn decode_packet(ssid: &str) -> Result<SsidPacket> {
    if ssid.len() != SSID_CHARS {
        return Err(Error::Format(format!("SSID must be {SSID_CHARS} characters, got {}", ssid.len())));
    }
    let bytes = URL_SAFE_NO_PAD
        .decode(ssid)
        .map_err(|e| Error::Format(format!("invalid base64url: {e}")))?;
    SsidPacket::from_bytes(&bytes)
}
