//! Crowd-side fusion of indicators into segment anchors.
//!
//! Each incoming indicator is matched to the nearest same-kind anchor within
//! a radius (or starts a new one) and folded into that anchor's value with an
//! exponential half-life decay. Every match and fuse is appended to a JSONL
//! journal; loading replays it.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_m, local_offset_m, offset_to_latlon, LatLon, EARTH_RADIUS_M};
use crate::road::{Indicator, IndicatorKind};

pub const HISTORY_CAPACITY: usize = 32;
const DAY: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchPolicy {
    /// m
    pub radius: f64,
    /// s
    pub half_life: f64,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy { radius: 15.0, half_life: 30.0 * DAY }
    }
}

impl MatchPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.radius.is_finite() && self.radius > 0.0) {
            return Err(Error::Config(format!("match radius must be positive, got {}", self.radius)));
        }
        if !(self.half_life.is_finite() && self.half_life > 0.0) {
            return Err(Error::Config(format!("half_life must be positive, got {}", self.half_life)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentAnchor {
    pub id: u64,
    pub centroid: LatLon,
    pub contribution_count: u64,
    pub kind: IndicatorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub t: f64,
    pub value: f64,
    pub device: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentState {
    pub anchor: SegmentAnchor,
    pub value: f64,
    pub weight_sum: f64,
    pub last_update: f64,
    pub history: VecDeque<HistoryEntry>,
}

impl SegmentState {
    fn empty(anchor: SegmentAnchor) -> Self {
        SegmentState { anchor, value: 0.0, weight_sum: 0.0, last_update: f64::NEG_INFINITY, history: VecDeque::new() }
    }
}

/// Fold one contribution into `state`. Late arrivals decay the prior by the
/// absolute time gap and never move `last_update` backwards.
pub fn fuse(state: &SegmentState, t: f64, value: f64, device: Option<&str>, policy: &MatchPolicy) -> Result<SegmentState> {
    if !value.is_finite() || !t.is_finite() {
        return Err(Error::Domain(format!("non-finite contribution ({t}, {value})")));
    }
    let mut next = state.clone();
    if state.weight_sum > 0.0 {
        let d = (-(t - state.last_update).abs() / policy.half_life).exp2();
        let prior = d * state.weight_sum;
        next.weight_sum = prior + 1.0;
        next.value = (prior * state.value + value) / next.weight_sum;
        next.last_update = state.last_update.max(t);
    } else {
        next.weight_sum = 1.0;
        next.value = value;
        next.last_update = t;
    }
    if next.history.len() == HISTORY_CAPACITY {
        next.history.pop_front();
    }
    next.history.push_back(HistoryEntry { t, value, device: device.map(str::to_owned) });
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min_lat: f64,
    pub min_lon: f64,
    pub max_lat: f64,
    pub max_lon: f64,
}

impl BBox {
    pub fn new(min_lat: f64, min_lon: f64, max_lat: f64, max_lon: f64) -> Result<Self> {
        if !(min_lat <= max_lat && min_lon <= max_lon) {
            return Err(Error::Domain(format!(
                "inverted bounding box [{min_lat}, {min_lon}] .. [{max_lat}, {max_lon}]"
            )));
        }
        Ok(BBox { min_lat, min_lon, max_lat, max_lon })
    }

    pub fn contains(&self, p: LatLon) -> bool {
        (self.min_lat..=self.max_lat).contains(&p.lat) && (self.min_lon..=self.max_lon).contains(&p.lon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Record {
    Match {
        anchor_id: u64,
        t: f64,
        value: f64,
        lat: f64,
        lon: f64,
        kind: IndicatorKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        device: Option<String>,
    },
    Fuse {
        anchor_id: u64,
        t: f64,
        value: f64,
        lat: f64,
        lon: f64,
        kind: IndicatorKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        device: Option<String>,
    },
}

/// Uniform lat/lon grid over anchor centroids. Cells are `cell` degrees on
/// both axes; longitude indices wrap at the antimeridian.
#[derive(Debug, Clone)]
struct Grid {
    cell: f64,
    lon_cells: i64,
    cells: HashMap<(i64, i64), Vec<u64>>,
}

impl Grid {
    fn new(radius_m: f64) -> Self {
        let cell = (radius_m / EARTH_RADIUS_M).to_degrees().max(1e-6);
        Grid { cell, lon_cells: (360.0 / cell).ceil() as i64, cells: HashMap::new() }
    }

    fn key(&self, p: LatLon) -> (i64, i64) {
        (((p.lat + 90.0) / self.cell).floor() as i64, ((p.lon + 180.0) / self.cell).floor() as i64 % self.lon_cells)
    }

    fn insert(&mut self, id: u64, p: LatLon) {
        self.cells.entry(self.key(p)).or_default().push(id);
    }

    fn remove(&mut self, id: u64, p: LatLon) {
        let key = self.key(p);
        if let Some(v) = self.cells.get_mut(&key) {
            v.retain(|x| *x != id);
            if v.is_empty() {
                self.cells.remove(&key);
            }
        }
    }

    /// Anchor ids in cells that may hold points within `radius_m` of `p`, or
    /// `None` when the cell span would be unreasonably wide (near the poles).
    fn candidates(&self, p: LatLon, radius_m: f64) -> Option<Vec<u64>> {
        let dlat = (radius_m / EARTH_RADIUS_M).to_degrees();
        let max_lat = (p.lat.abs() + dlat).min(90.0);
        let cos = max_lat.to_radians().cos();
        if cos < 1e-3 {
            return None;
        }
        let dlon = dlat / cos;
        let lat_span = (dlat / self.cell).ceil() as i64 + 1;
        let lon_span = (dlon / self.cell).ceil() as i64 + 1;
        if 2 * lon_span + 1 >= self.lon_cells || lon_span > 4096 {
            return None;
        }
        let (ki, kj) = self.key(p);
        let mut out = Vec::new();
        for i in ki - lat_span..=ki + lat_span {
            for j in kj - lon_span..=kj + lon_span {
                if let Some(ids) = self.cells.get(&(i, j.rem_euclid(self.lon_cells))) {
                    out.extend_from_slice(ids);
                }
            }
        }
        Some(out)
    }
}

#[derive(Debug)]
pub struct SegmentStore {
    policy: MatchPolicy,
    states: BTreeMap<u64, SegmentState>,
    next_id: u64,
    grid: Grid,
    rejected: usize,
    journal: Option<(PathBuf, BufWriter<File>)>,
}

impl SegmentStore {
    pub fn new(policy: MatchPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(SegmentStore {
            policy,
            states: BTreeMap::new(),
            next_id: 1,
            grid: Grid::new(policy.radius),
            rejected: 0,
            journal: None,
        })
    }

    /// Open (or create) a journal-backed store, replaying existing records.
    pub fn open(path: &Path, policy: MatchPolicy) -> Result<Self> {
        let mut store = SegmentStore::new(policy)?;
        if path.exists() {
            let file = File::open(path).map_err(|e| Error::io(path, e))?;
            for (i, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: Record = serde_json::from_str(&line)
                    .map_err(|e| Error::CorruptStore { line: i + 1, message: e.to_string() })?;
                store.replay(rec).map_err(|e| Error::CorruptStore { line: i + 1, message: e.to_string() })?;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        store.journal = Some((path.to_path_buf(), BufWriter::new(file)));
        Ok(store)
    }

    fn replay(&mut self, rec: Record) -> Result<()> {
        match rec {
            Record::Match { anchor_id, lat, lon, kind, .. } => {
                let p = LatLon::new(lat, lon)?;
                if self.states.contains_key(&anchor_id) {
                    self.absorb(anchor_id, p);
                } else {
                    self.create_with_id(anchor_id, p, kind);
                }
            }
            Record::Fuse { anchor_id, t, value, device, .. } => {
                let state = self
                    .states
                    .get(&anchor_id)
                    .ok_or_else(|| Error::Format(format!("fuse references unknown anchor {anchor_id}")))?;
                let next = fuse(state, t, value, device.as_deref(), &self.policy)?;
                self.states.insert(anchor_id, next);
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> &MatchPolicy {
        &self.policy
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Contributions refused for non-finite values.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn get(&self, id: u64) -> Option<&SegmentState> {
        self.states.get(&id)
    }

    fn create_with_id(&mut self, id: u64, p: LatLon, kind: IndicatorKind) {
        let anchor = SegmentAnchor { id, centroid: p, contribution_count: 1, kind };
        self.states.insert(id, SegmentState::empty(anchor));
        self.grid.insert(id, p);
        self.next_id = self.next_id.max(id + 1);
    }

    /// Move the centroid to the count-weighted mean including `p`, computed in
    /// the local tangent plane of the old centroid.
    fn absorb(&mut self, id: u64, p: LatLon) {
        let state = self.states.get_mut(&id).expect("anchor exists");
        let old = state.anchor.centroid;
        let c = state.anchor.contribution_count as f64;
        let (n, e) = local_offset_m(old, p);
        let new = offset_to_latlon(old, n / (c + 1.0), e / (c + 1.0));
        state.anchor.centroid = new;
        state.anchor.contribution_count += 1;
        self.grid.remove(id, old);
        self.grid.insert(id, new);
    }

    /// Nearest same-kind anchor within the policy radius, ties to the smaller id.
    pub fn nearest(&self, p: LatLon, kind: IndicatorKind) -> Option<(u64, f64)> {
        let pick = |ids: &mut dyn Iterator<Item = u64>| {
            ids.filter_map(|id| {
                let s = &self.states[&id];
                (s.anchor.kind == kind).then(|| (id, haversine_m(p, s.anchor.centroid)))
            })
            .filter(|(_, d)| *d <= self.policy.radius)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        };
        match self.grid.candidates(p, self.policy.radius) {
            Some(ids) => pick(&mut ids.into_iter()),
            None => pick(&mut self.states.keys().copied()),
        }
    }

    /// Reference implementation of [`nearest`](Self::nearest) scanning every anchor.
    pub fn nearest_exhaustive(&self, p: LatLon, kind: IndicatorKind) -> Option<(u64, f64)> {
        self.states
            .values()
            .filter(|s| s.anchor.kind == kind)
            .map(|s| (s.anchor.id, haversine_m(p, s.anchor.centroid)))
            .filter(|(_, d)| *d <= self.policy.radius)
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
    }

    fn append(&mut self, rec: &Record) -> Result<()> {
        if let Some((path, w)) = self.journal.as_mut() {
            let line = serde_json::to_string(rec).map_err(|e| Error::Format(e.to_string()))?;
            writeln!(w, "{line}").map_err(|e| Error::io(path.clone(), e))?;
        }
        Ok(())
    }

    /// Assign `indicator` to an anchor, creating one when none is in range.
    pub fn match_segment(&mut self, indicator: &Indicator, device: Option<&str>) -> Result<u64> {
        let p = indicator.location();
        p.validate()?;
        let id = match self.nearest(p, indicator.kind) {
            Some((id, _)) => {
                self.absorb(id, p);
                id
            }
            None => {
                let id = self.next_id;
                self.create_with_id(id, p, indicator.kind);
                id
            }
        };
        self.append(&Record::Match {
            anchor_id: id,
            t: indicator.t,
            value: indicator.value,
            lat: p.lat,
            lon: p.lon,
            kind: indicator.kind,
            device: device.map(str::to_owned),
        })?;
        Ok(id)
    }

    /// Match and fuse one indicator. Returns `None` when the value is
    /// non-finite (counted in [`rejected`](Self::rejected)).
    pub fn add(&mut self, indicator: &Indicator, device: Option<&str>) -> Result<Option<u64>> {
        if !indicator.value.is_finite() || !indicator.t.is_finite() {
            self.rejected += 1;
            return Ok(None);
        }
        let id = self.match_segment(indicator, device)?;
        let next = fuse(&self.states[&id], indicator.t, indicator.value, device, &self.policy)?;
        self.states.insert(id, next);
        self.append(&Record::Fuse {
            anchor_id: id,
            t: indicator.t,
            value: indicator.value,
            lat: indicator.lat,
            lon: indicator.lon,
            kind: indicator.kind,
            device: device.map(str::to_owned),
        })?;
        Ok(Some(id))
    }

    /// States whose centroid lies in `bbox` (all when `None`), id-sorted.
    pub fn snapshot(&self, kind: Option<IndicatorKind>, bbox: Option<BBox>) -> Result<Vec<SegmentState>> {
        if let Some(b) = bbox {
            BBox::new(b.min_lat, b.min_lon, b.max_lat, b.max_lon)?;
        }
        Ok(self
            .states
            .values()
            .filter(|s| kind.is_none_or(|k| s.anchor.kind == k))
            .filter(|s| bbox.is_none_or(|b| b.contains(s.anchor.centroid)))
            .cloned()
            .collect())
    }

    pub fn flush(&mut self) -> Result<()> {
        if let Some((path, w)) = self.journal.as_mut() {
            w.flush().map_err(|e| Error::io(path.clone(), e))?;
        }
        Ok(())
    }
}

/// GeoJSON FeatureCollection of anchor states.
pub fn snapshot_geojson(states: &[SegmentState]) -> serde_json::Value {
    let features: Vec<_> = states
        .iter()
        .map(|s| {
            serde_json::json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [s.anchor.centroid.lon, s.anchor.centroid.lat]},
                "properties": {
                    "anchor_id": s.anchor.id,
                    "kind": s.anchor.kind,
                    "contribution_count": s.anchor.contribution_count,
                    "value": s.value,
                    "weight_sum": s.weight_sum,
                    "last_update": s.last_update,
                },
            })
        })
        .collect();
    serde_json::json!({"type": "FeatureCollection", "features": features})
}

/// Store handle for concurrent readers and one writer at a time.
#[derive(Debug, Clone)]
pub struct SharedStore(Arc<RwLock<SegmentStore>>);

impl SharedStore {
    pub fn new(store: SegmentStore) -> Self {
        SharedStore(Arc::new(RwLock::new(store)))
    }

    pub fn add(&self, indicator: &Indicator, device: Option<&str>) -> Result<Option<u64>> {
        self.0.write().expect("store lock poisoned").add(indicator, device)
    }

    pub fn snapshot(&self, kind: Option<IndicatorKind>, bbox: Option<BBox>) -> Result<Vec<SegmentState>> {
        self.0.read().expect("store lock poisoned").snapshot(kind, bbox)
    }

    pub fn into_inner(self) -> Option<SegmentStore> {
        Arc::try_unwrap(self.0).ok().map(|l| l.into_inner().expect("store lock poisoned"))
    }
}
