use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::packet::{decode_packet, SsidPacket};
use crate::error::{Error, Result};
use crate::geo::{haversine_m, LatLon};
use crate::trace::interp_clamped;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Step, s.
    pub dt: f64,
    /// WiFi range, m.
    pub range: f64,
    /// Hotspot/client switching period, s.
    pub period: f64,
    /// Simulated time, s.
    pub duration: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 1.0, range: 50.0, period: 10.0, duration: 300.0 }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("dt", self.dt), ("range", self.range), ("period", self.period)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("simulate.{name} must be positive, got {v}")));
            }
        }
        if !(self.duration.is_finite() && self.duration >= 0.0) {
            return Err(Error::Config(format!("simulate.duration must be non-negative, got {}", self.duration)));
        }
        Ok(())
    }
}

fn default_duty() -> f64 {
    0.5
}

/// One line of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    /// `(t, lat, lon)`, time-sorted; position is held before the first and
    /// after the last waypoint.
    pub waypoints: Vec<(f64, f64, f64)>,
    /// Hotspot fraction of each period.
    #[serde(default = "default_duty")]
    pub duty: f64,
    /// Schedule offset, s; drawn from the seed when absent.
    #[serde(default)]
    pub phase: Option<f64>,
    /// Beacons the node starts with.
    #[serde(default)]
    pub packets: Vec<String>,
}

/// Read a JSONL scenario, one [`NodeSpec`] per non-blank line.
pub fn read_scenario<R: BufRead>(input: R) -> Result<Vec<NodeSpec>> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let spec: NodeSpec =
            serde_json::from_str(&line).map_err(|e| Error::Schema(format!("scenario line {}: {e}", i + 1)))?;
        out.push(spec);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeMode {
    Hotspot,
    Client,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimNode {
    pub id: String,
    times: Vec<f64>,
    lats: Vec<f64>,
    lons: Vec<f64>,
    pub duty: f64,
    pub phase: f64,
    pub mode: NodeMode,
    /// Packets held, keyed by checksum.
    pub inbox: BTreeMap<u16, SsidPacket>,
    cursor: usize,
}

impl SimNode {
    pub fn position(&self, t: f64) -> LatLon {
        LatLon {
            lat: interp_clamped(&self.times, &self.lats, t).unwrap_or(0.0),
            lon: interp_clamped(&self.times, &self.lons, t).unwrap_or(0.0),
        }
    }

    fn mode_at(&self, t: f64, period: f64) -> NodeMode {
        if (t + self.phase).rem_euclid(period) < self.duty * period {
            NodeMode::Hotspot
        } else {
            NodeMode::Client
        }
    }

    /// Next packet to broadcast: cycles through the inbox in descending
    /// severity (ties by checksum), so the most severe goes out first.
    fn next_broadcast(&mut self) -> Option<SsidPacket> {
        if self.inbox.is_empty() {
            return None;
        }
        let mut order: Vec<&SsidPacket> = self.inbox.values().collect();
        order.sort_by(|a, b| b.max_severity().cmp(&a.max_severity()).then(a.checksum.cmp(&b.checksum)));
        let p = order[self.cursor % order.len()].clone();
        self.cursor += 1;
        Some(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    /// Step index; the time is `step · dt`.
    pub step: u64,
    pub from: usize,
    pub to: usize,
    pub checksum: u16,
}

/// Synchronous time-stepped beacon exchange.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimConfig,
    pub nodes: Vec<SimNode>,
    step: u64,
    log: Vec<Delivery>,
}

impl Simulation {
    pub fn new(specs: &[NodeSpec], config: SimConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut nodes = Vec::with_capacity(specs.len());
        for spec in specs {
            if spec.waypoints.is_empty() {
                return Err(Error::Schema(format!("node `{}` has no waypoints", spec.id)));
            }
            if spec.waypoints.windows(2).any(|w| w[1].0 < w[0].0) {
                return Err(Error::Schema(format!("node `{}` waypoints are not time-sorted", spec.id)));
            }
            for &(_, lat, lon) in &spec.waypoints {
                LatLon::new(lat, lon)?;
            }
            if !(0.0..=1.0).contains(&spec.duty) {
                return Err(Error::Schema(format!("node `{}` duty {} outside [0,1]", spec.id, spec.duty)));
            }
            let drawn: f64 = rng.random_range(0.0..config.period);
            let phase = spec.phase.unwrap_or(drawn);
            let mut inbox = BTreeMap::new();
            for ssid in &spec.packets {
                let p = decode_packet(ssid)?;
                inbox.insert(p.checksum, p);
            }
            nodes.push(SimNode {
                id: spec.id.clone(),
                times: spec.waypoints.iter().map(|w| w.0).collect(),
                lats: spec.waypoints.iter().map(|w| w.1).collect(),
                lons: spec.waypoints.iter().map(|w| w.2).collect(),
                duty: spec.duty,
                phase,
                mode: NodeMode::Client,
                inbox,
                cursor: 0,
            });
        }
        Ok(Simulation { config, nodes, step: 0, log: Vec::new() })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    pub fn log(&self) -> &[Delivery] {
        &self.log
    }

    /// Advance one step. Modes and positions are evaluated at the step start;
    /// hotspots broadcast from their inbox as it was at the step start, so
    /// the outcome does not depend on node order.
    pub fn step(&mut self) -> Vec<Delivery> {
        let t = self.time();
        let period = self.config.period;
        let positions: Vec<LatLon> = self.nodes.iter().map(|n| n.position(t)).collect();
        for n in &mut self.nodes {
            n.mode = n.mode_at(t, period);
        }
        let broadcasts: Vec<(usize, SsidPacket)> = self
            .nodes
            .iter_mut()
            .enumerate()
            .filter(|(_, n)| n.mode == NodeMode::Hotspot)
            .filter_map(|(i, n)| n.next_broadcast().map(|p| (i, p)))
            .collect();
        let mut new = Vec::new();
        for (from, packet) in &broadcasts {
            for to in 0..self.nodes.len() {
                if self.nodes[to].mode != NodeMode::Client
                    || haversine_m(positions[*from], positions[to]) > self.config.range
                {
                    continue;
                }
                if let std::collections::btree_map::Entry::Vacant(e) = self.nodes[to].inbox.entry(packet.checksum) {
                    e.insert(packet.clone());
                    new.push(Delivery { step: self.step, from: *from, to, checksum: packet.checksum });
                }
            }
        }
        self.log.extend_from_slice(&new);
        self.step += 1;
        new
    }

    /// Step until `config.duration` is reached.
    pub fn run(&mut self) -> &[Delivery] {
        let steps = (self.config.duration / self.config.dt).floor() as u64;
        while self.step < steps {
            self.step();
        }
        &self.log
    }

    /// Checksums held per node.
    pub fn holdings(&self) -> Vec<Vec<u16>> {
        self.nodes.iter().map(|n| n.inbox.keys().copied().collect()).collect()
    }
}

/// Delivery log as CSV `t,from,to,checksum` with node ids and hex checksums.
pub fn write_log_csv<W: Write>(out: W, sim: &Simulation) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["t", "from", "to", "checksum"]).map_err(err)?;
    for d in sim.log() {
        w.write_record([
            (d.step as f64 * sim.config.dt).to_string(),
            sim.nodes[d.from].id.clone(),
            sim.nodes[d.to].id.clone(),
            format!("{:04x}", d.checksum),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
