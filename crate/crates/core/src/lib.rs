//! Crowd-sensed transport infrastructure monitoring.
//!
//! Turns smartphone inertial and GPS recordings into maintenance indicators
//! (road anomalies, driving maneuvers, roughness, rail track geometry),
//! aggregates crowd contributions per infrastructure segment, and packs
//! anomaly reports into 32-character WiFi SSID beacons.
//!
//! Module map:
//!
//! - [`trace`]: trace data model, CSV/JSONL parsing, resampling, gravity
//!   separation, gyro integration and vehicle-frame reorientation.
//! - [`features`]: overlapping windows and the ten-feature statistics library.
//! - [`transforms`]: STFT, DWT/SWT filter banks, EMD and the Hilbert spectrum.
//! - [`road`]: anomaly detection, maneuver classification, roughness index and
//!   the quarter-car simulator.
//! - [`rail`]: cant, twist and curvature from roll/yaw rates.
//! - [`aggregation`]: anchor matching and time-decayed fusion with a JSONL store.
//! - [`dissemination`]: SSID packet codec and the opportunistic beacon simulator.
//! - [`config`], [`synth`], [`pipeline`], [`export`]: orchestration used by the CLI.

pub mod aggregation;
pub mod config;
pub mod dissemination;
pub mod error;
pub mod export;
pub mod features;
pub mod geo;
pub mod pipeline;
pub mod rail;
pub mod road;
pub mod synth;
pub mod trace;
pub mod transforms;

pub use error::{Error, Result};
