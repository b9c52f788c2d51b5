//! Seeded synthetic rides: a road profile driven through the quarter-car
//! model, optional yaw/roll lobes, sensor noise and 1 Hz GPS fixes.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{offset_to_latlon, LatLon};
use crate::road::{simulate_quarter_car_input, QuarterCar};
use crate::trace::{GeoFix, InertialSample, Trace};

pub const GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sinusoid {
    /// m
    pub amplitude: f64,
    /// m
    pub wavelength: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Raised-cosine dip (negative depth) or bump centred at `position`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pulse {
    /// Distance of the centre, m.
    pub position: f64,
    /// Along-road extent, m.
    pub length: f64,
    /// Signed elevation at the centre, m.
    pub depth: f64,
}

impl Pulse {
    fn elevation(&self, s: f64) -> f64 {
        let x = s - (self.position - 0.5 * self.length);
        if !(0.0..=self.length).contains(&x) {
            return 0.0;
        }
        self.depth * 0.5 * (1.0 - (2.0 * PI * x / self.length).cos())
    }
}

/// Half-sine angular-rate lobe turning through `angle` degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateLobe {
    pub start: f64,
    pub duration: f64,
    /// deg
    pub angle: f64,
}

impl RateLobe {
    fn rate(&self, t: f64) -> f64 {
        let x = t - self.start;
        if !(0.0..=self.duration).contains(&x) {
            return 0.0;
        }
        self.angle.to_radians() * PI / (2.0 * self.duration) * (PI * x / self.duration).sin()
    }

    fn angle_at(&self, t: f64) -> f64 {
        let x = (t - self.start).clamp(0.0, self.duration);
        self.angle.to_radians() * 0.5 * (1.0 - (PI * x / self.duration).cos())
    }
}

fn default_rate() -> f64 {
    100.0
}
fn default_fix_rate() -> f64 {
    1.0
}
fn default_accuracy() -> f64 {
    5.0
}
fn default_origin() -> [f64; 2] {
    [48.2082, 16.3738]
}
fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    /// s
    pub duration: f64,
    #[serde(default = "default_rate")]
    pub rate: f64,
    /// Constant speed, m/s; ignored when `speed_profile` is given.
    #[serde(default)]
    pub speed: Option<f64>,
    /// `(t, v)` knots, linearly interpolated and held past the ends.
    #[serde(default)]
    pub speed_profile: Vec<(f64, f64)>,
    #[serde(default)]
    pub sinusoids: Vec<Sinusoid>,
    #[serde(default)]
    pub pulses: Vec<Pulse>,
    #[serde(default)]
    pub yaw: Vec<RateLobe>,
    #[serde(default)]
    pub roll: Vec<RateLobe>,
    /// Accelerometer noise σ, m/s².
    #[serde(default)]
    pub noise: f64,
    /// Gyroscope noise σ, rad/s.
    #[serde(default)]
    pub gyro_noise: f64,
    /// GPS horizontal noise σ, m.
    #[serde(default)]
    pub gps_noise: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_origin")]
    pub origin: [f64; 2],
    /// Initial heading, degrees clockwise from north.
    #[serde(default)]
    pub heading: f64,
    #[serde(default = "default_true")]
    pub gyro: bool,
    #[serde(default = "default_fix_rate")]
    pub fix_rate: f64,
    #[serde(default = "default_accuracy")]
    pub fix_accuracy: f64,
    #[serde(default)]
    pub quarter_car: QuarterCar,
}

impl SynthSpec {
    /// A constant-speed ride with defaults everywhere else.
    pub fn constant(duration: f64, rate: f64, speed: f64) -> Self {
        SynthSpec {
            duration,
            rate,
            speed: Some(speed),
            speed_profile: Vec::new(),
            sinusoids: Vec::new(),
            pulses: Vec::new(),
            yaw: Vec::new(),
            roll: Vec::new(),
            noise: 0.0,
            gyro_noise: 0.0,
            gps_noise: 0.0,
            seed: 0,
            origin: default_origin(),
            heading: 0.0,
            gyro: true,
            fix_rate: 1.0,
            fix_accuracy: 5.0,
            quarter_car: QuarterCar::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: SynthSpec = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            return Self::from_toml_str(&text);
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: SynthSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("synth `{name}` must be positive, got {v}")))
            }
        };
        positive("duration", self.duration)?;
        positive("rate", self.rate)?;
        positive("fix_rate", self.fix_rate)?;
        positive("fix_accuracy", self.fix_accuracy)?;
        if self.speed.is_none() && self.speed_profile.is_empty() {
            return Err(Error::Config("synth needs `speed` or `speed_profile`".into()));
        }
        if self.speed.is_some_and(|v| !(v.is_finite() && v >= 0.0))
            || self.speed_profile.iter().any(|(_, v)| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::Config("synth speeds must be non-negative".into()));
        }
        if self.speed_profile.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Config("speed_profile times must increase".into()));
        }
        for s in &self.sinusoids {
            positive("sinusoids.wavelength", s.wavelength)?;
        }
        for p in &self.pulses {
            positive("pulses.length", p.length)?;
        }
        for l in self.yaw.iter().chain(&self.roll) {
            positive("duration of a rate lobe", l.duration)?;
        }
        for (name, v) in [("noise", self.noise), ("gyro_noise", self.gyro_noise), ("gps_noise", self.gps_noise)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("synth `{name}` must be non-negative")));
            }
        }
        LatLon::new(self.origin[0], self.origin[1])?;
        self.quarter_car.validate()
    }

    fn knots(&self) -> Vec<(f64, f64)> {
        if self.speed_profile.is_empty() {
            vec![(0.0, self.speed.unwrap_or(0.0))]
        } else {
            self.speed_profile.clone()
        }
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let k = self.knots();
        if t <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            if t <= w[1].0 {
                let f = (t - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + f * (w[1].1 - w[0].1);
            }
        }
        k[k.len() - 1].1
    }

    fn accel_at(&self, t: f64) -> f64 {
        let k = self.knots();
        for w in k.windows(2) {
            if t >= w[0].0 && t < w[1].0 {
                return (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            }
        }
        0.0
    }

    /// Distance travelled by `t`, exact for the piecewise-linear profile.
    pub fn distance_at(&self, t: f64) -> f64 {
        let k = self.knots();
        let mut s = 0.0;
        let mut prev = (0.0f64, self.speed_at(0.0));
        let mut cuts: Vec<f64> = k.iter().map(|p| p.0).filter(|x| *x > 0.0 && *x < t).collect();
        cuts.push(t);
        for c in cuts {
            if c <= prev.0 {
                continue;
            }
            let v = self.speed_at(c);
            s += 0.5 * (prev.1 + v) * (c - prev.0);
            prev = (c, v);
        }
        s
    }

    /// Road elevation at distance `s`.
    pub fn elevation(&self, s: f64) -> f64 {
        let waves: f64 =
            self.sinusoids.iter().map(|w| w.amplitude * (2.0 * PI * s / w.wavelength + w.phase).sin()).sum();
        waves + self.pulses.iter().map(|p| p.elevation(s)).sum::<f64>()
    }
}

/// Generate the trace described by `spec`. Fixes land on sample timestamps.
pub fn synthesize(spec: &SynthSpec) -> Result<Trace> {
    spec.validate()?;
    let response = simulate_quarter_car_input(
        &spec.quarter_car,
        |t| spec.elevation(spec.distance_at(t)),
        spec.duration,
        spec.rate,
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let accel_noise = Normal::new(0.0, spec.noise).map_err(|e| Error::Config(e.to_string()))?;
    let gyro_noise = Normal::new(0.0, spec.gyro_noise).map_err(|e| Error::Config(e.to_string()))?;
    let gps_noise = Normal::new(0.0, spec.gps_noise).map_err(|e| Error::Config(e.to_string()))?;
    let origin = LatLon { lat: spec.origin[0], lon: spec.origin[1] };
    let dt = 1.0 / spec.rate;
    let fix_every = (spec.rate / spec.fix_rate).round().max(1.0) as usize;

    let mut samples = Vec::with_capacity(response.sprung_accel.len());
    let mut fixes = Vec::new();
    let (mut north, mut east) = (0.0, 0.0);
    let mut prev_heading = spec.heading.to_radians();
    let mut prev_v = spec.speed_at(0.0);
    for (k, za) in response.sprung_accel.iter().enumerate() {
        let t = k as f64 * dt;
        let v = spec.speed_at(t);
        let yaw_rate: f64 = spec.yaw.iter().map(|l| l.rate(t)).sum();
        let roll_rate: f64 = spec.roll.iter().map(|l| l.rate(t)).sum();
        let roll: f64 = spec.roll.iter().map(|l| l.angle_at(t)).sum();
        // heading is clockwise from north, a positive yaw rate turns left
        let heading = spec.heading.to_radians() - spec.yaw.iter().map(|l| l.angle_at(t)).sum::<f64>();
        if k > 0 {
            let ds = 0.5 * (v + prev_v) * dt;
            let h = 0.5 * (heading + prev_heading);
            north += ds * h.cos();
            east += ds * h.sin();
        }
        prev_heading = heading;
        prev_v = v;

        let mut accel = [spec.accel_at(t), v * yaw_rate + GRAVITY * roll.sin(), GRAVITY * roll.cos() + za];
        for a in &mut accel {
            *a += accel_noise.sample(&mut rng);
        }
        let gyro = spec.gyro.then(|| {
            [
                roll_rate + gyro_noise.sample(&mut rng),
                gyro_noise.sample(&mut rng),
                yaw_rate + gyro_noise.sample(&mut rng),
            ]
        });
        samples.push(InertialSample { t, accel, gyro });
        if k % fix_every == 0 {
            let p = offset_to_latlon(origin, north + gps_noise.sample(&mut rng), east + gps_noise.sample(&mut rng));
            fixes.push(GeoFix { t, lat: p.lat, lon: p.lon, speed: v, accuracy: spec.fix_accuracy });
        }
    }
    Trace::new(samples, fixes, spec.rate, "synthetic")
}

/// Write a trace as CSV (`t,ax,ay,az,gx,gy,gz,lat,lon,speed,acc`). Fix columns
/// are filled on the rows whose timestamp equals a fix time.
pub fn write_trace_csv<W: Write>(out: W, trace: &Trace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| Error::Format(e.to_string());
    w.write_record(["t", "ax", "ay", "az", "gx", "gy", "gz", "lat", "lon", "speed", "acc"]).map_err(err)?;
    let mut fixes = trace.fixes.iter().peekable();
    for s in &trace.samples {
        let mut rec: Vec<String> = Vec::with_capacity(11);
        rec.push(s.t.to_string());
        rec.extend(s.accel.iter().map(f64::to_string));
        match s.gyro {
            Some(g) => rec.extend(g.iter().map(f64::to_string)),
            None => rec.extend(std::iter::repeat_n(String::new(), 3)),
        }
        while fixes.peek().is_some_and(|f| f.t < s.t) {
            fixes.next();
        }
        match fixes.peek() {
            Some(f) if f.t == s.t => {
                rec.extend([f.lat, f.lon, f.speed, f.accuracy].iter().map(f64::to_string));
                fixes.next();
            }
            _ => rec.extend(std::iter::repeat_n(String::new(), 4)),
        }
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))?;
    Ok(())
}
