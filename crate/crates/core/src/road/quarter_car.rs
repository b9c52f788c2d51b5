use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-degree-of-freedom quarter-car, every parameter normalized by the
/// sprung mass. Defaults are the usual "golden car" set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuarterCar {
    /// Unsprung / sprung mass.
    pub mass_ratio: f64,
    /// Suspension spring, 1/s².
    pub suspension_stiffness: f64,
    /// Tire spring, 1/s².
    pub tire_stiffness: f64,
    /// Suspension damper, 1/s.
    pub damping: f64,
}

impl Default for QuarterCar {
    fn default() -> Self {
        QuarterCar {
            mass_ratio: 0.15,
            suspension_stiffness: 63.3,
            tire_stiffness: 653.0,
            damping: 6.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QuarterCarState {
    pub sprung_pos: f64,
    pub sprung_vel: f64,
    pub unsprung_pos: f64,
    pub unsprung_vel: f64,
}

impl QuarterCarState {
    fn axpy(&self, k: f64, d: &QuarterCarState) -> QuarterCarState {
        QuarterCarState {
            sprung_pos: self.sprung_pos + k * d.sprung_pos,
            sprung_vel: self.sprung_vel + k * d.sprung_vel,
            unsprung_pos: self.unsprung_pos + k * d.unsprung_pos,
            unsprung_vel: self.unsprung_vel + k * d.unsprung_vel,
        }
    }

    fn is_finite(&self) -> bool {
        self.sprung_pos.is_finite()
            && self.sprung_vel.is_finite()
            && self.unsprung_pos.is_finite()
            && self.unsprung_vel.is_finite()
    }
}

impl QuarterCar {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !(positive(self.mass_ratio) && positive(self.suspension_stiffness) && positive(self.tire_stiffness)) {
            return Err(Error::Domain("quarter-car mass ratio and stiffnesses must be positive".into()));
        }
        if !(self.damping.is_finite() && self.damping >= 0.0) {
            return Err(Error::Domain("quarter-car damping must be non-negative".into()));
        }
        Ok(())
    }

    /// Sprung-mass acceleration in a given state.
    pub fn sprung_accel(&self, s: &QuarterCarState) -> f64 {
        -self.suspension_stiffness * (s.sprung_pos - s.unsprung_pos) - self.damping * (s.sprung_vel - s.unsprung_vel)
    }

    fn derivative(&self, s: &QuarterCarState, road: f64) -> QuarterCarState {
        let spring = self.suspension_stiffness * (s.sprung_pos - s.unsprung_pos);
        let damper = self.damping * (s.sprung_vel - s.unsprung_vel);
        QuarterCarState {
            sprung_pos: s.sprung_vel,
            sprung_vel: -spring - damper,
            unsprung_pos: s.unsprung_vel,
            unsprung_vel: (spring + damper - self.tire_stiffness * (s.unsprung_pos - road)) / self.mass_ratio,
        }
    }

    /// One classical Runge-Kutta step; `road` holds the elevation at the
    /// start, middle and end of the step.
    pub fn step_rk4(&self, s: &QuarterCarState, road: [f64; 3], dt: f64) -> QuarterCarState {
        let k1 = self.derivative(s, road[0]);
        let k2 = self.derivative(&s.axpy(0.5 * dt, &k1), road[1]);
        let k3 = self.derivative(&s.axpy(0.5 * dt, &k2), road[1]);
        let k4 = self.derivative(&s.axpy(dt, &k3), road[2]);
        QuarterCarState {
            sprung_pos: s.sprung_pos + dt / 6.0 * (k1.sprung_pos + 2.0 * k2.sprung_pos + 2.0 * k3.sprung_pos + k4.sprung_pos),
            sprung_vel: s.sprung_vel + dt / 6.0 * (k1.sprung_vel + 2.0 * k2.sprung_vel + 2.0 * k3.sprung_vel + k4.sprung_vel),
            unsprung_pos: s.unsprung_pos
                + dt / 6.0 * (k1.unsprung_pos + 2.0 * k2.unsprung_pos + 2.0 * k3.unsprung_pos + k4.unsprung_pos),
            unsprung_vel: s.unsprung_vel
                + dt / 6.0 * (k1.unsprung_vel + 2.0 * k2.unsprung_vel + 2.0 * k3.unsprung_vel + k4.unsprung_vel),
        }
    }

    /// Kinetic plus spring energy per unit sprung mass.
    pub fn mechanical_energy(&self, s: &QuarterCarState, road: f64) -> f64 {
        0.5 * s.sprung_vel.powi(2)
            + 0.5 * self.mass_ratio * s.unsprung_vel.powi(2)
            + 0.5 * self.suspension_stiffness * (s.sprung_pos - s.unsprung_pos).powi(2)
            + 0.5 * self.tire_stiffness * (s.unsprung_pos - road).powi(2)
    }

    fn system_matrix(&self) -> Matrix4<f64> {
        let (k2, k1, c, mu) = (self.suspension_stiffness, self.tire_stiffness, self.damping, self.mass_ratio);
        Matrix4::new(
            0.0, 1.0, 0.0, 0.0,
            -k2, -c, k2, c,
            0.0, 0.0, 0.0, 1.0,
            k2 / mu, c / mu, -(k1 + k2) / mu, -c / mu,
        )
    }

    /// Largest RK4 amplification factor over the system's modes at step `dt`.
    pub fn rk4_amplification(&self, dt: f64) -> f64 {
        self.system_matrix()
            .complex_eigenvalues()
            .iter()
            .map(|lambda| {
                let z = lambda * dt;
                let r = nalgebra::Complex::new(1.0, 0.0) + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Smallest sampling rate (to 1 Hz) at which RK4 does not amplify any mode.
    pub fn min_stable_rate(&self) -> f64 {
        let stable = |rate: f64| self.rk4_amplification(1.0 / rate) <= 1.0 + 1e-12;
        let mut hi = 1.0;
        while !stable(hi) {
            hi *= 2.0;
        }
        let mut lo = hi / 2.0;
        while hi - lo > 1.0 {
            let mid = 0.5 * (lo + hi);
            if stable(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.ceil()
    }

    pub fn check_step(&self, rate: f64) -> Result<()> {
        if self.rk4_amplification(1.0 / rate) > 1.0 + 1e-12 {
            return Err(Error::Numeric(format!(
                "quarter-car integration unstable at {rate} Hz; use at least {} Hz",
                self.min_stable_rate()
            )));
        }
        Ok(())
    }
}

/// Road elevation sampled at uniform spacing along the travelled distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadProfile {
    /// Distance between samples, meters.
    pub spacing: f64,
    /// Elevation, meters.
    pub elevations: Vec<f64>,
}

impl RoadProfile {
    pub fn from_fn(length: f64, spacing: f64, f: impl Fn(f64) -> f64) -> Self {
        let n = (length / spacing).round() as usize + 1;
        RoadProfile {
            spacing,
            elevations: (0..n).map(|i| f(i as f64 * spacing)).collect(),
        }
    }

    pub fn length(&self) -> f64 {
        self.spacing * self.elevations.len().saturating_sub(1) as f64
    }

    /// Linear interpolation; constant continuation past either end.
    pub fn elevation_at(&self, s: f64) -> f64 {
        let n = self.elevations.len();
        if n == 0 {
            return 0.0;
        }
        let x = s / self.spacing;
        if x <= 0.0 {
            return self.elevations[0];
        }
        let i = x.floor() as usize;
        if i + 1 >= n {
            return self.elevations[n - 1];
        }
        let w = x - i as f64;
        self.elevations[i] * (1.0 - w) + self.elevations[i + 1] * w
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuarterCarResponse {
    /// Sprung-mass acceleration at `t = k / rate`.
    pub sprung_accel: Vec<f64>,
    pub states: Vec<QuarterCarState>,
    pub road: Vec<f64>,
}

/// Integrate the quarter-car from rest over `duration` seconds with the road
/// elevation given as a function of time.
pub fn simulate_quarter_car_input(
    params: &QuarterCar,
    road: impl Fn(f64) -> f64,
    duration: f64,
    rate: f64,
) -> Result<QuarterCarResponse> {
    params.validate()?;
    if !(rate.is_finite() && rate > 0.0) || !(duration.is_finite() && duration >= 0.0) {
        return Err(Error::Domain("rate must be positive and duration non-negative".into()));
    }
    params.check_step(rate)?;
    let dt = 1.0 / rate;
    let steps = (duration * rate + 1e-9).floor() as usize;
    let y0 = road(0.0);
    let mut state = QuarterCarState {
        sprung_pos: y0,
        unsprung_pos: y0,
        ..Default::default()
    };
    let mut sprung_accel = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut elevations = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = k as f64 * dt;
        let y = road(t);
        sprung_accel.push(params.sprung_accel(&state));
        states.push(state);
        elevations.push(y);
        if k < steps {
            state = params.step_rk4(&state, [y, road(t + 0.5 * dt), road(t + dt)], dt);
            if !state.is_finite() {
                return Err(Error::Numeric(format!("quarter-car state diverged at t = {t} s")));
            }
        }
    }
    Ok(QuarterCarResponse {
        sprung_accel,
        states,
        road: elevations,
    })
}

/// Sprung-mass acceleration while driving `profile` at constant `speed`.
pub fn simulate_quarter_car(profile: &RoadProfile, speed: f64, params: &QuarterCar, rate: f64) -> Result<Vec<f64>> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(Error::Domain(format!("speed must be positive, got {speed}")));
    }
    if !(profile.spacing.is_finite() && profile.spacing > 0.0) {
        return Err(Error::Domain("profile spacing must be positive".into()));
    }
    let duration = profile.length() / speed;
    Ok(simulate_quarter_car_input(params, |t| profile.elevation_at(speed * t), duration, rate)?.sprung_accel)
}
