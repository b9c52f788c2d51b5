//! Road services: point-anomaly detection over feature matrices, yaw-event
//! (maneuver) classification, an IRI-style roughness ratio, and the
//! quarter-car model used to synthesize vertical acceleration.

mod anomaly;
mod indicator;
mod maneuver;
mod quarter_car;
mod roughness;

pub use anomaly::{detect_anomalies, AnomalyConfig, AnomalyOutcome};
pub use indicator::{Indicator, IndicatorKind};
pub use maneuver::{classify_maneuvers, detect_yaw_events, ManeuverClass, ManeuverConfig, YawEvent};
pub use quarter_car::{
    simulate_quarter_car, simulate_quarter_car_input, QuarterCar, QuarterCarResponse, QuarterCarState, RoadProfile,
};
pub use roughness::{
    cumulative_trapezoid, detrend_linear, roughness_index, RoughnessConfig, RoughnessOutcome, RoughnessReport,
    SkippedSegment,
};
