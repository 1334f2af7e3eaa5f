//! Closed-loop lane keeping: road geometry, proximity sensing, differential
//! drive kinematics and pass/fail adjudication.

mod geometry;
mod output;
mod road;
mod robot;
mod simulate;

pub use geometry::{
    first_self_intersection, point_segment_distance, polyline_distance, ray_segment, segments_intersect,
    Point,
};
pub use output::{
    read_trajectory_csv, render_svg, trajectory_csv, variables_csv, PlotLayer, TrajectoryRow, M1_COLOR,
    M2_COLOR, ROAD_COLOR,
};
pub use road::{build_road, check_status, RoadGeometry, RoadStatus, MITER_LIMIT};
pub use robot::{
    kinematics_step, normalize_angle, read_sensor, Pose, RobotParams, SensorSpec, DEFAULT_SENSOR_DEGREES,
};
pub use simulate::{simulate, ControllerIo, Outcome, SimLimits, SimResult, VariableTrace};

use thiserror::Error;

use crate::engine::EngineError;

/// Default lane width in meters.
pub const DEFAULT_ROAD_WIDTH: f64 = 0.2;
/// Meters per generator map unit.
pub const DEFAULT_MAP_SCALE: f64 = 0.01;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid road: {0}")]
    Road(String),
    #[error("controller configuration: {0}")]
    Controller(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("trajectory file: {0}")]
    Trajectory(String),
}
