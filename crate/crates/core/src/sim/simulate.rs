use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{step, PSystem, VarRef, VarSlot};
use crate::model::{left_output, right_output, sensor_label, SENSOR_VAR};

use super::geometry::Point;
use super::road::{check_status, RoadGeometry, RoadStatus};
use super::robot::{kinematics_step, read_sensor, Pose, RobotParams};
use super::SimError;

#[derive(Debug, Clone, PartialEq)]
pub struct SimLimits {
    pub max_steps: usize,
    /// Seed of the controller's random source.
    pub seed: u64,
    /// Keep the full controller valuation after every step.
    pub record_variables: bool,
    /// Spawn pose; the road's start pose when `None`.
    pub start: Option<Pose>,
}

impl Default for SimLimits {
    fn default() -> Self {
        Self {
            max_steps: 5000,
            seed: 0,
            record_variables: false,
            start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Completed,
    OffRoad,
    StepLimit,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::OffRoad => "off_road",
            Outcome::StepLimit => "step_limit",
        }
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Controller valuation after each step, columns in slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableTrace {
    pub names: Arc<Vec<String>>,
    pub rows: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub outcome: Outcome,
    pub steps: usize,
    /// Poses before the first step and after every step.
    pub trajectory: Vec<Pose>,
    /// Wheel speeds read from the controller at each step, before clamping.
    pub wheel_speeds: Vec<(f64, f64)>,
    pub failure: Option<Point>,
    /// Largest distance of the robot centre from the spine.
    pub max_deviation: f64,
    pub variables: Option<VariableTrace>,
}

impl SimResult {
    /// Fraction of the body diameter outside the lane at the worst moment, in `[0, 1]`.
    pub fn max_out_of_bound(&self, road: &RoadGeometry, body_radius: f64) -> f64 {
        ((self.max_deviation + body_radius - road.width / 2.0) / (2.0 * body_radius)).clamp(0.0, 1.0)
    }

    /// A run fails when the robot left the lane, or when more than `threshold`
    /// of the body was outside it; under the centre-based stop rule the first
    /// condition always triggers first.
    pub fn failed(&self, road: &RoadGeometry, body_radius: f64, threshold: f64) -> bool {
        self.outcome == Outcome::OffRoad || self.max_out_of_bound(road, body_radius) > threshold
    }
}

/// Where the closed loop writes readings and reads wheel speeds.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerIo {
    pub sensors: Vec<VarSlot>,
    pub left: VarSlot,
    pub right: VarSlot,
}

impl ControllerIo {
    /// Sensor `i` writes `s_{i+1}.x`; speeds come from `s.x_sl` and `s.x_sr`.
    pub fn resolve(sys: &PSystem, sensors: usize) -> Result<Self, SimError> {
        let find = |r: VarRef| {
            sys.slot(&r)
                .ok_or_else(|| SimError::Controller(format!("controller has no variable `{r}`")))
        };
        Ok(Self {
            sensors: (1..=sensors)
                .map(|i| find(VarRef::new(sensor_label(i), SENSOR_VAR)))
                .collect::<Result<_, _>>()?,
            left: find(left_output())?,
            right: find(right_output())?,
        })
    }
}

/// Closed loop: read sensors, write them into the sensor membranes, run one
/// controller step, drive the wheels with the output speeds, then check the lane.
pub fn simulate(
    controller: &PSystem,
    road: &RoadGeometry,
    params: &RobotParams,
    limits: &SimLimits,
) -> Result<SimResult, SimError> {
    let io = ControllerIo::resolve(controller, params.sensors.len())?;
    let mut sys = controller.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(limits.seed);
    let mut pose = limits.start.unwrap_or(road.start);
    let mut trajectory = vec![pose];
    let mut wheel_speeds = Vec::new();
    let mut max_deviation = road.distance_to_spine(pose.position());
    let mut variables = limits.record_variables.then(|| VariableTrace {
        names: sys.qualified_names().clone(),
        rows: Vec::new(),
    });

    let finish =
        |outcome, trajectory: Vec<Pose>, wheel_speeds, failure, max_deviation, variables| SimResult {
            outcome,
            steps: trajectory.len() - 1,
            trajectory,
            wheel_speeds,
            failure,
            max_deviation,
            variables,
        };

    match check_status(&pose, road) {
        RoadStatus::OffRoad => {
            let at = Some(pose.position());
            return Ok(finish(
                Outcome::OffRoad,
                trajectory,
                wheel_speeds,
                at,
                max_deviation,
                variables,
            ));
        }
        RoadStatus::Finished => {
            return Ok(finish(
                Outcome::Completed,
                trajectory,
                wheel_speeds,
                None,
                max_deviation,
                variables,
            ));
        }
        RoadStatus::OnRoad => {}
    }

    for _ in 0..limits.max_steps {
        for (spec, &slot) in params.sensors.iter().zip(&io.sensors) {
            sys.set(slot, read_sensor(&pose, spec, road, params.body_radius));
        }
        let trace = step(&mut sys, &mut rng)?;
        let (lw, rw) = (sys.get(io.left), sys.get(io.right));
        if let Some(v) = variables.as_mut() {
            v.rows.push(trace.values);
        }
        wheel_speeds.push((lw, rw));
        pose = kinematics_step(&pose, lw, rw, params);
        trajectory.push(pose);
        max_deviation = max_deviation.max(road.distance_to_spine(pose.position()));
        match check_status(&pose, road) {
            RoadStatus::OnRoad => {}
            RoadStatus::Finished => {
                return Ok(finish(
                    Outcome::Completed,
                    trajectory,
                    wheel_speeds,
                    None,
                    max_deviation,
                    variables,
                ))
            }
            RoadStatus::OffRoad => {
                let at = Some(pose.position());
                return Ok(finish(
                    Outcome::OffRoad,
                    trajectory,
                    wheel_speeds,
                    at,
                    max_deviation,
                    variables,
                ));
            }
        }
    }
    Ok(finish(
        Outcome::StepLimit,
        trajectory,
        wheel_speeds,
        None,
        max_deviation,
        variables,
    ))
}
