use std::f64::consts::PI;

use super::geometry::{ray_segment, Point};
use super::road::RoadGeometry;

/// Wraps an angle into `(-pi, pi]`.
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: normalize_angle(heading),
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn mirrored(&self) -> Pose {
        Pose::new(self.x, -self.y, -self.heading)
    }
}

/// Infrared proximity sensor mounted on the body edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSpec {
    /// Mount angle relative to the heading, counter-clockwise positive.
    pub angle: f64,
    pub range: f64,
    pub max_reading: f64,
}

impl SensorSpec {
    pub fn at_degrees(deg: f64) -> Self {
        Self {
            angle: deg.to_radians(),
            range: 0.04,
            max_reading: 1.0,
        }
    }
}

/// Mount angles of the six default sensors: side, diagonal and front on the
/// left, then front, diagonal and side on the right.
pub const DEFAULT_SENSOR_DEGREES: [f64; 6] = [90.0, 49.0, 17.0, -17.0, -49.0, -90.0];

/// Differential-drive robot, E-puck sized by default.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotParams {
    pub wheel_radius: f64,
    pub axle_length: f64,
    pub body_radius: f64,
    /// Wheel speed limit in rad/s; commands beyond it are clamped.
    pub max_wheel_speed: f64,
    /// Control period in seconds.
    pub dt: f64,
    pub sensors: Vec<SensorSpec>,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            wheel_radius: 0.0205,
            axle_length: 0.052,
            body_radius: 0.037,
            max_wheel_speed: 6.28,
            dt: 0.032,
            sensors: DEFAULT_SENSOR_DEGREES
                .iter()
                .map(|&d| SensorSpec::at_degrees(d))
                .collect(),
        }
    }
}

impl RobotParams {
    pub fn clamp(&self, speed: f64) -> f64 {
        speed.clamp(-self.max_wheel_speed, self.max_wheel_speed)
    }
}

/// Advances `pose` by one control period with constant wheel speeds (rad/s),
/// integrating the exact circular arc.
pub fn kinematics_step(pose: &Pose, lw: f64, rw: f64, params: &RobotParams) -> Pose {
    let (lw, rw) = (params.clamp(lw), params.clamp(rw));
    let r = params.wheel_radius;
    let v = r * (lw + rw) / 2.0;
    let omega = r * (rw - lw) / params.axle_length;
    let dt = params.dt;
    let h = pose.heading;
    if omega.abs() < 1e-9 {
        Pose::new(
            pose.x + v * dt * h.cos(),
            pose.y + v * dt * h.sin(),
            h + omega * dt,
        )
    } else {
        let h2 = h + omega * dt;
        let rho = v / omega;
        Pose::new(
            pose.x + rho * (h2.sin() - h.sin()),
            pose.y - rho * (h2.cos() - h.cos()),
            h2,
        )
    }
}

/// Reading of one sensor: `max_reading * (1 - d / range)` for a boundary hit at
/// distance `d < range` along the sensor ray, else 0.
pub fn read_sensor(pose: &Pose, spec: &SensorSpec, road: &RoadGeometry, body_radius: f64) -> f64 {
    let dir = Point::from_angle(pose.heading + spec.angle);
    let origin = pose.position() + dir * body_radius;
    let reach = spec.range;
    let mut nearest = f64::INFINITY;
    for line in [&road.left, &road.right] {
        for w in line.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.x.min(b.x) > origin.x + reach
                || a.x.max(b.x) < origin.x - reach
                || a.y.min(b.y) > origin.y + reach
                || a.y.max(b.y) < origin.y - reach
            {
                continue;
            }
            if let Some(t) = ray_segment(origin, dir, a, b) {
                nearest = nearest.min(t);
            }
        }
    }
    if nearest >= spec.range {
        0.0
    } else {
        spec.max_reading * (1.0 - nearest / spec.range)
    }
}
