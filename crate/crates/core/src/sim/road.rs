use super::geometry::{first_self_intersection, polyline_distance, Point};
use super::robot::Pose;
use super::SimError;

/// Miter joins longer than this multiple of the half width are beveled.
pub const MITER_LIMIT: f64 = 2.0;

/// A lane built around a spine polyline. All lengths in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RoadGeometry {
    pub spine: Vec<Point>,
    pub width: f64,
    pub left: Vec<Point>,
    pub right: Vec<Point>,
    pub start: Pose,
    pub finish_radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoadStatus {
    OnRoad,
    OffRoad,
    Finished,
}

/// Offsets `spine` by `offset` (positive to the left) with miter joins; outer
/// joins longer than [`MITER_LIMIT`] half widths are beveled.
fn offset_polyline(spine: &[Point], offset: f64) -> Vec<Point> {
    let dirs: Vec<Point> = spine.windows(2).map(|w| (w[1] - w[0]).normalized()).collect();
    let mut out = Vec::with_capacity(spine.len() + 4);
    out.push(spine[0] + dirs[0].perp() * offset);
    for i in 1..spine.len() - 1 {
        let (n1, n2) = (dirs[i - 1].perp(), dirs[i].perp());
        let sum = n1 + n2;
        let cos_half = if sum.norm() == 0.0 {
            0.0
        } else {
            sum.normalized().dot(n1)
        };
        let outer = dirs[i - 1].cross(dirs[i]) * offset < 0.0;
        if cos_half > 0.0 && (!outer || cos_half * MITER_LIMIT >= 1.0) {
            out.push(spine[i] + sum.normalized() * (offset / cos_half));
        } else {
            out.push(spine[i] + n1 * offset);
            out.push(spine[i] + n2 * offset);
        }
    }
    let last = spine.len() - 1;
    out.push(spine[last] + dirs[last - 1].perp() * offset);
    out
}

/// Builds lane boundaries `width / 2` either side of `spine`.
///
/// The robot starts on the first spine point facing along the first segment;
/// the finish disc is centred on the last spine point with radius `width / 2`.
pub fn build_road(spine: &[Point], width: f64) -> Result<RoadGeometry, SimError> {
    if spine.len() < 2 {
        return Err(SimError::Road(format!(
            "spine needs at least 2 points, got {}",
            spine.len()
        )));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(SimError::Road(format!(
            "road width must be positive, got {width}"
        )));
    }
    if let Some(bad) = spine.iter().position(|p| !p.is_finite()) {
        return Err(SimError::Road(format!("spine point {bad} is not finite")));
    }
    if let Some(i) = spine.windows(2).position(|w| w[0] == w[1]) {
        return Err(SimError::Road(format!("spine points {i} and {} coincide", i + 1)));
    }
    let half = width / 2.0;
    let left = offset_polyline(spine, half);
    let right = offset_polyline(spine, -half);
    for (side, line) in [("left", &left), ("right", &right)] {
        if let Some((i, j)) = first_self_intersection(line) {
            return Err(SimError::Road(format!(
                "{side} boundary overlaps itself (segments {i} and {j}); width {width} is too large for the spine curvature"
            )));
        }
        // Inner offsets of tight bends flip direction before they cross.
        if let Some(i) = folded_segment(spine, line) {
            return Err(SimError::Road(format!(
                "{side} boundary folds back near spine point {i}; width {width} is too large for the spine curvature"
            )));
        }
    }
    let heading = (spine[1] - spine[0]).y.atan2((spine[1] - spine[0]).x);
    Ok(RoadGeometry {
        spine: spine.to_vec(),
        width,
        left,
        right,
        start: Pose::new(spine[0].x, spine[0].y, heading),
        finish_radius: half,
    })
}

fn folded_segment(spine: &[Point], line: &[Point]) -> Option<usize> {
    if line.len() != spine.len() {
        // Beveled joins break the one-to-one vertex mapping; rely on the crossing test.
        return None;
    }
    (0..spine.len() - 1).find(|&i| (line[i + 1] - line[i]).dot(spine[i + 1] - spine[i]) <= 0.0)
}

impl RoadGeometry {
    pub fn finish(&self) -> Point {
        *self.spine.last().expect("spine is non-empty")
    }

    pub fn distance_to_spine(&self, p: Point) -> f64 {
        polyline_distance(p, &self.spine)
    }

    pub fn length(&self) -> f64 {
        self.spine.windows(2).map(|w| w[0].distance(w[1])).sum()
    }

    /// Same road reflected about the x-axis.
    pub fn mirrored(&self) -> Result<RoadGeometry, SimError> {
        let spine: Vec<Point> = self.spine.iter().map(|p| Point::new(p.x, -p.y)).collect();
        let mut road = build_road(&spine, self.width)?;
        road.finish_radius = self.finish_radius;
        Ok(road)
    }

    /// Bounding box `(min, max)` of both boundaries.
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.left.iter().chain(&self.right) {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }
}

/// Finished inside the finish disc; off road when the centre is farther than
/// half the width from the spine.
pub fn check_status(pose: &Pose, road: &RoadGeometry) -> RoadStatus {
    let c = pose.position();
    if c.distance(road.finish()) <= road.finish_radius {
        RoadStatus::Finished
    } else if road.distance_to_spine(c) > road.width / 2.0 {
        RoadStatus::OffRoad
    } else {
        RoadStatus::OnRoad
    }
}
