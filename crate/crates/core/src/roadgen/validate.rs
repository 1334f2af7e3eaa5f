use crate::sim::{first_self_intersection, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    TooFewPoints,
    OutOfMap,
    SelfIntersection,
    TooClose,
}

impl InvalidReason {
    pub fn as_str(self) -> &'static str {
        match self {
            InvalidReason::TooFewPoints => "too-few-points",
            InvalidReason::OutOfMap => "out-of-map",
            InvalidReason::SelfIntersection => "self-intersection",
            InvalidReason::TooClose => "too-close",
        }
    }
}

impl std::fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of the validity checks; every check runs so callers can see all
/// violations, and `reason` reports the first in the order listed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub out_of_map: bool,
    pub self_intersection: bool,
    pub too_close: bool,
    pub too_few_points: bool,
    /// Amount by which the constraints are broken, 0 when valid. Used to rank
    /// invalid individuals against each other.
    pub violation: f64,
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        self.reason().is_none()
    }

    pub fn reason(&self) -> Option<InvalidReason> {
        if self.too_few_points {
            Some(InvalidReason::TooFewPoints)
        } else if self.out_of_map {
            Some(InvalidReason::OutOfMap)
        } else if self.self_intersection {
            Some(InvalidReason::SelfIntersection)
        } else if self.too_close {
            Some(InvalidReason::TooClose)
        } else {
            None
        }
    }
}

/// Checks that every point lies in `[0, map_size]²`, that the spine does not
/// cross itself, and that parts of the spine more than `min_spacing * pi / 2`
/// apart along the road stay at least `min_spacing` apart in the plane, so
/// neighbouring stretches of lane do not overlap.
pub fn validate(spine: &[Point], map_size: f64, min_spacing: f64) -> Validity {
    if spine.len() < 2 {
        return Validity {
            out_of_map: false,
            self_intersection: false,
            too_close: false,
            too_few_points: true,
            violation: 1.0,
        };
    }
    let mut violation = 0.0;
    let mut out_of_map = false;
    for p in spine {
        let excess = (-p.x).max(p.x - map_size).max(-p.y).max(p.y - map_size).max(0.0);
        if excess > 0.0 || !p.is_finite() {
            out_of_map = true;
            violation += if excess.is_finite() { excess } else { map_size };
        }
    }
    let self_intersection = first_self_intersection(spine).is_some();
    if self_intersection {
        violation += min_spacing;
    }

    let mut arc = Vec::with_capacity(spine.len());
    let mut s = 0.0;
    arc.push(0.0);
    for w in spine.windows(2) {
        s += w[0].distance(w[1]);
        arc.push(s);
    }
    let window = min_spacing * std::f64::consts::FRAC_PI_2;
    let mut closest_gap: f64 = 0.0;
    for i in 0..spine.len() {
        for j in i + 1..spine.len() {
            if arc[j] - arc[i] <= window {
                continue;
            }
            let d = spine[i].distance(spine[j]);
            if d < min_spacing {
                closest_gap = closest_gap.max(min_spacing - d);
            }
        }
    }
    let too_close = closest_gap > 0.0;
    violation += closest_gap;

    Validity {
        out_of_map,
        self_intersection,
        too_close,
        too_few_points: false,
        violation,
    }
}
