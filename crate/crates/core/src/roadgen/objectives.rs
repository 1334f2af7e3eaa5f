use crate::sim::{polyline_distance, Point};

use super::genome::{GenomeSpace, RoadGenome};

/// Curvature of the circle through three points: `4 * area / (|ab| |bc| |ca|)`.
pub fn three_point_curvature(a: Point, b: Point, c: Point) -> f64 {
    let (ab, bc, ca) = (a.distance(b), b.distance(c), c.distance(a));
    let denom = ab * bc * ca;
    if denom == 0.0 {
        return 0.0;
    }
    2.0 * (b - a).cross(c - b).abs() / denom
}

/// Largest absolute three-point curvature over consecutive spine triples.
pub fn max_curvature(spine: &[Point]) -> f64 {
    spine
        .windows(3)
        .map(|w| three_point_curvature(w[0], w[1], w[2]))
        .fold(0.0, f64::max)
}

/// Symmetric Hausdorff distance between two polylines.
pub fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let one_way = |x: &[Point], y: &[Point]| x.iter().map(|&p| polyline_distance(p, y)).fold(0.0, f64::max);
    one_way(a, b).max(one_way(b, a))
}

/// Space in which the diversity objective measures distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Diversity {
    /// Normalized gene distance.
    #[default]
    Genome,
    /// Hausdorff distance between decoded spines, in map units.
    Spine,
}

/// Mean distance from member `index` to every other member of `archive`.
/// Members are `(genome, spine)` pairs; a lone member scores 0.
pub fn diversity(
    index: usize,
    archive: &[(&RoadGenome, &[Point])],
    space: &GenomeSpace,
    mode: Diversity,
) -> f64 {
    if archive.len() < 2 {
        return 0.0;
    }
    let (g, s) = archive[index];
    let total: f64 = archive
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != index)
        .map(|(_, &(h, t))| match mode {
            Diversity::Genome => space.distance(g, h),
            Diversity::Spine => hausdorff(s, t),
        })
        .sum();
    total / (archive.len() - 1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_has_zero_curvature() {
        let spine: Vec<Point> = (0..10).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
        assert_eq!(max_curvature(&spine), 0.0);
    }

    #[test]
    fn circle_curvature() {
        let r = 15.0;
        let spine: Vec<Point> = (0..40).map(|i| Point::from_angle(i as f64 / r) * r).collect();
        assert!((max_curvature(&spine) - 1.0 / r).abs() < 1e-9);
    }

    #[test]
    fn hausdorff_of_parallel_lines() {
        let a = [Point::new(0.0, 0.0), Point::new(10.0, 0.0)];
        let b = [Point::new(0.0, 3.0), Point::new(10.0, 3.0)];
        assert_eq!(hausdorff(&a, &b), 3.0);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }
}
