use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::sim::Point;

/// One constant-curvature piece of road, in map units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gene {
    pub length: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadGenome {
    pub genes: Vec<Gene>,
}

/// Bounds of the genome space.
#[derive(Debug, Clone, PartialEq)]
pub struct GenomeSpace {
    pub genes: usize,
    pub min_length: f64,
    pub max_length: f64,
    pub max_curvature: f64,
}

impl Default for GenomeSpace {
    fn default() -> Self {
        Self {
            genes: 6,
            min_length: 8.0,
            max_length: 30.0,
            max_curvature: 0.08,
        }
    }
}

impl GenomeSpace {
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> RoadGenome {
        RoadGenome {
            genes: (0..self.genes)
                .map(|_| Gene {
                    length: rng.random_range(self.min_length..=self.max_length),
                    curvature: rng.random_range(-self.max_curvature..=self.max_curvature),
                })
                .collect(),
        }
    }

    pub fn clamp(&self, g: Gene) -> Gene {
        Gene {
            length: g.length.clamp(self.min_length, self.max_length),
            curvature: g.curvature.clamp(-self.max_curvature, self.max_curvature),
        }
    }

    pub fn contains(&self, genome: &RoadGenome) -> bool {
        genome.genes.len() == self.genes
            && genome.genes.iter().all(|g| {
                g.length > 0.0
                    && g.length >= self.min_length
                    && g.length <= self.max_length
                    && g.curvature.abs() <= self.max_curvature
            })
    }

    /// Gaussian perturbation of each gene with probability `rate`, clamped to the space.
    pub fn mutate<R: Rng + ?Sized>(&self, genome: &mut RoadGenome, rate: f64, rng: &mut R) {
        let len_sigma = 0.2 * (self.max_length - self.min_length);
        let curv_sigma = 0.3 * self.max_curvature;
        let dl = Normal::new(0.0, len_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
        let dk = Normal::new(0.0, curv_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
        for g in &mut genome.genes {
            if rng.random::<f64>() < rate {
                *g = self.clamp(Gene {
                    length: g.length + dl.sample(rng),
                    curvature: g.curvature + dk.sample(rng),
                });
            }
        }
    }

    /// Distance in the genome space with each coordinate scaled to `[0, 1]`.
    pub fn distance(&self, a: &RoadGenome, b: &RoadGenome) -> f64 {
        let len_span = (self.max_length - self.min_length).max(f64::MIN_POSITIVE);
        let curv_span = (2.0 * self.max_curvature).max(f64::MIN_POSITIVE);
        a.genes
            .iter()
            .zip(&b.genes)
            .map(|(x, y)| {
                let dl = (x.length - y.length) / len_span;
                let dk = (x.curvature - y.curvature) / curv_span;
                dl * dl + dk * dk
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// One-point crossover; the cut lies strictly inside the gene list.
pub fn one_point_crossover<R: Rng + ?Sized>(
    a: &RoadGenome,
    b: &RoadGenome,
    rng: &mut R,
) -> (RoadGenome, RoadGenome) {
    let n = a.genes.len().min(b.genes.len());
    if n < 2 {
        return (a.clone(), b.clone());
    }
    let cut = rng.random_range(1..n);
    let mut c1 = a.genes[..cut].to_vec();
    c1.extend_from_slice(&b.genes[cut..]);
    let mut c2 = b.genes[..cut].to_vec();
    c2.extend_from_slice(&a.genes[cut..]);
    (RoadGenome { genes: c1 }, RoadGenome { genes: c2 })
}

/// Point reached after arc length `s` from `p` with heading `theta` and curvature `k`.
pub fn arc_point(p: Point, theta: f64, k: f64, s: f64) -> Point {
    if k == 0.0 {
        p + Point::from_angle(theta) * s
    } else {
        let t2 = theta + k * s;
        p + Point::new(t2.sin() - theta.sin(), theta.cos() - t2.cos()) * (1.0 / k)
    }
}

/// Samples the road every `step` units of arc length from `start`, heading
/// `heading`. The heading after gene `j` is `heading_j + curvature_j * length_j`.
/// The final point is the exact end of the last gene; a trailing sample
/// closer than `step / 4` to it is replaced by it.
pub fn decode_from(genome: &RoadGenome, start: Point, heading: f64, step: f64) -> Vec<Point> {
    let mut pts = vec![start];
    let (mut p, mut theta) = (start, heading);
    // arc length still to travel before the next sample, measured from the gene start
    let mut next = step;
    for g in &genome.genes {
        while next <= g.length {
            pts.push(arc_point(p, theta, g.curvature, next));
            next += step;
        }
        next -= g.length;
        p = arc_point(p, theta, g.curvature, g.length);
        theta += g.curvature * g.length;
    }
    let last = *pts.last().expect("non-empty");
    if pts.len() > 1 && last.distance(p) < step / 4.0 {
        *pts.last_mut().expect("non-empty") = p;
    } else if last != p {
        pts.push(p);
    }
    pts
}

/// Decodes a genome starting at the map centre heading along +x.
pub fn decode(genome: &RoadGenome, map_size: f64, step: f64) -> Vec<Point> {
    decode_from(genome, Point::new(map_size / 2.0, map_size / 2.0), 0.0, step)
}
