use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::PSystem;
use crate::sim::{
    build_road, simulate, Point, RobotParams, SimLimits, DEFAULT_MAP_SCALE, DEFAULT_ROAD_WIDTH,
};

use super::genome::{decode, one_point_crossover, GenomeSpace, RoadGenome};
use super::objectives::{diversity, max_curvature, Diversity};
use super::validate::{validate, InvalidReason, Validity};
use super::{RoadGenError, Verdict};

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub mutation_rate: f64,
    pub crossover_rate: f64,
    /// Side of the square map, in map units.
    pub map_size: f64,
    /// Fraction of the body that must leave the lane for a failed verdict.
    pub oob_threshold: f64,
    pub time_budget: Duration,
    pub seed: u64,
    pub genome: GenomeSpace,
    /// Arc length between decoded spine samples.
    pub sample_step: f64,
    /// Minimum clearance between distant stretches of spine, in map units.
    pub min_spacing: f64,
    pub diversity: Diversity,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 100,
            generations: 75,
            mutation_rate: 0.4,
            crossover_rate: 1.0,
            map_size: 200.0,
            oob_threshold: 0.95,
            time_budget: Duration::from_secs(1800),
            seed: 0,
            genome: GenomeSpace::default(),
            sample_step: 1.0,
            min_spacing: DEFAULT_ROAD_WIDTH / DEFAULT_MAP_SCALE,
            diversity: Diversity::Genome,
        }
    }
}

impl GaConfig {
    pub fn check(&self) -> Result<(), RoadGenError> {
        let bad = |m: String| Err(RoadGenError::Config(m));
        if self.population < 2 {
            return bad(format!("population must be at least 2, got {}", self.population));
        }
        if !self.population.is_multiple_of(2) {
            return bad(format!("population must be even, got {}", self.population));
        }
        for (name, r) in [
            ("mutation rate", self.mutation_rate),
            ("crossover rate", self.crossover_rate),
            ("out-of-bound threshold", self.oob_threshold),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} must be in [0, 1], got {r}"));
            }
        }
        if !(self.map_size > 0.0 && self.map_size.is_finite()) {
            return bad(format!("map size must be positive, got {}", self.map_size));
        }
        if !(self.sample_step > 0.0 && self.sample_step.is_finite()) {
            return bad(format!("sample step must be positive, got {}", self.sample_step));
        }
        if !(self.min_spacing >= 0.0 && self.min_spacing.is_finite()) {
            return bad(format!(
                "minimum spacing must be non-negative, got {}",
                self.min_spacing
            ));
        }
        let g = &self.genome;
        if g.genes == 0 || !(g.min_length > 0.0) || g.max_length < g.min_length || !(g.max_curvature >= 0.0) {
            return bad(format!("invalid genome space {g:?}"));
        }
        Ok(())
    }
}

/// Fault-revealing score of one decoded road.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub fault: f64,
    pub verdict: Option<Verdict>,
}

/// Supplies the fault-revealing objective. Called concurrently for the
/// members of a generation, each with its own derived seed.
pub trait Evaluator: Sync {
    fn evaluate(&self, spine: &[Point], seed: u64) -> Evaluation;
}

/// Maximum discrete curvature of the spine; no simulation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CurvatureEvaluator;

impl Evaluator for CurvatureEvaluator {
    fn evaluate(&self, spine: &[Point], _seed: u64) -> Evaluation {
        Evaluation {
            fault: max_curvature(spine),
            verdict: None,
        }
    }
}

/// Runs a controller on the road; the fault score is the worst distance from
/// the spine as a fraction of half the lane width.
#[derive(Debug, Clone)]
pub struct SimulationEvaluator {
    pub controller: PSystem,
    pub robot: RobotParams,
    pub limits: SimLimits,
    pub width_m: f64,
    /// Meters per map unit.
    pub scale: f64,
    pub oob_threshold: f64,
}

impl Evaluator for SimulationEvaluator {
    fn evaluate(&self, spine: &[Point], seed: u64) -> Evaluation {
        let scaled: Vec<Point> = spine.iter().map(|&p| p * self.scale).collect();
        let Ok(road) = build_road(&scaled, self.width_m) else {
            return Evaluation {
                fault: 0.0,
                verdict: None,
            };
        };
        let limits = SimLimits {
            seed,
            ..self.limits.clone()
        };
        match simulate(&self.controller, &road, &self.robot, &limits) {
            Ok(r) => {
                let failed = r.failed(&road, self.robot.body_radius, self.oob_threshold);
                Evaluation {
                    fault: r.max_deviation / (road.width / 2.0),
                    verdict: Some(if failed { Verdict::Fail } else { Verdict::Pass }),
                }
            }
            Err(_) => Evaluation {
                fault: 0.0,
                verdict: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub genome: RoadGenome,
    pub spine: Vec<Point>,
    /// Fault-revealing objective, maximized.
    pub f1: f64,
    /// Diversity objective, maximized.
    pub f2: f64,
    pub valid: bool,
    pub reason: Option<InvalidReason>,
    /// Total constraint violation, 0 for valid tests.
    pub violation: f64,
    pub verdict: Option<Verdict>,
}

impl TestCase {
    /// Objectives in minimization form.
    pub fn minimized(&self) -> [f64; 2] {
        [-self.f1, -self.f2]
    }

    /// Constrained domination: valid beats invalid, smaller violation beats
    /// larger, and valid tests compare by Pareto dominance on `(f1, f2)`.
    pub fn dominates(&self, other: &TestCase) -> bool {
        match (self.valid, other.valid) {
            (true, false) => true,
            (false, true) => false,
            (false, false) => self.violation < other.violation,
            (true, true) => pareto_dominates(&self.minimized(), &other.minimized()),
        }
    }
}

/// `a` is no worse than `b` in every objective and better in one (minimizing).
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Fast non-dominated sorting; returns fronts of indices, best first.
pub fn non_dominated_sort<T>(items: &[T], dominates: impl Fn(&T, &T) -> bool) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            if dominates(&items[i], &items[j]) {
                dominated_by[i].push(j);
                count[j] += 1;
            } else if dominates(&items[j], &items[i]) {
                dominated_by[j].push(i);
                count[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance of each member of one front (same order as `objectives`).
/// Boundary members get infinity.
pub fn crowding_distance(objectives: &[[f64; 2]]) -> Vec<f64> {
    let n = objectives.len();
    let mut dist = vec![0.0; n];
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    for m in 0..2 {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| objectives[a][m].total_cmp(&objectives[b][m]).then(a.cmp(&b)));
        let (lo, hi) = (objectives[order[0]][m], objectives[order[n - 1]][m]);
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        if hi > lo {
            for k in 1..n - 1 {
                dist[order[k]] += (objectives[order[k + 1]][m] - objectives[order[k - 1]][m]) / (hi - lo);
            }
        }
    }
    dist
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Generations,
    TimeBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    /// 0 for the initial population.
    pub generation: usize,
    pub population: usize,
    pub valid: usize,
    pub first_front: usize,
    pub best_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// Valid members of the final non-dominated front, by descending f1, with
    /// repeated genomes kept once.
    pub front: Vec<TestCase>,
    /// Final population, f2 measured against itself.
    pub population: Vec<TestCase>,
    pub history: Vec<GenerationStats>,
    pub stop: StopReason,
}

fn derive_seed(seed: u64, generation: usize, index: usize) -> u64 {
    // splitmix64 finalizer over the mixed inputs
    let mut z = seed
        ^ (generation as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (index as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn evaluate_all<E: Evaluator + ?Sized>(
    genomes: Vec<RoadGenome>,
    config: &GaConfig,
    evaluator: &E,
    generation: usize,
) -> Vec<TestCase> {
    genomes
        .into_par_iter()
        .enumerate()
        .map(|(i, genome)| {
            let spine = decode(&genome, config.map_size, config.sample_step);
            let v: Validity = validate(&spine, config.map_size, config.min_spacing);
            let eval = if v.is_valid() {
                evaluator.evaluate(&spine, derive_seed(config.seed, generation, i))
            } else {
                Evaluation {
                    fault: 0.0,
                    verdict: None,
                }
            };
            TestCase {
                genome,
                spine,
                f1: eval.fault,
                f2: 0.0,
                valid: v.is_valid(),
                reason: v.reason(),
                violation: v.violation,
                verdict: eval.verdict,
            }
        })
        .collect()
}

/// Recomputes f2 for every member against the whole pool.
fn assign_diversity(pool: &mut [TestCase], config: &GaConfig) {
    let f2: Vec<f64> = {
        let archive: Vec<(&RoadGenome, &[Point])> =
            pool.iter().map(|t| (&t.genome, t.spine.as_slice())).collect();
        (0..pool.len())
            .into_par_iter()
            .map(|i| diversity(i, &archive, &config.genome, config.diversity))
            .collect()
    };
    for (t, d) in pool.iter_mut().zip(f2) {
        t.f2 = d;
    }
}

/// Rank and crowding distance of every member.
fn rank(pool: &[TestCase]) -> (Vec<Vec<usize>>, Vec<usize>, Vec<f64>) {
    let fronts = non_dominated_sort(pool, TestCase::dominates);
    let mut ranks = vec![0; pool.len()];
    let mut crowd = vec![0.0; pool.len()];
    for (r, front) in fronts.iter().enumerate() {
        let objs: Vec<[f64; 2]> = front.iter().map(|&i| pool[i].minimized()).collect();
        for (&i, d) in front.iter().zip(crowding_distance(&objs)) {
            ranks[i] = r;
            crowd[i] = d;
        }
    }
    (fronts, ranks, crowd)
}

fn crowded_better(a: usize, b: usize, ranks: &[usize], crowd: &[f64]) -> Ordering {
    ranks[a]
        .cmp(&ranks[b])
        .then(crowd[b].total_cmp(&crowd[a]))
        .then(a.cmp(&b))
}

fn tournament<R: Rng>(rng: &mut R, n: usize, ranks: &[usize], crowd: &[f64]) -> usize {
    let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
    if crowded_better(b, a, ranks, crowd) == Ordering::Less {
        b
    } else {
        a
    }
}

fn stats(generation: usize, pop: &[TestCase], first_front: usize) -> GenerationStats {
    GenerationStats {
        generation,
        population: pop.len(),
        valid: pop.iter().filter(|t| t.valid).count(),
        first_front,
        best_f1: pop.iter().filter(|t| t.valid).map(|t| t.f1).fold(0.0, f64::max),
    }
}

/// Elitist NSGA-II over road genomes. The search stops after
/// `config.generations` generations or once `config.time_budget` has elapsed,
/// whichever comes first.
pub fn nsga2<E: Evaluator + ?Sized>(config: &GaConfig, evaluator: &E) -> Result<SearchResult, RoadGenError> {
    config.check()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.population;

    let initial: Vec<RoadGenome> = (0..n).map(|_| config.genome.random(&mut rng)).collect();
    let mut pop = evaluate_all(initial, config, evaluator, 0);
    assign_diversity(&mut pop, config);
    let (fronts, mut ranks, mut crowd) = rank(&pop);
    let mut history = vec![stats(0, &pop, fronts[0].len())];
    let mut stop = StopReason::Generations;

    for generation in 1..=config.generations {
        if started.elapsed() >= config.time_budget {
            stop = StopReason::TimeBudget;
            break;
        }
        let mut children = Vec::with_capacity(n);
        while children.len() < n {
            let a = &pop[tournament(&mut rng, n, &ranks, &crowd)].genome;
            let b = &pop[tournament(&mut rng, n, &ranks, &crowd)].genome;
            let (mut c1, mut c2) = if rng.random::<f64>() < config.crossover_rate {
                one_point_crossover(a, b, &mut rng)
            } else {
                (a.clone(), b.clone())
            };
            config.genome.mutate(&mut c1, config.mutation_rate, &mut rng);
            config.genome.mutate(&mut c2, config.mutation_rate, &mut rng);
            children.push(c1);
            children.push(c2);
        }
        let offspring = evaluate_all(children, config, evaluator, generation);

        let mut pool = pop;
        pool.extend(offspring);
        assign_diversity(&mut pool, config);
        let (fronts, pool_ranks, pool_crowd) = rank(&pool);
        let mut chosen: Vec<usize> = Vec::with_capacity(n);
        for front in &fronts {
            if chosen.len() + front.len() <= n {
                chosen.extend(front);
            } else {
                let mut rest = front.clone();
                rest.sort_by(|&a, &b| crowded_better(a, b, &pool_ranks, &pool_crowd));
                chosen.extend(&rest[..n - chosen.len()]);
            }
            if chosen.len() == n {
                break;
            }
        }
        ranks = chosen.iter().map(|&i| pool_ranks[i]).collect();
        crowd = chosen.iter().map(|&i| pool_crowd[i]).collect();
        let mut slots: Vec<Option<TestCase>> = pool.into_iter().map(Some).collect();
        pop = chosen
            .iter()
            .map(|&i| slots[i].take().expect("chosen once"))
            .collect();
        history.push(stats(generation, &pop, fronts[0].len()));
    }

    assign_diversity(&mut pop, config);
    let fronts = non_dominated_sort(&pop, TestCase::dominates);
    let mut front: Vec<TestCase> = fronts[0]
        .iter()
        .map(|&i| pop[i].clone())
        .filter(|t| t.valid)
        .collect();
    front.sort_by(|a, b| b.f1.total_cmp(&a.f1).then(b.f2.total_cmp(&a.f2)));
    let mut unique: Vec<TestCase> = Vec::with_capacity(front.len());
    for t in front {
        if !unique.iter().any(|u| u.genome == t.genome) {
            unique.push(t);
        }
    }
    Ok(SearchResult {
        front: unique,
        population: pop,
        history,
        stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(f1: f64, f2: f64, valid: bool, violation: f64) -> TestCase {
        TestCase {
            genome: RoadGenome { genes: vec![] },
            spine: vec![],
            f1,
            f2,
            valid,
            reason: None,
            violation,
            verdict: None,
        }
    }

    #[test]
    fn dominating_individual_ranks_first() {
        let pop = [case(0.02, 0.5, true, 0.0), case(0.05, 0.9, true, 0.0)];
        let fronts = non_dominated_sort(&pop, TestCase::dominates);
        assert_eq!(fronts, vec![vec![1], vec![0]]);
    }

    #[test]
    fn constraint_domination() {
        let valid = case(0.0, 0.0, true, 0.0);
        let slightly = case(1.0, 1.0, false, 0.5);
        let badly = case(1.0, 1.0, false, 3.0);
        assert!(valid.dominates(&slightly));
        assert!(slightly.dominates(&badly));
        assert!(!badly.dominates(&valid));
    }

    #[test]
    fn fronts_partition_population() {
        let pop: Vec<TestCase> = (0..12)
            .map(|i| case((i % 4) as f64, (i / 4) as f64, true, 0.0))
            .collect();
        let fronts = non_dominated_sort(&pop, TestCase::dominates);
        let mut all: Vec<usize> = fronts.concat();
        all.sort();
        assert_eq!(all, (0..12).collect::<Vec<_>>());
        assert_eq!(fronts[0], vec![11]);
    }

    #[test]
    fn crowding_boundaries_are_infinite() {
        let d = crowding_distance(&[[0.0, 3.0], [1.0, 2.0], [3.0, 0.0]]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert!((d[1] - (3.0 / 3.0 + 3.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn config_checks() {
        let mut c = GaConfig::default();
        assert!(c.check().is_ok());
        c.population = 1;
        assert!(c.check().is_err());
        c.population = 3;
        assert!(c.check().is_err());
        c.population = 4;
        c.mutation_rate = 1.5;
        assert!(c.check().is_err());
    }

    #[test]
    fn small_search_is_deterministic() {
        let config = GaConfig {
            population: 12,
            generations: 4,
            seed: 5,
            ..GaConfig::default()
        };
        let a = nsga2(&config, &CurvatureEvaluator).unwrap();
        let b = nsga2(&config, &CurvatureEvaluator).unwrap();
        assert_eq!(a, b);
        assert!(a.history.iter().all(|h| h.population == 12));
        assert_eq!(a.history.len(), 5);
    }

    #[test]
    fn zero_generations_returns_initial_front() {
        let config = GaConfig {
            population: 10,
            generations: 0,
            seed: 1,
            ..GaConfig::default()
        };
        let r = nsga2(&config, &CurvatureEvaluator).unwrap();
        assert_eq!(r.history.len(), 1);
        assert!(r.front.iter().all(|t| t.valid));
    }
}
