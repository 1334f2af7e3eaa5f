use enps_lab::roadgen::{
    decode, decode_from, max_curvature, nsga2, one_point_crossover, pareto_dominates, validate,
    CurvatureEvaluator, GaConfig, Gene, GenomeSpace, RoadGenome,
};
use enps_lab::sim::Point;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn genome() -> impl Strategy<Value = RoadGenome> {
    prop::collection::vec((1.0f64..40.0, -0.2f64..0.2), 1..8).prop_map(|g| RoadGenome {
        genes: g
            .into_iter()
            .map(|(length, curvature)| Gene { length, curvature })
            .collect(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn decoding_is_scale_equivariant(g in genome(), s in 0.1f64..10.0, x in -50.0f64..50.0, y in -50.0f64..50.0, h in -3.0f64..3.0) {
        let start = Point::new(x, y);
        let scaled = RoadGenome {
            genes: g.genes.iter().map(|gene| Gene { length: gene.length * s, curvature: gene.curvature / s }).collect(),
        };
        let a = decode_from(&g, start, h, 1.0);
        let b = decode_from(&scaled, start * s, h, s);
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            let expect = start * s + (*p - start) * s;
            prop_assert!(expect.distance(*q) <= 1e-9 * s * (1.0 + (*p - start).norm()), "{expect:?} vs {q:?}");
        }
    }

    #[test]
    fn samples_are_one_step_apart_along_the_arc(g in genome(), step in 0.25f64..3.0) {
        let pts = decode_from(&g, Point::new(0.0, 0.0), 0.0, step);
        let total: f64 = g.genes.iter().map(|x| x.length).sum();
        prop_assert!((pts.len() as f64 - 1.0 - total / step).abs() <= 1.0);
        // the final sample snaps to the exact endpoint when it falls within a quarter step
        let n = pts.len();
        for (i, w) in pts.windows(2).enumerate() {
            let limit = if i + 2 == n { 1.25 * step } else { step };
            prop_assert!(w[0].distance(w[1]) <= limit * (1.0 + 1e-9));
        }
    }

    #[test]
    fn straight_genomes_decode_to_a_line(lengths in prop::collection::vec(1.0f64..30.0, 1..6), h in -3.0f64..3.0) {
        let g = RoadGenome { genes: lengths.iter().map(|&length| Gene { length, curvature: 0.0 }).collect() };
        let pts = decode_from(&g, Point::new(5.0, -2.0), h, 1.0);
        let dir = Point::from_angle(h);
        for p in &pts {
            prop_assert!((*p - pts[0]).cross(dir).abs() < 1e-9);
        }
        let end = *pts.last().unwrap();
        prop_assert!((end.distance(pts[0]) - lengths.iter().sum::<f64>()).abs() < 1e-9);
        prop_assert!(max_curvature(&pts) < 1e-9);
    }

    #[test]
    fn valid_roads_stay_on_the_map(seed: u64) {
        let space = GenomeSpace::default();
        let g = space.random(&mut ChaCha8Rng::seed_from_u64(seed));
        let spine = decode(&g, 200.0, 1.0);
        let v = validate(&spine, 200.0, 20.0);
        if v.is_valid() {
            prop_assert!(spine.iter().all(|p| (0.0..=200.0).contains(&p.x) && (0.0..=200.0).contains(&p.y)));
            prop_assert_eq!(v.violation, 0.0);
        } else {
            prop_assert!(v.violation > 0.0);
        }
    }

    #[test]
    fn crossover_keeps_genes_and_length(seed: u64) {
        let space = GenomeSpace::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b) = (space.random(&mut rng), space.random(&mut rng));
        let (c, d) = one_point_crossover(&a, &b, &mut rng);
        prop_assert_eq!(c.genes.len(), a.genes.len());
        for i in 0..a.genes.len() {
            let pair = (c.genes[i], d.genes[i]);
            prop_assert!(pair == (a.genes[i], b.genes[i]) || pair == (b.genes[i], a.genes[i]));
        }
    }

    #[test]
    fn genome_distance_is_a_metric(sa: u64, sb: u64, sc: u64) {
        let space = GenomeSpace::default();
        let [a, b, c] = [sa, sb, sc].map(|s| space.random(&mut ChaCha8Rng::seed_from_u64(s)));
        prop_assert_eq!(space.distance(&a, &b), space.distance(&b, &a));
        prop_assert!(space.distance(&a, &c) <= space.distance(&a, &b) + space.distance(&b, &c) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn search_front_is_valid_and_non_dominated(seed: u64) {
        let config = GaConfig { population: 20, generations: 8, seed, ..GaConfig::default() };
        let result = nsga2(&config, &CurvatureEvaluator).unwrap();
        prop_assert_eq!(result.population.len(), 20);
        prop_assert_eq!(result.history.len(), 9);
        for t in &result.front {
            prop_assert!(t.valid);
            prop_assert!(config.genome.contains(&t.genome));
            for u in &result.front {
                prop_assert!(!pareto_dominates(&t.minimized(), &u.minimized()));
            }
        }
    }
}
