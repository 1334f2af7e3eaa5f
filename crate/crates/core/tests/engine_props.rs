mod common;

use enps_lab::engine::{run, step};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_agrees_with_naive_interpreter(seed: u64, rng_seed: u64) {
        let sys = common::random_system(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut oracle = common::NaiveInterpreter::new(sys.membranes());
        let mut engine = sys.clone();
        let (mut r1, mut r2) = (ChaCha8Rng::seed_from_u64(rng_seed), ChaCha8Rng::seed_from_u64(rng_seed));
        for _ in 0..20 {
            if step(&mut engine, &mut r1).is_err() {
                break;
            }
            oracle.step(&mut r2);
            for (name, v) in engine.qualified_names().iter().zip(engine.values()) {
                prop_assert!(close(v, oracle.values[name]), "{name}: engine {v}, oracle {}", oracle.values[name]);
            }
        }
    }

    #[test]
    fn every_application_delivers_its_whole_production(seed: u64) {
        let mut sys = common::random_system(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        for _ in 0..10 {
            let Ok(trace) = step(&mut sys, &mut rng) else { break };
            for app in &trace.applications {
                let total: f64 = app.delivered.iter().map(|(_, a)| a).sum();
                prop_assert!(close(total, app.production), "delivered {total}, produced {}", app.production);
                let program = &sys.membranes()[app.membrane].programs[app.program];
                prop_assert!(close(app.unitary * program.coefficient_sum() as f64, app.production));
            }
        }
    }

    #[test]
    fn runs_are_reproducible_from_the_seed(seed: u64) {
        let sys = common::random_system(&mut ChaCha8Rng::seed_from_u64(seed));
        let (mut a, mut b) = (sys.clone(), sys);
        let ta = run(&mut a, 15, &mut ChaCha8Rng::seed_from_u64(seed));
        let tb = run(&mut b, 15, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(ta, tb);
    }

    #[test]
    fn variables_nobody_touches_keep_their_value(seed: u64) {
        // the spare enzyme `e` of every membrane is never read by a production or targeted
        let mut sys = common::random_system(&mut ChaCha8Rng::seed_from_u64(seed));
        let before: Vec<(usize, f64)> = sys
            .qualified_names()
            .iter()
            .enumerate()
            .filter(|(_, n)| n.ends_with(".e"))
            .map(|(i, _)| (i, sys.values()[i]))
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..10 {
            if step(&mut sys, &mut rng).is_err() {
                break;
            }
        }
        let values = sys.values();
        for (i, v) in before {
            prop_assert_eq!(values[i], v);
        }
    }
}
