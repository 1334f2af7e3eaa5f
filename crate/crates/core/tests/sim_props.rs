use enps_lab::model::{ControllerKind, ControllerParams};
use enps_lab::roadgen::{decode, Gene, RoadGenome};
use enps_lab::sim::{
    build_road, simulate, Outcome, Point, Pose, RoadGeometry, RobotParams, SimLimits, DEFAULT_MAP_SCALE,
    DEFAULT_ROAD_WIDTH,
};
use proptest::prelude::*;

fn curved_road(k1: f64, k2: f64) -> RoadGeometry {
    let genome = RoadGenome {
        genes: vec![
            Gene {
                length: 15.0,
                curvature: 0.0,
            },
            Gene {
                length: 25.0,
                curvature: k1,
            },
            Gene {
                length: 25.0,
                curvature: k2,
            },
        ],
    };
    let spine: Vec<Point> = decode(&genome, 200.0, 1.0)
        .into_iter()
        .map(|p| p * DEFAULT_MAP_SCALE)
        .collect();
    build_road(&spine, DEFAULT_ROAD_WIDTH).unwrap()
}

fn kind() -> impl Strategy<Value = ControllerKind> {
    prop_oneof![Just(ControllerKind::M1), Just(ControllerKind::M2)]
}

fn limits(max_steps: usize) -> SimLimits {
    SimLimits {
        max_steps,
        ..SimLimits::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mirrored_road_and_weights_give_mirrored_run(kind in kind(), k1 in -0.08f64..0.08, k2 in -0.08f64..0.08) {
        let p = ControllerParams::default();
        let road = curved_road(k1, k2);
        let robot = RobotParams::default();
        let a = simulate(&kind.build(&p).unwrap(), &road, &robot, &limits(600)).unwrap();
        let b = simulate(&kind.build(&p.mirrored()).unwrap(), &road.mirrored().unwrap(), &robot, &limits(600)).unwrap();
        prop_assert_eq!(a.outcome, b.outcome);
        prop_assert_eq!(a.steps, b.steps);
        for (pa, pb) in a.trajectory.iter().zip(&b.trajectory) {
            let m = pa.mirrored();
            prop_assert!((m.x - pb.x).abs() < 1e-9 && (m.y - pb.y).abs() < 1e-9, "{pa:?} vs {pb:?}");
        }
    }

    #[test]
    fn poses_move_continuously(kind in kind(), k1 in -0.08f64..0.08, k2 in -0.08f64..0.08) {
        let robot = RobotParams::default();
        let r = simulate(&kind.build(&ControllerParams::default()).unwrap(), &curved_road(k1, k2), &robot, &limits(600)).unwrap();
        let reach = robot.max_wheel_speed * robot.wheel_radius * robot.dt;
        for w in r.trajectory.windows(2) {
            prop_assert!(w[0].position().distance(w[1].position()) <= reach + 1e-12);
        }
        prop_assert_eq!(r.trajectory.len(), r.steps + 1);
        prop_assert_eq!(r.wheel_speeds.len(), r.steps);
        prop_assert_eq!(r.failure.is_some(), r.outcome == Outcome::OffRoad);
    }

    #[test]
    fn same_inputs_same_run(kind in kind(), k1 in -0.08f64..0.08, seed: u64) {
        let sys = kind.build(&ControllerParams::default()).unwrap();
        let road = curved_road(k1, -k1);
        let l = SimLimits { seed, ..limits(400) };
        let a = simulate(&sys, &road, &RobotParams::default(), &l).unwrap();
        let b = simulate(&sys, &road, &RobotParams::default(), &l).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn nothing_sensed_means_straight_at_cruise() {
    // a wide road keeps every sensor reading zero
    let road = build_road(&[Point::new(0.0, 0.0), Point::new(2.0, 0.0)], 1.0).unwrap();
    for kind in [ControllerKind::M1, ControllerKind::M2] {
        let p = ControllerParams::default();
        let r = simulate(
            &kind.build(&p).unwrap(),
            &road,
            &RobotParams::default(),
            &limits(100),
        )
        .unwrap();
        assert!(
            r.wheel_speeds
                .iter()
                .all(|&(l, r)| l == p.cruise && r == p.cruise),
            "{}",
            kind.name()
        );
        assert!(r
            .trajectory
            .iter()
            .all(|pose| pose.y == 0.0 && pose.heading == 0.0));
    }
}

#[test]
fn zero_wheel_speed_limit_never_finishes() {
    let robot = RobotParams {
        max_wheel_speed: 0.0,
        ..RobotParams::default()
    };
    let road = build_road(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0)], DEFAULT_ROAD_WIDTH).unwrap();
    let sys = ControllerKind::M2.build(&ControllerParams::default()).unwrap();
    let r = simulate(&sys, &road, &robot, &limits(50)).unwrap();
    assert_eq!((r.outcome, r.steps), (Outcome::StepLimit, 50));
    assert!(r.trajectory.iter().all(|p| *p == road.start));
}

#[test]
fn spawning_off_the_road_fails_immediately() {
    let road = build_road(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0)], DEFAULT_ROAD_WIDTH).unwrap();
    let sys = ControllerKind::M1.build(&ControllerParams::default()).unwrap();
    let l = SimLimits {
        start: Some(Pose::new(0.5, 0.5, 0.0)),
        ..SimLimits::default()
    };
    let r = simulate(&sys, &road, &RobotParams::default(), &l).unwrap();
    assert_eq!((r.outcome, r.steps), (Outcome::OffRoad, 0));
    assert_eq!(r.failure, Some(Point::new(0.5, 0.5)));
}
