//! Drives both controllers along a straight road and along a curved road
//! decoded from a fixed genome, printing the outcome of each run.

use enps_lab::model::{ControllerKind, ControllerParams};
use enps_lab::roadgen::{decode, max_curvature, Gene, RoadGenome};
use enps_lab::sim::{
    build_road, simulate, Point, RobotParams, SimLimits, DEFAULT_MAP_SCALE, DEFAULT_ROAD_WIDTH,
};

fn main() -> anyhow::Result<()> {
    let straight = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
    let curved = decode(
        &RoadGenome {
            genes: vec![
                Gene {
                    length: 20.0,
                    curvature: 0.0,
                },
                Gene {
                    length: 30.0,
                    curvature: 0.08,
                },
                Gene {
                    length: 30.0,
                    curvature: -0.08,
                },
                Gene {
                    length: 20.0,
                    curvature: 0.0,
                },
            ],
        },
        200.0,
        1.0,
    );
    println!(
        "curved road: {} points, max curvature {:.3} per map unit",
        curved.len(),
        max_curvature(&curved)
    );
    let curved: Vec<Point> = curved.into_iter().map(|p| p * DEFAULT_MAP_SCALE).collect();

    let params = ControllerParams::default();
    let robot = RobotParams::default();
    for (name, spine) in [("straight", straight), ("curved", curved)] {
        let road = build_road(&spine, DEFAULT_ROAD_WIDTH)?;
        for kind in [ControllerKind::M1, ControllerKind::M2] {
            let r = simulate(&kind.build(&params)?, &road, &robot, &SimLimits::default())?;
            let at = r
                .failure
                .map(|p| format!(" at ({:.3}, {:.3})", p.x, p.y))
                .unwrap_or_default();
            println!(
                "{name:>8} {}: {} after {} steps{at}, max deviation {:.3} m",
                kind.name(),
                r.outcome,
                r.steps,
                r.max_deviation
            );
        }
    }
    Ok(())
}
