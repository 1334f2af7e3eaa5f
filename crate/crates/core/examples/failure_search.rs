//! Searches for roads that make M1 leave the lane by scoring each candidate
//! with a closed-loop simulation instead of curvature alone.

use enps_lab::model::{ControllerKind, ControllerParams};
use enps_lab::roadgen::{nsga2, GaConfig, SimulationEvaluator, Verdict};
use enps_lab::sim::{RobotParams, SimLimits, DEFAULT_MAP_SCALE, DEFAULT_ROAD_WIDTH};

fn main() -> anyhow::Result<()> {
    let config = GaConfig {
        population: 30,
        generations: 10,
        seed: 5,
        ..GaConfig::default()
    };
    let evaluator = SimulationEvaluator {
        controller: ControllerKind::M1.build(&ControllerParams::default())?,
        robot: RobotParams::default(),
        limits: SimLimits::default(),
        width_m: DEFAULT_ROAD_WIDTH,
        scale: DEFAULT_MAP_SCALE,
        oob_threshold: config.oob_threshold,
    };
    let result = nsga2(&config, &evaluator)?;
    let failing = result
        .front
        .iter()
        .filter(|t| t.verdict == Some(Verdict::Fail))
        .count();
    println!(
        "{} roads on the front, {failing} of them fail M1",
        result.front.len()
    );
    for t in &result.front {
        println!(
            "  fault {:.4}  f2 {:.4}  verdict {}",
            t.f1,
            t.f2,
            t.verdict.map_or("-", |v| v.as_str())
        );
    }
    Ok(())
}
