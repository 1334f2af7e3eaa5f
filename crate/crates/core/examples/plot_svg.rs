//! Runs M1 and M2 on a sharp S-bend and writes an SVG with the road in grey,
//! M1 in red and M2 in green, plus M2's trajectory as CSV.
//!
//! Usage: `cargo run --example plot_svg [out_dir]` (defaults to the system temp directory)

use std::path::PathBuf;

use enps_lab::model::{ControllerKind, ControllerParams};
use enps_lab::roadgen::{decode, Gene, RoadGenome};
use enps_lab::sim::{
    build_road, render_svg, simulate, trajectory_csv, PlotLayer, Point, RobotParams, SimLimits,
    DEFAULT_MAP_SCALE, DEFAULT_ROAD_WIDTH, M1_COLOR, M2_COLOR,
};

fn main() -> anyhow::Result<()> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    std::fs::create_dir_all(&out)?;

    let genome = RoadGenome {
        genes: vec![
            Gene {
                length: 15.0,
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
                length: 15.0,
                curvature: 0.0,
            },
        ],
    };
    let spine: Vec<Point> = decode(&genome, 200.0, 1.0)
        .into_iter()
        .map(|p| p * DEFAULT_MAP_SCALE)
        .collect();
    let road = build_road(&spine, DEFAULT_ROAD_WIDTH)?;

    let params = ControllerParams::default();
    let mut layers = Vec::new();
    for (kind, color) in [(ControllerKind::M1, M1_COLOR), (ControllerKind::M2, M2_COLOR)] {
        let r = simulate(
            &kind.build(&params)?,
            &road,
            &RobotParams::default(),
            &SimLimits::default(),
        )?;
        println!("{}: {} after {} steps", kind.name(), r.outcome, r.steps);
        if kind == ControllerKind::M2 {
            std::fs::write(out.join("s_bend_m2_trajectory.csv"), trajectory_csv(&r)?)?;
        }
        layers.push(PlotLayer {
            label: kind.name().to_owned(),
            color: color.to_owned(),
            points: r.trajectory.iter().map(|p| p.position()).collect(),
        });
    }
    let svg = out.join("s_bend.svg");
    std::fs::write(&svg, render_svg(Some(&road), &layers))?;
    println!("wrote {}", svg.display());
    Ok(())
}
