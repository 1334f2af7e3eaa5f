use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::geometry::Point;
use super::road::RoadGeometry;
use super::simulate::{SimResult, VariableTrace};
use super::SimError;

pub const ROAD_COLOR: &str = "grey";
pub const M1_COLOR: &str = "red";
pub const M2_COLOR: &str = "green";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub step: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    /// Wheel speeds commanded during this step; empty on the initial row.
    pub lw: Option<f64>,
    pub rw: Option<f64>,
}

fn csv_error(e: impl std::fmt::Display) -> SimError {
    SimError::Trajectory(e.to_string())
}

/// `step,x,y,heading,lw,rw`, one row per pose.
pub fn trajectory_csv(result: &SimResult) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, pose) in result.trajectory.iter().enumerate() {
        let speeds = i.checked_sub(1).map(|k| result.wheel_speeds[k]);
        w.serialize(TrajectoryRow {
            step: i,
            x: pose.x,
            y: pose.y,
            heading: pose.heading,
            lw: speeds.map(|s| s.0),
            rw: speeds.map(|s| s.1),
        })
        .map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

pub fn read_trajectory_csv(text: &str) -> Result<Vec<TrajectoryRow>, SimError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<TrajectoryRow>, _>>()
        .map_err(csv_error)
}

/// `step` followed by one column per qualified controller variable.
pub fn variables_csv(trace: &VariableTrace) -> Result<String, SimError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["step".to_owned()];
    header.extend(trace.names.iter().cloned());
    w.write_record(&header).map_err(csv_error)?;
    for (i, row) in trace.rows.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(f64::to_string));
        w.write_record(&rec).map_err(csv_error)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

/// A polyline drawn over the road.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotLayer {
    pub label: String,
    pub color: String,
    pub points: Vec<Point>,
}

fn fmt(v: f64) -> String {
    format!("{v:.5}")
}

fn path(points: &[Point]) -> String {
    points
        .iter()
        .map(|p| format!("{},{}", fmt(p.x), fmt(-p.y)))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Road in grey with start and finish markers, then each layer as a polyline.
/// The view box covers the road and every layer.
pub fn render_svg(road: Option<&RoadGeometry>, layers: &[PlotLayer]) -> String {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Point| {
        if p.is_finite() {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    };
    if let Some(r) = road {
        let (a, b) = r.bounds();
        grow(a);
        grow(b);
    }
    for l in layers {
        l.points.iter().copied().for_each(&mut grow);
    }
    if !lo.is_finite() {
        lo = Point::new(0.0, 0.0);
        hi = Point::new(1.0, 1.0);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-6);
    let margin = 0.05 * span;
    let stroke = span / 300.0;
    let (vx, vy) = (lo.x - margin, -hi.y - margin);
    let (vw, vh) = (hi.x - lo.x + 2.0 * margin, hi.y - lo.y + 2.0 * margin);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="800" height="{}">"#,
        fmt(vx),
        fmt(vy),
        fmt(vw),
        fmt(vh),
        (800.0 * vh / vw).round() as i64
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="white"/>"#,
        fmt(vx),
        fmt(vy),
        fmt(vw),
        fmt(vh)
    );
    if let Some(r) = road {
        let outline: Vec<Point> = r.left.iter().chain(r.right.iter().rev()).copied().collect();
        let _ = writeln!(
            svg,
            r#"<polygon class="road" points="{}" fill="{ROAD_COLOR}" stroke="none"/>"#,
            path(&outline)
        );
        let _ = writeln!(
            svg,
            r#"<polyline class="spine" points="{}" fill="none" stroke="white" stroke-width="{}" stroke-dasharray="{} {}"/>"#,
            path(&r.spine),
            fmt(stroke * 0.5),
            fmt(stroke * 4.0),
            fmt(stroke * 4.0)
        );
        let s = r.start.position();
        let f = r.finish();
        let _ = writeln!(
            svg,
            r#"<circle class="start" cx="{}" cy="{}" r="{}" fill="blue"/>"#,
            fmt(s.x),
            fmt(-s.y),
            fmt(stroke * 4.0)
        );
        let _ = writeln!(
            svg,
            r#"<circle class="finish" cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
            fmt(f.x),
            fmt(-f.y),
            fmt(r.finish_radius),
            fmt(stroke)
        );
    }
    for l in layers {
        let _ = writeln!(
            svg,
            r#"<polyline class="trajectory" data-label="{}" points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            l.label,
            path(&l.points),
            l.color,
            fmt(stroke * 1.5)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
