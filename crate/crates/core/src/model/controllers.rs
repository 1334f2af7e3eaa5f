use crate::engine::{Expression, Membrane, PSystem, Program, RepartitionEntry, VarRef};

use super::{ControllerParams, ModelError};

/// Labels of the sensor, product and weight membranes of sensor `i` (1-based).
pub fn sensor_label(i: usize) -> String {
    format!("s_{i}")
}

pub fn product_label(i: usize) -> String {
    format!("c_{i}")
}

pub fn weight_label(i: usize) -> String {
    format!("w_{i}")
}

/// Variable of sensor membrane `s_i` that receives the reading.
pub const SENSOR_VAR: &str = "x";
/// Wheel speed outputs in the skin membrane `s`.
pub const LEFT_OUTPUT: &str = "x_sl";
pub const RIGHT_OUTPUT: &str = "x_sr";

pub fn left_output() -> VarRef {
    VarRef::new("s", LEFT_OUTPUT)
}

pub fn right_output() -> VarRef {
    VarRef::new("s", RIGHT_OUTPUT)
}

fn v(m: &str, n: &str) -> VarRef {
    VarRef::new(m, n)
}

fn to(c: u32, m: &str, n: &str) -> RepartitionEntry {
    RepartitionEntry::new(c, v(m, n))
}

fn check_enzyme(label: &str, enzyme: f64, worst_min: f64) -> Result<(), ModelError> {
    if enzyme > worst_min {
        Ok(())
    } else {
        Err(ModelError::InvalidParams(format!(
            "enzyme of `{label}` is {enzyme}, but must exceed {worst_min} for its programs to fire"
        )))
    }
}

/// Membranes `c_i`, `s_i`, `w_i` for every sensor; `c_i` products go to `sum_into`.
fn sensor_branches(
    p: &ControllerParams,
    parent: &str,
    sum_into: (&str, &str, &str),
) -> Result<Vec<Membrane>, ModelError> {
    let (sum_membrane, sum_left, sum_right) = sum_into;
    let mut out = Vec::with_capacity(3 * p.k);
    for i in 1..=p.k {
        let (c, s, w) = (product_label(i), sensor_label(i), weight_label(i));
        let (wl, wr) = (p.weight_left[i - 1], p.weight_right[i - 1]);

        let ec = p.enzyme_for(&c);
        // min(reading, weight) can reach at most min(bound, weight).
        check_enzyme(&c, ec, p.sensor_bound.min(wl).max(p.sensor_bound.min(wr)))?;
        out.push(
            Membrane::new(&c, Some(parent))
                .var("x_sl", 0.0)
                .var("x_sr", 0.0)
                .var("x_wl", 0.0)
                .var("x_wr", 0.0)
                .var("e", ec)
                .program(
                    Program::new(
                        Expression::Product(vec![Expression::var(&c, "x_sl"), Expression::var(&c, "x_wl")]),
                        vec![to(1, sum_membrane, sum_left)],
                    )
                    .with_enzyme(v(&c, "e")),
                )
                .program(
                    Program::new(
                        Expression::Product(vec![Expression::var(&c, "x_sr"), Expression::var(&c, "x_wr")]),
                        vec![to(1, sum_membrane, sum_right)],
                    )
                    .with_enzyme(v(&c, "e")),
                ),
        );

        out.push(
            Membrane::new(&s, Some(&c))
                .var(SENSOR_VAR, 0.0)
                .program(Program::new(
                    Expression::scale(3.0, Expression::var(&s, SENSOR_VAR)),
                    vec![to(1, &s, SENSOR_VAR), to(1, &c, "x_sl"), to(1, &c, "x_sr")],
                )),
        );

        let ew = p.enzyme_for(&w);
        check_enzyme(&w, ew, wl.max(wr))?;
        out.push(
            Membrane::new(&w, Some(&c))
                .var("x_wl", wl)
                .var("x_wr", wr)
                .var("e", ew)
                .program(
                    Program::new(
                        Expression::scale(2.0, Expression::var(&w, "x_wl")),
                        vec![to(1, &w, "x_wl"), to(1, &c, "x_wl")],
                    )
                    .with_enzyme(v(&w, "e")),
                )
                .program(
                    Program::new(
                        Expression::scale(2.0, Expression::var(&w, "x_wr")),
                        vec![to(1, &w, "x_wr"), to(1, &c, "x_wr")],
                    )
                    .with_enzyme(v(&w, "e")),
                ),
        );
    }
    Ok(out)
}

fn speed_reset() -> Program {
    // Consumes both speeds each step; they are rebuilt from the other programs' shares.
    Program::new(
        Expression::scale(
            0.0,
            Expression::Product(vec![
                Expression::var("s", LEFT_OUTPUT),
                Expression::var("s", RIGHT_OUTPUT),
            ]),
        ),
        vec![to(1, "s", LEFT_OUTPUT), to(1, "s", RIGHT_OUTPUT)],
    )
}

/// Additive controller: `speed = cruise + sum(weight_i * prox_i)` per wheel.
///
/// Structure `[ [ []s_i []w_i ]c_i ... []s_c ]s`, one `c_i` branch per sensor.
/// A reading written into `s_i.x` reaches the speeds two steps later.
pub fn build_m1(p: &ControllerParams) -> Result<PSystem, ModelError> {
    p.validate_shape()?;
    let mut membranes = vec![Membrane::new("s", None)
        .var(LEFT_OUTPUT, 0.0)
        .var(RIGHT_OUTPUT, 0.0)
        .program(speed_reset())];
    membranes.extend(sensor_branches(p, "s", ("s", LEFT_OUTPUT, RIGHT_OUTPUT))?);
    membranes.push(
        Membrane::new("s_c", Some("s"))
            .var("x_sc", p.cruise)
            .program(Program::new(
                Expression::scale(3.0, Expression::var("s_c", "x_sc")),
                vec![
                    to(1, "s_c", "x_sc"),
                    to(1, "s", LEFT_OUTPUT),
                    to(1, "s", RIGHT_OUTPUT),
                ],
            )),
    );
    Ok(PSystem::new(membranes)?)
}

/// Multiplicative controller: with `W = sum(weight_i * prox_i)` per wheel,
/// `speed = cruise * W + f(W) * cruise`, where `f(W)` is 1 exactly when `W = 0`.
///
/// Structure `[[ [ []s_i []w_i ]c_i ... []s_c ]w ]s`. The `c_i` products
/// accumulate in `w.x_wl`/`w.x_wr`, which `w` turns into speeds; a reading
/// reaches the speeds three steps after it is written.
pub fn build_m2(p: &ControllerParams) -> Result<PSystem, ModelError> {
    p.validate_shape()?;
    let ew = p.enzyme_for("w");
    check_enzyme("w", ew, p.cruise)?;
    let speed = |acc: &str| {
        Expression::Sum(vec![
            Expression::Product(vec![Expression::var("s_c", "x_sc"), Expression::var("w", acc)]),
            Expression::Product(vec![
                Expression::indicator(Expression::var("w", acc)),
                Expression::var("s_c", "x_sc"),
            ]),
        ])
    };
    let mut membranes = vec![
        Membrane::new("s", None)
            .var(LEFT_OUTPUT, 0.0)
            .var(RIGHT_OUTPUT, 0.0)
            .program(speed_reset()),
        Membrane::new("w", Some("s"))
            .var("x_wl", 0.0)
            .var("x_wr", 0.0)
            .var("e", ew)
            .program(Program::new(speed("x_wl"), vec![to(1, "s", LEFT_OUTPUT)]).with_enzyme(v("w", "e")))
            .program(Program::new(speed("x_wr"), vec![to(1, "s", RIGHT_OUTPUT)]).with_enzyme(v("w", "e"))),
    ];
    membranes.extend(sensor_branches(p, "w", ("w", "x_wl", "x_wr"))?);
    membranes.push(
        Membrane::new("s_c", Some("w"))
            .var("x_sc", p.cruise)
            .program(Program::new(
                Expression::var("s_c", "x_sc"),
                vec![to(1, "s_c", "x_sc")],
            )),
    );
    Ok(PSystem::new(membranes)?)
}

/// Closed-form steady-state wheel speeds of [`build_m1`].
pub fn m1_speeds(p: &ControllerParams, readings: &[f64]) -> (f64, f64) {
    let dot = |w: &[f64]| w.iter().zip(readings).map(|(w, r)| w * r).sum::<f64>();
    (p.cruise + dot(&p.weight_left), p.cruise + dot(&p.weight_right))
}

/// Closed-form steady-state wheel speeds of [`build_m2`].
pub fn m2_speeds(p: &ControllerParams, readings: &[f64]) -> (f64, f64) {
    let dot = |w: &[f64]| w.iter().zip(readings).map(|(w, r)| w * r).sum::<f64>();
    let speed = |w: f64| p.cruise * w + if w == 0.0 { p.cruise } else { 0.0 };
    (speed(dot(&p.weight_left)), speed(dot(&p.weight_right)))
}

/// Which of the two shipped controller structures to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ControllerKind {
    M1,
    M2,
}

impl ControllerKind {
    pub fn build(self, p: &ControllerParams) -> Result<PSystem, ModelError> {
        match self {
            ControllerKind::M1 => build_m1(p),
            ControllerKind::M2 => build_m2(p),
        }
    }

    pub fn speeds(self, p: &ControllerParams, readings: &[f64]) -> (f64, f64) {
        match self {
            ControllerKind::M1 => m1_speeds(p, readings),
            ControllerKind::M2 => m2_speeds(p, readings),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ControllerKind::M1 => "m1",
            ControllerKind::M2 => "m2",
        }
    }
}

impl std::str::FromStr for ControllerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "m1" => Ok(ControllerKind::M1),
            "m2" => Ok(ControllerKind::M2),
            other => Err(format!("unknown controller `{other}` (expected m1 or m2)")),
        }
    }
}
