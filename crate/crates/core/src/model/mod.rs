//! Model text format and the two lane-keeping controller builders.
//!
//! The grammar is documented in `docs/model-format.md`.

mod controllers;
mod params;
mod syntax;

pub use controllers::{
    build_m1, build_m2, left_output, m1_speeds, m2_speeds, product_label, right_output, sensor_label,
    weight_label, ControllerKind, LEFT_OUTPUT, RIGHT_OUTPUT, SENSOR_VAR,
};
pub use params::{ControllerParams, DEFAULT_PARAMS};
pub use syntax::{parse_model, serialize_model, ParseError};

use thiserror::Error;

use crate::engine::EngineError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("params line {line}: {message}")]
    Params { line: usize, message: String },
    #[error("invalid controller parameters: {0}")]
    InvalidParams(String),
}
