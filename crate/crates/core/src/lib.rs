//! Lane-keeping controllers written as enzymatic numerical P systems.
//!
//! * [`engine`] executes (enzymatic) numerical P systems.
//! * [`model`] parses and prints the model text format and builds the two
//!   shipped controllers.
//! * [`sim`] drives a differential-drive robot with a controller on a road.
//! * [`roadgen`] searches for difficult, diverse roads with NSGA-II.
//! * [`cli`] wires the pieces into the `enps-lab` command.

pub mod cli;
pub mod engine;
pub mod model;
pub mod roadgen;
pub mod sim;
