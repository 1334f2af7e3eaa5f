//! Road test generation: roads are sequences of constant-curvature arcs,
//! searched with NSGA-II for high curvature (a proxy for how likely a
//! controller is to fail) and for diversity.
//!
//! Both objectives are maximized; [`TestCase::minimized`] gives the negated
//! pair the sorter works with. Roads live in map units; tests are exported as
//! JSON and rescaled to meters when simulated.

mod export;
mod genome;
mod nsga2;
mod objectives;
mod validate;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{export_tests, read_test, summary_csv, test_file_name, write_atomic, TestFile};
pub use genome::{arc_point, decode, decode_from, one_point_crossover, Gene, GenomeSpace, RoadGenome};
pub use nsga2::{
    crowding_distance, non_dominated_sort, nsga2, pareto_dominates, CurvatureEvaluator, Evaluation,
    Evaluator, GaConfig, GenerationStats, SearchResult, SimulationEvaluator, StopReason, TestCase,
};
pub use objectives::{diversity, hausdorff, max_curvature, three_point_curvature, Diversity};
pub use validate::{validate, InvalidReason, Validity};

/// Pass/fail label from running a controller on a test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Error)]
pub enum RoadGenError {
    #[error("invalid search configuration: {0}")]
    Config(String),
    #[error("{}: {error}", path.display())]
    Io { path: PathBuf, error: std::io::Error },
    #[error("{}: {error}", path.display())]
    Json { path: PathBuf, error: serde_json::Error },
}
