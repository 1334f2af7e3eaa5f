//! Execution of (enzymatic) numerical P systems.
//!
//! A system is a rooted tree of membranes. Each membrane holds real-valued
//! variables and programs `F(x1..xk) -> c1|v1 + ... + cn|vn`, optionally
//! guarded by an enzyme variable `e` (the program may fire only when
//! `e > min(x1..xk)`). Every step of the global clock:
//!
//! 1. every membrane selects its programs against the pre-step valuation:
//!    all applicable enzymatic programs, plus one non-enzymatic program drawn
//!    uniformly at random when the membrane has any;
//! 2. each selected program computes its production and the unitary portion
//!    `q = F / sum(c)`;
//! 3. every variable read by a selected production is reset to zero (once,
//!    however many programs read it);
//! 4. each target `vj` receives `q * cj`.
//!
//! Random draws happen in membrane preorder, one draw per membrane that holds
//! two or more non-enzymatic programs.

mod expr;
mod step;
mod system;

pub use expr::{evaluate, Expression, Valuation, VarRef};
pub use step::{is_applicable, run, select_programs, step, ProgramApplication, StepTrace};
pub use system::{Membrane, PSystem, Program, RepartitionEntry, VarSlot, Variable};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("unresolved variable `{0}`")]
    UnresolvedVariable(String),
    #[error("duplicate membrane label `{0}`")]
    DuplicateLabel(String),
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("non-finite initial value for `{0}`")]
    NonFinite(String),
    #[error("invalid membrane structure: {0}")]
    Structure(String),
    #[error("membrane `{membrane}`, program {program}: {message}")]
    InvalidProgram {
        membrane: String,
        program: usize,
        message: String,
    },
    #[error("step {step}: membrane `{membrane}`, program {program} produced a non-finite value")]
    NonFiniteProduction {
        step: u64,
        membrane: String,
        program: usize,
    },
}
