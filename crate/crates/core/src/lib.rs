//! Query-efficient solvers for approximate fixed points of contraction and
//! nonexpansive maps on the unit cube, in the black-box oracle model.
//!
//! Every solver is a resumable state machine driven through a [`Session`];
//! [`drive`] runs one against an [`Oracle`] and records every evaluation.

pub mod error;
pub mod geometry;
pub mod harness;
pub mod l1;
pub mod linf;
pub mod oracles;
mod real;
pub mod session;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{inflate, norm_distance, BoxSpec, NormKind, Point, ProblemSpec, SLACK};
pub use l1::{solve_l1_contraction, solve_l1_nonexp, L1Outcome};
pub use linf::{solve_linf_top, DaggerProblem, LinfOutcome, LinfPlan};
pub use oracles::{generate_instance, InstanceFile, MapFamily, MapSpec};
pub use session::{
    drive, FnOracle, Machine, Oracle, Session, SessionStatus, Solution, SolveStats, Step,
    Transcript,
};
pub use verify::{banach_iterate, grid_search_fixed_point, ViolationReport};
