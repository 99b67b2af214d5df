//! Independent checkers: value iteration, exhaustive grid search, sampled
//! Lipschitz falsification and transcript auditing.

mod banach;
mod grid;
mod pairs;
mod report;

pub use banach::{banach_cap, banach_iterate};
pub use grid::{
    grid_resolution, grid_search_fixed_point, GridResult, GRID_MAX_DIM, GRID_MAX_POINTS,
    GRID_MIN_EPS,
};
pub use pairs::{check_nonexpansive_pairs, check_transcript_consistency};
pub use report::{ViolationKind, ViolationReport, Witness};
