//! Simplex states, operator application, trajectories and their limits.

mod apply;
mod iterate;
mod limit;
mod simplex;

pub use apply::{apply, apply_volterra, apply_volterra_affine, is_fixed, Evolution, State};
pub use iterate::{
    iterate, IterateConfig, Record, Termination, Trajectory, DEFAULT_TOL, DEFAULT_WINDOW,
    ESCAPE_LOG_GROWTH, MAX_RECORDS,
};
pub use limit::{classify_limit, Classification, DecayStatus, LimitReport};
pub use simplex::{Constraint, FixedSet, SimplexPoint, StepStats, NEGATIVE_TOL, SUM_TOL};
