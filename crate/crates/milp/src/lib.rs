//! A small, self-contained mixed-integer linear programming solver.
//!
//! The solver targets the problem sizes that show up when encoding ReLU
//! networks: a few hundred binaries, a few hundred rows, every variable
//! bounded. It consists of
//!
//! - a dense bounded-variable primal simplex ([`solve_lp`]) with Dantzig
//!   pricing and a Bland fallback once degenerate pivots pile up,
//! - a bound-based [`presolve`] that fixes forced binaries and drops
//!   redundant rows,
//! - best-first branch-and-bound ([`solve`]) that reports a certified bound
//!   on every return path, so callers can stop early once the bound is good
//!   enough for them.
//!
//! Only binary integer variables are supported.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod branch;
mod error;
mod lp_format;
mod presolve;
mod problem;
mod simplex;

pub use branch::{solve, solve_with_target, MilpOutcome, MilpStatus, SolveBudget, SolveStats};
pub use error::MilpError;
pub use lp_format::write_lp;
pub use presolve::{presolve, PresolveResult};
pub use problem::{Constraint, MilpProblem, Objective, Relation, Sense, VarId, VarKind, Variable};
pub use simplex::{solve_lp, solve_lp_with_bounds, LpOutcome, LpSolution, SimplexOptions};

pub type Result<T> = std::result::Result<T, MilpError>;
