//! Training and certification of neural networks that are monotone in a
//! chosen subset of their inputs.
//!
//! Networks are trained with a sampled penalty on negative partial
//! derivatives and then checked exactly: every two-layer block is encoded as
//! a mixed-integer program whose optimum is the smallest partial derivative
//! over the input box. The programs are solved by the branch-and-bound
//! solver in [`monocert_milp`].

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod certify;
pub mod cli;
pub mod data;
mod error;
pub mod model;
pub mod train;

pub use error::{Error, Result};
pub use monocert_milp as milp;
