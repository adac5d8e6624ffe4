//! Bounded solutions of `p(t) u'' + q(t) u' ∈ A u + f(t)` on `[0, ∞)`, `u(0) = x`,
//! for a maximal monotone `A` on `ℝ^d` accessed through its resolvent.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod chain;
mod linalg;
mod quadrature;

pub mod bvp;
pub mod cli;
pub mod error;
pub mod forcing;
pub mod grid;
pub mod halfline;
pub mod operators;
pub mod presets;
pub mod problem;
pub mod semigroup;
pub mod variational;
pub mod viscosity;
pub mod weights;

pub use chain::SweepMethod;
pub use error::{Error, Result};
pub use linalg::solve_tridiagonal;
