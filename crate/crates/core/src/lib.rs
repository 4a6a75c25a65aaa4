//! Inexact inner-outer generalized Golub-Kahan bidiagonalization for
//! saddle-point systems
//!
//! ```text
//! [ M   A ] [w]   [g]
//! [ A^T 0 ] [p] = [r]
//! ```
//!
//! with symmetric positive definite `M` and full column rank `A`. Every outer
//! step needs one solve with `M`; the tolerance of that inner solve can be
//! relaxed as the outer iteration converges (see [`relax`]).
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod error;
pub mod gkb;
pub mod inner;
pub mod linalg;
pub mod problems;
pub mod relax;
pub mod system;
pub mod transforms;

pub use error::{Error, Result};
pub use gkb::{
    gkb_init, gkb_run, gkb_solve, gkb_solve_with, gkb_step, Diagnostics, GkbOptions, GkbSolution,
    GkbState, IterationRecord, RunLog, SolveStatus,
};
pub use inner::{CgSolver, DirectSolver, InnerReport, InnerSolver};
pub use linalg::{DenseMatrix, SparseMatrix};
pub use relax::{PolicyKind, RelaxPolicy, TolerancePolicy};
pub use system::SaddleSystem;
