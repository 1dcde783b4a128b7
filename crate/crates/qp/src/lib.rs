//! Operator-splitting solver for convex quadratic programs in the standard form
//!
//! ```text
//!   minimize    ½ xᵀ P x + qᵀ x
//!   subject to  l ≤ A x ≤ u
//! ```
//!
//! with `P` symmetric positive semidefinite and `A` sparse. Equality rows are
//! encoded with `l = u`; one-sided rows use infinite bounds.
//!
//! The iteration is the classic ADMM splitting with over-relaxation, Ruiz
//! equilibration, adaptive penalty and a final active-set polish step that
//! lifts the ADMM iterate to high accuracy when the active set is guessed
//! correctly.

pub mod csc;
pub mod ldl;
mod polish;
mod scaling;
pub mod solver;

pub use csc::{CscMatrix, TripletMatrix};
pub use solver::{
    solve, solve_warm, QpError, QpSolution, QpSolver, QpStatus, QuadraticProgram, SolverSettings,
};
