//! Grid finders: the regularized Jang equation and direct Newton solves of
//! `θ = h` over graphs.

pub mod continuation;
pub mod graph_solve;
pub mod jang;
pub mod newton;

pub use continuation::{
    fit_locus, tau_continuation, BlowUpLocus, Continuation, JangVerdict, LocusFit,
};
pub use graph_solve::{pne_graph_solve, GraphSolution, GraphSolveOptions, GraphSystem};
pub use jang::{
    gradient_norms, jang_newton_solve, jang_residual, steep_set, BoundarySpec, JangConfig,
    JangState, JangSystem,
};
pub use newton::{damped_newton, NewtonOptions, NewtonOutcome, NewtonStep};
