//! Calculus of variations on time scales.
//!
//! A time scale is a closed subset of the reals, represented here by a finite
//! ordered point set whose gaps are either scattered (genuine jumps) or dense
//! (sampled continuum). On top of that sit delta derivatives and integrals,
//! the first and second Euler-Lagrange conditions, extremal solvers for
//! discrete scales, and a Noether-type conservation check.

pub mod cli;
pub mod expr;
pub mod noether;
pub mod solver;
pub mod timescale;
pub mod variational;

pub use expr::{Dual, Expr, ExprError};
pub use noether::{
    check_conservation, conserved_quantity, invariance_residual, NoetherReport, Transformation,
};
pub use solver::{
    affine_extremal, enumerate_slope_extremals, filter_second_el, solve, solve_newton, Candidate,
    CandidateSet, NewtonOptions, NewtonSolution, Provenance, Solution, SolverError,
};
pub use timescale::{
    delta_derivative, delta_integral, GapKind, GridFunction, TimeScale, TimeScaleError,
};
pub use variational::{
    action, classical_check, erdmann_deviation, first_el_integral_residual, first_el_residual,
    hamiltonian, second_el_residual, Lagrangian, Residual, ResidualKind, VariationalError,
    VariationalProblem,
};
