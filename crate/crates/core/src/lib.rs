//! Homoclinic traveling waves of the suspension-bridge beam equation
//! `u'''' + c²u'' + f(u) = 0`.
//!
//! The crate computes the amplitude lower bound `L(f, c)`, solves for
//! symmetric homoclinic waves by Fourier collocation and damped Newton
//! iteration with continuation in `c`, and checks each computed wave against
//! the structural properties any true homoclinic solution must have.

pub mod bound;
pub mod diagnostics;
pub mod nonlinearity;
pub mod persist;
pub mod solver;
pub mod spectral;
pub mod sweep;

pub use bound::{admissible, lower_bound, nonexistence_predicate, tail_parameters, BoundResult, BoundValue, TailParameters};
pub use diagnostics::{diagnose, DiagnosticsConfig, DiagnosticsError, DiagnosticsReport};
pub use nonlinearity::{AssumptionReport, Builtin, NonlinearityKind, NonlinearitySpec};
pub use persist::{load_solution, save_solution, PersistError, SolutionFile};
pub use spectral::{multiplier_max, Grid, Profile};
pub use solver::{
    continue_in_c, initial_guess, newton_solve, residual, scaled_residual, solve_with_retries, Continuation,
    ContinuationOutcome, GridPolicy, LinearSolver, SolveError, SolverConfig, WaveProfile,
};
pub use sweep::{run_sweep, SweepError, SweepOutput, SweepParams, SweepRecord};
