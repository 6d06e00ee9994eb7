//! Linear programs over non-negative variables and the simplex solver.

mod certificate;
mod lexicographic;
mod problem;
mod simplex;
mod solution;
mod standard;

pub use certificate::{certificate, CertificateError, CertificateReport, CERTIFICATE_TOL};
pub use lexicographic::{
    solve_lexicographic, solve_lexicographic_with, Direction, LexicographicError, LexicographicSolution,
    LexicographicSpec, Objective,
};
pub use problem::{Constraint, Location, LpProblem, ProblemError, Sense};
pub use simplex::{
    solve, solve_with, PivotRule, SolveError, SolverOptions, PIVOT_FLOOR, REFACTOR_RESIDUAL, TOL_FEAS, TOL_OPT,
};
pub use solution::{Solution, Status};
pub use standard::{to_standard_form, ColumnKind, StandardForm};
