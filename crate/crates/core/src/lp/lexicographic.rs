//! Two-level hierarchical optimization.
//!
//! Stage one optimizes the primary objective. Stage two re-solves with the
//! primary held to within `degradation_tolerance` of its optimum by one extra
//! `≤` row, and optimizes the secondary objective. Maximization is handled as
//! minimization of the negated vector.

use thiserror::Error;

use super::problem::{LpProblem, ProblemError, Sense};
use super::simplex::{solve_with, SolveError, SolverOptions};
use super::solution::{Solution, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub coeffs: Vec<f64>,
    pub direction: Direction,
}

impl Objective {
    pub fn minimize(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs,
            direction: Direction::Minimize,
        }
    }

    pub fn maximize(coeffs: Vec<f64>) -> Self {
        Self {
            coeffs,
            direction: Direction::Maximize,
        }
    }

    /// Coefficients of the equivalent minimization.
    pub fn as_minimization(&self) -> Vec<f64> {
        match self.direction {
            Direction::Minimize => self.coeffs.clone(),
            Direction::Maximize => self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicographicSpec {
    pub primary: Objective,
    pub secondary: Objective,
    /// Absolute slack allowed on the primary optimum in stage two.
    pub degradation_tolerance: f64,
    /// Extra slack as a fraction of `|primary optimum|`.
    pub relative_degradation: f64,
}

impl LexicographicSpec {
    pub fn new(primary: Objective, secondary: Objective) -> Self {
        Self {
            primary,
            secondary,
            degradation_tolerance: 0.0,
            relative_degradation: 0.0,
        }
    }

    /// Total stage-two slack for a stage-one optimum `z1`.
    pub fn allowance(&self, z1: f64) -> f64 {
        self.degradation_tolerance + self.relative_degradation * z1.abs()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexicographicError {
    #[error("{which} objective has {found} coefficients, problem has {expected} variables")]
    Length {
        which: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("degradation tolerance must be finite and non-negative, got {0}")]
    Tolerance(f64),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LexicographicSolution {
    /// Final solution. When stage two ran, its duals refer to
    /// [`stage_two_problem`](Self::stage_two_problem) and `objective_value`
    /// is the secondary objective in its minimization form.
    pub solution: Solution,
    /// Stage-one optimum of the primary objective, in its own direction.
    pub primary_optimum: Option<f64>,
    /// Primary objective at the returned point, in its own direction.
    pub primary_value: f64,
    /// Secondary objective at the returned point, in its own direction.
    pub secondary_value: f64,
    /// The problem stage two solved (source rows plus the primary-hold row).
    pub stage_two_problem: Option<LpProblem>,
}

pub fn solve_lexicographic(
    problem: &LpProblem,
    spec: &LexicographicSpec,
) -> Result<LexicographicSolution, LexicographicError> {
    solve_lexicographic_with(problem, spec, &SolverOptions::default())
}

pub fn solve_lexicographic_with(
    problem: &LpProblem,
    spec: &LexicographicSpec,
    options: &SolverOptions,
) -> Result<LexicographicSolution, LexicographicError> {
    let n = problem.variable_count();
    for (which, obj) in [("primary", &spec.primary), ("secondary", &spec.secondary)] {
        if obj.coeffs.len() != n {
            return Err(LexicographicError::Length {
                which,
                expected: n,
                found: obj.coeffs.len(),
            });
        }
    }
    for tol in [spec.degradation_tolerance, spec.relative_degradation] {
        if !(tol.is_finite() && tol >= 0.0) {
            return Err(LexicographicError::Tolerance(tol));
        }
    }

    let primary_min = spec.primary.as_minimization();
    let stage_one = problem.with_replaced_objective(primary_min.clone())?;
    let first = solve_with(&stage_one, options)?;
    if first.status != Status::Optimal {
        return Ok(LexicographicSolution {
            primary_value: spec.primary.value(&first.weights),
            secondary_value: spec.secondary.value(&first.weights),
            solution: first,
            primary_optimum: None,
            stage_two_problem: None,
        });
    }
    let z1 = first.objective_value;

    let mut stage_two = problem.with_replaced_objective(spec.secondary.as_minimization())?;
    stage_two.add_constraint(
        "lexicographic primary hold",
        primary_min,
        Sense::Le,
        z1 + spec.allowance(z1),
    )?;
    let mut second = solve_with(&stage_two, options)?;
    second.iterations += first.iterations;
    second.solve_time += first.solve_time;

    let primary_optimum = match spec.primary.direction {
        Direction::Minimize => z1,
        Direction::Maximize => -z1,
    };
    Ok(LexicographicSolution {
        primary_value: spec.primary.value(&second.weights),
        secondary_value: spec.secondary.value(&second.weights),
        solution: second,
        primary_optimum: Some(primary_optimum),
        stage_two_problem: Some(stage_two),
    })
}
