use thiserror::Error;

use super::problem::{dot, LpProblem, Sense};
use super::solution::{Solution, Status};

/// Threshold every residual must meet for a certificate to pass.
pub const CERTIFICATE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertificateError {
    #[error("certificates exist only for optimal solutions, got {0}")]
    NotOptimal(Status),
    #[error("solution has {found} {what}, problem expects {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

/// Independent optimality check of a primal/dual pair, recomputed from the
/// source problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    /// Largest row violation (row-scaled) or negative weight.
    pub primal_violation: f64,
    /// Largest negative reduced cost or wrong-signed row multiplier.
    pub dual_violation: f64,
    /// Largest `|y_i · slack_i|` or `|x_j · d_j|`.
    pub complementary_slackness: f64,
    /// `|c·x − b·y|`
    pub duality_gap: f64,
}

impl CertificateReport {
    pub fn passes(&self) -> bool {
        self.primal_violation <= CERTIFICATE_TOL
            && self.dual_violation <= CERTIFICATE_TOL
            && self.complementary_slackness <= CERTIFICATE_TOL
            && self.duality_gap <= CERTIFICATE_TOL
    }
}

pub fn certificate(problem: &LpProblem, solution: &Solution) -> Result<CertificateReport, CertificateError> {
    if solution.status != Status::Optimal {
        return Err(CertificateError::NotOptimal(solution.status));
    }
    let x = &solution.weights;
    let y = &solution.duals;
    if x.len() != problem.variable_count() {
        return Err(CertificateError::Shape {
            what: "weights",
            expected: problem.variable_count(),
            found: x.len(),
        });
    }
    if y.len() != problem.constraint_count() {
        return Err(CertificateError::Shape {
            what: "duals",
            expected: problem.constraint_count(),
            found: y.len(),
        });
    }

    let primal_violation = problem.max_scaled_violation(x);

    let mut dual_violation = 0.0_f64;
    let mut complementary_slackness = 0.0_f64;
    for (con, &yi) in problem.constraints().iter().zip(y) {
        let wrong_sign = match con.sense {
            Sense::Ge => (-yi).max(0.0),
            Sense::Le => yi.max(0.0),
            Sense::Eq => 0.0,
        };
        dual_violation = dual_violation.max(wrong_sign);
        let slack = con.activity(x) - con.rhs;
        complementary_slackness = complementary_slackness.max((yi * slack).abs());
    }
    for (j, (&cj, &xj)) in problem.objective().iter().zip(x).enumerate() {
        let dj = cj
            - problem
                .constraints()
                .iter()
                .zip(y)
                .map(|(c, yi)| c.coeffs[j] * yi)
                .sum::<f64>();
        dual_violation = dual_violation.max((-dj).max(0.0));
        complementary_slackness = complementary_slackness.max((xj * dj).abs());
    }

    let primal_objective = problem.objective_value(x);
    let rhs: Vec<f64> = problem.constraints().iter().map(|c| c.rhs).collect();
    let dual_objective = dot(&rhs, y);

    Ok(CertificateReport {
        primal_violation,
        dual_violation,
        complementary_slackness,
        duality_gap: (primal_objective - dual_objective).abs(),
    })
}
