use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
        })
    }
}

/// Result of a simplex solve.
///
/// For `Infeasible` results `weights` holds the phase-one end point and
/// `phase_one_residual` the sum of artificials left over. For `Unbounded`
/// results `unbounded_ray` is a direction `d ≥ 0` in the original variables
/// along which the objective decreases without limit.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: Status,
    pub weights: Vec<f64>,
    pub objective_value: f64,
    /// One multiplier per source constraint, sign convention of a
    /// minimization Lagrangian: `≥` rows carry `y ≥ 0`, `≤` rows `y ≤ 0`.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    /// Wall-clock seconds spent in the solver.
    pub solve_time: f64,
    pub phase_one_residual: f64,
    pub unbounded_ray: Option<Vec<f64>>,
    /// Whether the solve ended up pivoting with Bland's rule.
    pub used_bland: bool,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}
