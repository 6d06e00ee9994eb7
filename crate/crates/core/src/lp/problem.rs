use std::fmt;

use thiserror::Error;

/// Errors raised while assembling an [`LpProblem`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("a linear program needs at least one variable")]
    NoVariables,
    #[error("{what} has {found} entries, expected {expected}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in {location}")]
    NonFinite { location: Location },
}

/// Where a bad coefficient was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Objective { column: usize },
    Coefficient { row: usize, column: usize },
    Rhs { row: usize },
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Objective { column } => write!(f, "objective column {column}"),
            Location::Coefficient { row, column } => write!(f, "row {row}, column {column}"),
            Location::Rhs { row } => write!(f, "right-hand side of row {row}"),
        }
    }
}

/// Direction of a linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    /// `a·x ≤ b`
    Le,
    /// `a·x ≥ b`
    Ge,
    /// `a·x = b`
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub label: String,
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }

    /// Largest absolute coefficient, or 1 for an all-zero row. Used to express
    /// violations in row-scaled units.
    pub fn scale(&self) -> f64 {
        let m = self.coeffs.iter().fold(0.0_f64, |m, a| m.max(a.abs()));
        if m > 0.0 {
            m
        } else {
            1.0
        }
    }

    /// Amount by which `x` violates this row (0 when satisfied), unscaled.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }

    /// Signed slack `b − a·x` (`a·x − b` for `≥` rows); non-negative when satisfied.
    pub fn slack(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => self.rhs - act,
            Sense::Ge => act - self.rhs,
            Sense::Eq => -(act - self.rhs).abs(),
        }
    }

    pub fn is_zero_row(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0.0)
    }
}

/// A linear program over non-negative continuous variables:
/// minimize `c·x` subject to a list of `≤`, `≥` and `=` rows and `x ≥ 0`.
///
/// Construction validates dimensions and finiteness, so every `LpProblem`
/// that exists satisfies its invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem {
    names: Vec<String>,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

impl LpProblem {
    pub fn new(names: Vec<String>, objective: Vec<f64>) -> Result<Self, ProblemError> {
        if names.is_empty() {
            return Err(ProblemError::NoVariables);
        }
        if objective.len() != names.len() {
            return Err(ProblemError::DimensionMismatch {
                what: "objective".into(),
                expected: names.len(),
                found: objective.len(),
            });
        }
        if let Some(column) = objective.iter().position(|c| !c.is_finite()) {
            return Err(ProblemError::NonFinite {
                location: Location::Objective { column },
            });
        }
        Ok(Self {
            names,
            objective,
            constraints: Vec::new(),
        })
    }

    /// Convenience constructor with generated names `x0, x1, ...`.
    pub fn with_objective(objective: Vec<f64>) -> Result<Self, ProblemError> {
        let names = (0..objective.len()).map(|j| format!("x{j}")).collect();
        Self::new(names, objective)
    }

    pub fn add_constraint(
        &mut self,
        label: impl Into<String>,
        coeffs: Vec<f64>,
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, ProblemError> {
        let row = self.constraints.len();
        if coeffs.len() != self.variable_count() {
            return Err(ProblemError::DimensionMismatch {
                what: format!("row {row}"),
                expected: self.variable_count(),
                found: coeffs.len(),
            });
        }
        if let Some(column) = coeffs.iter().position(|a| !a.is_finite()) {
            return Err(ProblemError::NonFinite {
                location: Location::Coefficient { row, column },
            });
        }
        if !rhs.is_finite() {
            return Err(ProblemError::NonFinite {
                location: Location::Rhs { row },
            });
        }
        self.constraints.push(Constraint {
            label: label.into(),
            coeffs,
            sense,
            rhs,
        });
        Ok(row)
    }

    /// Builder-style variant of [`add_constraint`](Self::add_constraint).
    pub fn subject_to(mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) -> Result<Self, ProblemError> {
        let label = format!("r{}", self.constraints.len());
        self.add_constraint(label, coeffs, sense, rhs)?;
        Ok(self)
    }

    pub fn variable_count(&self) -> usize {
        self.names.len()
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Same constraints, different objective.
    pub fn with_replaced_objective(&self, objective: Vec<f64>) -> Result<Self, ProblemError> {
        let mut out = Self::new(self.names.clone(), objective)?;
        out.constraints = self.constraints.clone();
        Ok(out)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest row violation of `x` in row-scaled units, also counting
    /// negative entries of `x`.
    pub fn max_scaled_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x) / c.scale())
            .fold(0.0_f64, f64::max);
        let bounds = x.iter().map(|&v| (-v).max(0.0)).fold(0.0_f64, f64::max);
        rows.max(bounds)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
