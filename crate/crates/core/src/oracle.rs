//! Independent checks that share no code path with the simplex solver or the
//! diet model builder.
//!
//! [`enumerate_vertices`] solves small LPs by brute force: every choice of `n`
//! constraints (rows or `x_j ≥ 0`) held active defines a candidate point, and
//! an optimum, if one exists, is among the feasible candidates.
//! Unboundedness is decided the same way on the recession cone
//! `{d ≥ 0 : A d ⋚ 0, Σ d = 1}`.
//!
//! [`check_plan`] recomputes every diet constraint straight from catalog data.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::diet::{BoundOverride, DietLpSpec, DietPlan};
use crate::ingest::{normalize_name, Catalog, IngestError, IngestReport};
use crate::lp::{LpProblem, Sense};

/// Largest number of active-set subsets the enumerator will try.
pub const VERTEX_BUDGET: u128 = 1_000_000;
/// Slack allowed by [`check_plan`], relative to `max(1, |limit|)`.
pub const PLAN_TOL: f64 = 1e-6;

const FEAS_TOL: f64 = 1e-9;
const SINGULAR_TOL: f64 = 1e-10;

pub const TOY_NUTRITION: &str = include_str!("../data/toy/nutrition.csv");
pub const TOY_PRICES: &str = include_str!("../data/toy/prices.csv");
pub const TOY_BOUNDS: &str = include_str!("../data/toy/bounds.csv");

/// The bundled hand-auditable catalog.
pub fn toy_catalog() -> Result<(Catalog, IngestReport), IngestError> {
    Catalog::from_csv_strs(TOY_NUTRITION, TOY_PRICES, TOY_BOUNDS)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("vertex enumeration would need {subsets} active sets (budget {VERTEX_BUDGET})")]
    BudgetExceeded { subsets: u128 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome {
    Optimal {
        value: f64,
        /// Every optimal vertex, deduplicated.
        argmin: Vec<Vec<f64>>,
    },
    Infeasible,
    Unbounded,
}

impl OracleOutcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            OracleOutcome::Optimal { value, .. } => Some(*value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Enumeration {
    pub outcome: OracleOutcome,
    pub vertices: usize,
    /// Pivot-ratio condition estimate of the best-conditioned active system
    /// defining an optimal vertex (1 when not optimal).
    pub condition: f64,
}

/// Number of size-`k` subsets of `n` items.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

struct Row {
    coeffs: Vec<f64>,
    sense: Sense,
    rhs: f64,
}

fn rows_of(problem: &LpProblem) -> Vec<Row> {
    let n = problem.variable_count();
    let mut rows: Vec<Row> = problem
        .constraints()
        .iter()
        .map(|c| Row {
            coeffs: c.coeffs.clone(),
            sense: c.sense,
            rhs: c.rhs,
        })
        .collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rows.push(Row {
            coeffs: e,
            sense: Sense::Ge,
            rhs: 0.0,
        });
    }
    rows
}

fn feasible(rows: &[Row], x: &[f64]) -> bool {
    rows.iter().all(|r| {
        let act: f64 = r.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
        let scale = r.coeffs.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
        let tol = FEAS_TOL * scale.max(r.rhs.abs());
        match r.sense {
            Sense::Le => act <= r.rhs + tol,
            Sense::Ge => act >= r.rhs - tol,
            Sense::Eq => (act - r.rhs).abs() <= tol,
        }
    })
}

/// Gaussian elimination with partial pivoting. Returns the solution and the
/// ratio of largest to smallest pivot magnitude.
fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<(Vec<f64>, f64)> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    let (mut pmax, mut pmin) = (0.0_f64, f64::INFINITY);
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))?;
        let piv = a[p][k].abs();
        if piv < SINGULAR_TOL * scale {
            return None;
        }
        pmax = pmax.max(piv);
        pmin = pmin.min(piv);
        a.swap(p, k);
        b.swap(p, k);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f != 0.0 {
                for c in k..n {
                    a[i][c] -= f * a[k][c];
                }
                b[i] -= f * b[k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|c| a[k][c] * x[c]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Some((x, if n == 0 { 1.0 } else { pmax / pmin }))
}

/// Calls `f` on each increasing `k`-subset of `0..n`.
fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == i - 1 + n - k {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

struct VertexScan {
    best: Option<f64>,
    argmin: Vec<Vec<f64>>,
    condition: f64,
    vertices: usize,
}

fn scan(rows: &[Row], objective: &[f64]) -> VertexScan {
    let n = objective.len();
    let mut out = VertexScan {
        best: None,
        argmin: Vec::new(),
        condition: 1.0,
        vertices: 0,
    };
    for_each_subset(rows.len(), n, |active| {
        let a = active.iter().map(|&r| rows[r].coeffs.clone()).collect();
        let b = active.iter().map(|&r| rows[r].rhs).collect();
        let Some((x, cond)) = solve_square(a, b) else {
            return;
        };
        if !feasible(rows, &x) {
            return;
        }
        out.vertices += 1;
        let v: f64 = objective.iter().zip(&x).map(|(c, xi)| c * xi).sum();
        let tie = |best: f64| (v - best).abs() <= 1e-9 * (1.0 + best.abs());
        match out.best {
            Some(best) if tie(best) => {
                if !out.argmin.iter().any(|p| close(p, &x)) {
                    out.argmin.push(x);
                }
                out.condition = out.condition.min(cond);
                if v < best {
                    out.best = Some(v);
                }
            }
            Some(best) if v > best => {}
            _ => {
                out.best = Some(v);
                out.argmin = vec![x];
                out.condition = cond;
            }
        }
    });
    out
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())))
}

/// Brute-force optimum of `problem` over all basic feasible solutions.
pub fn enumerate_vertices(problem: &LpProblem) -> Result<Enumeration, OracleError> {
    let n = problem.variable_count();
    let rows = rows_of(problem);
    let subsets = binomial(rows.len(), n);
    // the recession-cone check adds one row
    let cone_subsets = binomial(rows.len() + 1, n);
    if subsets.max(cone_subsets) > VERTEX_BUDGET {
        return Err(OracleError::BudgetExceeded {
            subsets: subsets.max(cone_subsets),
        });
    }

    let primal = scan(&rows, problem.objective());
    let Some(value) = primal.best else {
        return Ok(Enumeration {
            outcome: OracleOutcome::Infeasible,
            vertices: 0,
            condition: 1.0,
        });
    };

    let mut cone: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            coeffs: r.coeffs.clone(),
            sense: r.sense,
            rhs: 0.0,
        })
        .collect();
    cone.push(Row {
        coeffs: vec![1.0; n],
        sense: Sense::Eq,
        rhs: 1.0,
    });
    let ray = scan(&cone, problem.objective());
    if ray.best.is_some_and(|v| v < -1e-9) {
        return Ok(Enumeration {
            outcome: OracleOutcome::Unbounded,
            vertices: primal.vertices,
            condition: 1.0,
        });
    }

    Ok(Enumeration {
        outcome: OracleOutcome::Optimal {
            value,
            argmin: primal.argmin,
        },
        vertices: primal.vertices,
        condition: primal.condition,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    MinNutrient,
    MaxNutrient,
    Diversity,
    NegativeWeight,
    UnknownIngredient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    /// Nutrient key or ingredient name.
    pub subject: String,
    pub value: f64,
    pub limit: f64,
    /// Signed slack; negative means violated.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ViolationReport {
    pub violations: Vec<Violation>,
}

impl ViolationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

/// Checks `plan` against the nutrient ranges, diversity rule and sign
/// constraints implied by `catalog` and `spec`.
pub fn check_plan(catalog: &Catalog, spec: &DietLpSpec, plan: &DietPlan) -> ViolationReport {
    let mut report = ViolationReport::default();

    let by_name: BTreeMap<String, usize> = catalog
        .ingredients
        .iter()
        .enumerate()
        .map(|(i, ing)| (normalize_name(&ing.name), i))
        .collect();
    let mut weights = vec![0.0; catalog.ingredients.len()];
    for e in &plan.entries {
        match by_name.get(&normalize_name(&e.name)) {
            Some(&i) => weights[i] += e.weight_g,
            None => report.violations.push(Violation {
                kind: ViolationKind::UnknownIngredient,
                subject: e.name.clone(),
                value: e.weight_g,
                limit: 0.0,
                slack: -e.weight_g.abs(),
            }),
        }
    }

    for (ing, &w) in catalog.ingredients.iter().zip(&weights) {
        if w < -PLAN_TOL {
            report.violations.push(Violation {
                kind: ViolationKind::NegativeWeight,
                subject: ing.name.clone(),
                value: w,
                limit: 0.0,
                slack: w,
            });
        }
    }

    // nutrient ranges, overrides applied side by side
    let mut ranges: BTreeMap<&str, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for b in &catalog.bounds {
        ranges.insert(b.key.as_str(), (b.min_value, b.max_value));
    }
    for (key, BoundOverride { min, max }) in &spec.bound_overrides {
        let entry = ranges.entry(key.as_str()).or_insert((None, None));
        if min.is_some() {
            entry.0 = *min;
        }
        if max.is_some() {
            entry.1 = *max;
        }
    }
    for (key, (min, max)) in ranges {
        let total: f64 = catalog
            .ingredients
            .iter()
            .zip(&weights)
            .map(|(ing, w)| ing.nutrients.get(key).copied().unwrap_or(0.0) * w)
            .sum();
        if let Some(min) = min {
            let slack = total - min;
            if slack < -PLAN_TOL * min.abs().max(1.0) {
                report.violations.push(Violation {
                    kind: ViolationKind::MinNutrient,
                    subject: key.to_string(),
                    value: total,
                    limit: min,
                    slack,
                });
            }
        }
        if let Some(max) = max {
            let slack = max - total;
            if slack < -PLAN_TOL * max.abs().max(1.0) {
                report.violations.push(Violation {
                    kind: ViolationKind::MaxNutrient,
                    subject: key.to_string(),
                    value: total,
                    limit: max,
                    slack,
                });
            }
        }
    }

    let total_weight: f64 = weights.iter().sum();
    let cap = spec.diversity_fraction * total_weight;
    for (ing, &w) in catalog.ingredients.iter().zip(&weights) {
        let slack = cap - w;
        if slack < -PLAN_TOL {
            report.violations.push(Violation {
                kind: ViolationKind::Diversity,
                subject: ing.name.clone(),
                value: w,
                limit: cap,
                slack,
            });
        }
    }
    report
}
