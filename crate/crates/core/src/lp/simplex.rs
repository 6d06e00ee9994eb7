//! Two-phase primal revised simplex with an explicit dense basis inverse.
//!
//! Pricing is Dantzig's rule (most negative reduced cost) until a run of
//! degenerate pivots gets long, after which the solve switches to Bland's
//! smallest-index rule for the rest of the run. The basis inverse is rebuilt
//! from scratch every [`SolverOptions::refactor_interval`] pivots, and also
//! whenever a pivot leaves `B⁻¹·a_q` further than [`REFACTOR_RESIDUAL`] from
//! the unit vector it should be.

use std::time::Instant;

use log::{debug, info};
use thiserror::Error;

use super::problem::{LpProblem, ProblemError};
use super::solution::{Solution, Status};
use super::standard::{to_standard_form, ColumnKind, StandardForm};

/// Primal feasibility tolerance (row-scaled, absolute).
pub const TOL_FEAS: f64 = 1e-7;
/// Reduced-cost optimality tolerance.
pub const TOL_OPT: f64 = 1e-9;
/// Smallest pivot element accepted in the ratio test.
pub const PIVOT_FLOOR: f64 = 1e-10;
/// Max-norm drift tolerated before the basis inverse is rebuilt.
pub const REFACTOR_RESIDUAL: f64 = 1e-8;

const DEGENERATE_STEP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Dantzig pricing, switching permanently to Bland after
    /// `3 × (rows + cols)` consecutive degenerate pivots.
    DantzigWithBlandFallback,
    /// Dantzig pricing only. Can cycle; exists for testing.
    DantzigOnly,
    /// Bland's rule from the first pivot.
    Bland,
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub pivot_rule: PivotRule,
    pub max_iterations: usize,
    pub refactor_interval: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            pivot_rule: PivotRule::DantzigWithBlandFallback,
            max_iterations: 1_000_000,
            refactor_interval: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("basis matrix is numerically singular (basis columns {basis:?})")]
    SingularBasis { basis: Vec<usize> },
    #[error("iteration limit of {limit} reached")]
    IterationLimit { limit: usize },
}

/// Solves `problem` with the default options.
pub fn solve(problem: &LpProblem) -> Result<Solution, SolveError> {
    solve_with(problem, &SolverOptions::default())
}

pub fn solve_with(problem: &LpProblem, options: &SolverOptions) -> Result<Solution, SolveError> {
    let started = Instant::now();
    let sf = to_standard_form(problem)?;
    let n = problem.variable_count();

    if !sf.infeasible_rows().is_empty() {
        for (row, _) in sf.infeasible_rows() {
            debug!("constraint {row} has no coefficients and cannot hold");
        }
        let residual: f64 = sf.infeasible_rows().iter().map(|(_, v)| v).sum();
        return Ok(Solution {
            status: Status::Infeasible,
            weights: vec![0.0; n],
            objective_value: 0.0,
            duals: vec![0.0; problem.constraint_count()],
            reduced_costs: problem.objective().to_vec(),
            iterations: 0,
            solve_time: started.elapsed().as_secs_f64(),
            phase_one_residual: residual,
            unbounded_ray: None,
            used_bland: false,
        });
    }

    let mut engine = Engine::new(&sf, options)?;

    // Phase one: minimize the sum of artificials.
    let mut phase_one_residual = 0.0;
    if sf.has_artificials() {
        let phase_one_cost: Vec<f64> = sf
            .kinds()
            .iter()
            .map(|k| if matches!(k, ColumnKind::Artificial(_)) { 1.0 } else { 0.0 })
            .collect();
        match engine.run(&phase_one_cost, |_| true)? {
            Outcome::Optimal => {}
            Outcome::Unbounded { .. } => unreachable!("phase one is bounded below by zero"),
        }
        phase_one_residual = engine.artificial_sum();
        debug!(
            "phase one finished after {} iterations, residual {phase_one_residual:e}",
            engine.iterations
        );
        if phase_one_residual > TOL_FEAS {
            let x = engine.primal();
            let weights = sf.to_original(&x);
            return Ok(Solution {
                status: Status::Infeasible,
                objective_value: problem.objective_value(&weights),
                weights,
                duals: vec![0.0; problem.constraint_count()],
                reduced_costs: problem.objective().to_vec(),
                iterations: engine.iterations,
                solve_time: started.elapsed().as_secs_f64(),
                phase_one_residual,
                unbounded_ray: None,
                used_bland: engine.bland,
            });
        }
        engine.drive_out_artificials()?;
    }

    // Phase two on the true objective; artificials may not re-enter.
    let kinds = sf.kinds().to_vec();
    let eligible = |j: usize| !matches!(kinds[j], ColumnKind::Artificial(_));
    let outcome = engine.run(sf.cost(), eligible)?;
    let x = engine.primal();
    let weights: Vec<f64> = sf.to_original(&x).into_iter().map(|v| v.max(0.0)).collect();

    let (status, unbounded_ray) = match outcome {
        Outcome::Optimal => (Status::Optimal, None),
        Outcome::Unbounded { entering, direction } => {
            let mut ray = vec![0.0; n];
            if entering < n {
                ray[entering] = 1.0;
            }
            for (r, &col) in engine.basis.iter().enumerate() {
                if col < n {
                    ray[col] = -direction[r];
                }
            }
            (Status::Unbounded, Some(ray))
        }
    };

    let y_std = engine.row_prices(sf.cost());
    let duals = sf.duals_to_original(&y_std, problem.constraint_count());
    let reduced_costs = (0..n)
        .map(|j| {
            let col_price: f64 = problem
                .constraints()
                .iter()
                .zip(&duals)
                .map(|(c, y)| c.coeffs[j] * y)
                .sum();
            problem.objective()[j] - col_price
        })
        .collect();

    let solution = Solution {
        status,
        objective_value: problem.objective_value(&weights),
        weights,
        duals,
        reduced_costs,
        iterations: engine.iterations,
        solve_time: started.elapsed().as_secs_f64(),
        phase_one_residual,
        unbounded_ray,
        used_bland: engine.bland,
    };
    debug!(
        "simplex finished: {} after {} iterations ({:.3}s)",
        solution.status, solution.iterations, solution.solve_time
    );
    Ok(solution)
}

enum Outcome {
    Optimal,
    Unbounded { entering: usize, direction: Vec<f64> },
}

struct Engine<'a> {
    sf: &'a StandardForm,
    options: &'a SolverOptions,
    m: usize,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    /// Row-major `m × m` basis inverse.
    binv: Vec<f64>,
    x_basic: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

impl<'a> Engine<'a> {
    fn new(sf: &'a StandardForm, options: &'a SolverOptions) -> Result<Self, SolveError> {
        let m = sf.rows();
        let basis = sf.initial_basis().to_vec();
        let mut position = vec![None; sf.cols()];
        for (r, &col) in basis.iter().enumerate() {
            position[col] = Some(r);
        }
        let mut engine = Self {
            sf,
            options,
            m,
            basis,
            position,
            binv: vec![0.0; m * m],
            x_basic: vec![0.0; m],
            iterations: 0,
            since_refactor: 0,
            degenerate_run: 0,
            bland: options.pivot_rule == PivotRule::Bland,
        };
        engine.refactor()?;
        Ok(engine)
    }

    /// Rebuilds `B⁻¹` and recomputes `x_B = B⁻¹ b`.
    ///
    /// Basic columns with a single nonzero on a row of their own (slacks,
    /// surpluses, artificials) form a diagonal block. Only the remaining
    /// `k × k` block is inverted, by Gauss–Jordan with partial pivoting, and
    /// the singleton rows of `B⁻¹` follow by back-substitution.
    fn refactor(&mut self) -> Result<(), SolveError> {
        let m = self.m;
        // row -> (basis position, value) of the singleton that owns it
        let mut owner: Vec<Option<(usize, f64)>> = vec![None; m];
        let mut dense = Vec::new();
        for (r, &col) in self.basis.iter().enumerate() {
            match self.sf.columns[col].as_slice() {
                &[(i, a)] if owner[i].is_none() && a != 0.0 => owner[i] = Some((r, a)),
                _ => dense.push(r),
            }
        }
        let free: Vec<usize> = (0..m).filter(|&i| owner[i].is_none()).collect();
        let k = dense.len();
        let singular = || SolveError::SingularBasis {
            basis: self.basis.clone(),
        };
        if free.len() != k {
            return Err(singular());
        }
        let mut slot = vec![usize::MAX; m];
        for (t, &i) in free.iter().enumerate() {
            slot[i] = t;
        }
        let mut block = vec![0.0; k * k];
        for (c, &r) in dense.iter().enumerate() {
            for &(i, a) in &self.sf.columns[self.basis[r]] {
                if slot[i] != usize::MAX {
                    block[slot[i] * k + c] = a;
                }
            }
        }
        let block_inv = invert(block, k).ok_or_else(singular)?;

        let mut inv = vec![0.0; m * m];
        for (c, &r) in dense.iter().enumerate() {
            for (t, &i) in free.iter().enumerate() {
                inv[r * m + i] = block_inv[c * k + t];
            }
        }
        for (i, o) in owner.iter().enumerate() {
            if let Some((r, s)) = *o {
                inv[r * m + i] = 1.0 / s;
            }
        }
        for (c, &r) in dense.iter().enumerate() {
            for &(i, a) in &self.sf.columns[self.basis[r]] {
                if let Some((rs, s)) = owner[i] {
                    let f = a / s;
                    for (t, &j) in free.iter().enumerate() {
                        inv[rs * m + j] -= f * block_inv[c * k + t];
                    }
                }
            }
        }
        self.binv = inv;
        self.x_basic = self.ftran_dense(&self.sf.rhs);
        self.since_refactor = 0;
        Ok(())
    }

    fn ftran_dense(&self, v: &[f64]) -> Vec<f64> {
        let m = self.m;
        (0..m)
            .map(|r| {
                let row = &self.binv[r * m..(r + 1) * m];
                row.iter().zip(v).map(|(a, b)| a * b).sum()
            })
            .collect()
    }

    /// `B⁻¹ a_col`
    fn ftran(&self, col: usize) -> Vec<f64> {
        let m = self.m;
        let entries = &self.sf.columns[col];
        if entries.len() * 8 > m {
            let mut dense = vec![0.0; m];
            for &(i, a) in entries {
                dense[i] = a;
            }
            return self.ftran_dense(&dense);
        }
        let mut out = vec![0.0; m];
        for &(i, a) in entries {
            for (r, o) in out.iter_mut().enumerate() {
                *o += self.binv[r * m + i] * a;
            }
        }
        out
    }

    /// Simplex multipliers `y = c_B B⁻¹`.
    fn row_prices(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &col) in self.basis.iter().enumerate() {
            let cb = cost[col];
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, b) in y.iter_mut().zip(row) {
                    *yi += cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], col: usize) -> f64 {
        cost[col] - self.sf.columns[col].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    fn primal(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.sf.cols()];
        for (r, &col) in self.basis.iter().enumerate() {
            x[col] = self.x_basic[r];
        }
        x
    }

    fn artificial_sum(&self) -> f64 {
        self.basis
            .iter()
            .zip(&self.x_basic)
            .filter(|(&col, _)| matches!(self.sf.kind(col), ColumnKind::Artificial(_)))
            .map(|(_, &v)| v.abs())
            .sum()
    }

    fn choose_entering(&self, cost: &[f64], eligible: &impl Fn(usize) -> bool) -> Option<usize> {
        let y = self.row_prices(cost);
        let mut best: Option<(usize, f64)> = None;
        for col in 0..self.sf.cols() {
            if self.position[col].is_some() || !eligible(col) {
                continue;
            }
            let d = self.reduced_cost(cost, &y, col);
            if d >= -TOL_OPT {
                continue;
            }
            if self.bland {
                return Some(col);
            }
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((col, d));
            }
        }
        best.map(|(c, _)| c)
    }

    /// Minimum-ratio row; ties go to the basic column with the smallest index.
    fn choose_leaving(&self, direction: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (r, &alpha) in direction.iter().enumerate() {
            if alpha <= PIVOT_FLOOR {
                continue;
            }
            let ratio = self.x_basic[r].max(0.0) / alpha;
            best = match best {
                None => Some((r, ratio)),
                Some((br, bratio)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    if (tie && self.basis[r] < self.basis[br]) || (!tie && ratio < bratio) {
                        Some((r, ratio))
                    } else {
                        Some((br, bratio))
                    }
                }
            };
        }
        best
    }

    fn pivot(&mut self, entering: usize, leave_row: usize, direction: &[f64]) -> Result<(), SolveError> {
        let m = self.m;
        let alpha_r = direction[leave_row];
        let step = self.x_basic[leave_row] / alpha_r;
        for (r, x) in self.x_basic.iter_mut().enumerate() {
            if r != leave_row {
                *x -= step * direction[r];
            }
        }
        self.x_basic[leave_row] = step;

        let pivot_row: Vec<f64> = self.binv[leave_row * m..(leave_row + 1) * m]
            .iter()
            .map(|v| v / alpha_r)
            .collect();
        for r in 0..m {
            if r == leave_row {
                continue;
            }
            let f = direction[r];
            if f != 0.0 {
                let row = &mut self.binv[r * m..(r + 1) * m];
                for (v, p) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.binv[leave_row * m..(leave_row + 1) * m].copy_from_slice(&pivot_row);

        let leaving = self.basis[leave_row];
        self.position[leaving] = None;
        self.position[entering] = Some(leave_row);
        self.basis[leave_row] = entering;

        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.options.refactor_interval {
            self.refactor()?;
        } else {
            let check = self.ftran(entering);
            let drift = check
                .iter()
                .enumerate()
                .map(|(r, v)| (v - if r == leave_row { 1.0 } else { 0.0 }).abs())
                .fold(0.0_f64, f64::max);
            if drift > REFACTOR_RESIDUAL {
                debug!("basis inverse drift {drift:e}, refactorizing");
                self.refactor()?;
            }
        }
        Ok(())
    }

    fn run(&mut self, cost: &[f64], eligible: impl Fn(usize) -> bool) -> Result<Outcome, SolveError> {
        let fallback_after = 3 * (self.m + self.sf.cols());
        self.degenerate_run = 0;
        loop {
            if self.iterations >= self.options.max_iterations {
                return Err(SolveError::IterationLimit {
                    limit: self.options.max_iterations,
                });
            }
            let Some(entering) = self.choose_entering(cost, &eligible) else {
                if self.since_refactor > 0 {
                    // confirm optimality on a fresh factorization
                    self.refactor()?;
                    if self.choose_entering(cost, &eligible).is_some() {
                        continue;
                    }
                }
                return Ok(Outcome::Optimal);
            };
            let direction = self.ftran(entering);
            let Some((leave_row, step)) = self.choose_leaving(&direction) else {
                return Ok(Outcome::Unbounded { entering, direction });
            };
            if step <= DEGENERATE_STEP {
                self.degenerate_run += 1;
                if self.options.pivot_rule == PivotRule::DantzigWithBlandFallback
                    && !self.bland
                    && self.degenerate_run >= fallback_after
                {
                    info!(
                        "{} consecutive degenerate pivots, switching to Bland's rule",
                        self.degenerate_run
                    );
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(entering, leave_row, &direction)?;
        }
    }

    /// After a successful phase one, pivots zero-valued artificials out of the
    /// basis where some structural column can replace them. Rows where none
    /// can are redundant and keep their artificial at zero.
    fn drive_out_artificials(&mut self) -> Result<(), SolveError> {
        let m = self.m;
        for r in 0..m {
            if !matches!(self.sf.kind(self.basis[r]), ColumnKind::Artificial(_)) {
                continue;
            }
            let row = self.binv[r * m..(r + 1) * m].to_vec();
            let mut best: Option<(usize, f64)> = None;
            for col in 0..self.sf.cols() {
                if self.position[col].is_some()
                    || matches!(self.sf.kind(col), ColumnKind::Artificial(_))
                {
                    continue;
                }
                let v: f64 = self.sf.columns[col].iter().map(|&(i, a)| row[i] * a).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, b)| v.abs() > b) {
                    best = Some((col, v.abs()));
                }
            }
            match best {
                Some((col, _)) => {
                    let direction = self.ftran(col);
                    self.pivot(col, r, &direction)?;
                }
                None => debug!("row {r} is redundant; artificial stays basic at zero"),
            }
        }
        Ok(())
    }
}

/// Inverse of the row-major `k × k` matrix `a`, or `None` if a pivot falls
/// below `1e-12`.
fn invert(mut a: Vec<f64>, k: usize) -> Option<Vec<f64>> {
    let mut inv = vec![0.0; k * k];
    for i in 0..k {
        inv[i * k + i] = 1.0;
    }
    for c in 0..k {
        let (p, best) = (c..k)
            .map(|i| (i, a[i * k + c].abs()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if best < 1e-12 {
            return None;
        }
        if p != c {
            for j in 0..k {
                a.swap(p * k + j, c * k + j);
                inv.swap(p * k + j, c * k + j);
            }
        }
        let d = a[c * k + c];
        for j in 0..k {
            a[c * k + j] /= d;
            inv[c * k + j] /= d;
        }
        for i in 0..k {
            if i == c {
                continue;
            }
            let f = a[i * k + c];
            if f != 0.0 {
                for j in 0..k {
                    a[i * k + j] -= f * a[c * k + j];
                    inv[i * k + j] -= f * inv[c * k + j];
                }
            }
        }
    }
    Some(inv)
}
