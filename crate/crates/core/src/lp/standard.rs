use log::warn;

use super::problem::{LpProblem, ProblemError, Sense, Location};

/// What a standard-form column stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    /// Original variable `j` of the source problem.
    Original(usize),
    /// Slack on a standard-form row, measured in the source row's units.
    Slack(usize),
    /// Surplus on a standard-form row, measured in the source row's units.
    Surplus(usize),
    /// Phase-one artificial on a standard-form row.
    Artificial(usize),
}

/// `min c·x  s.t.  A x = b, x ≥ 0, b ≥ 0`, with bookkeeping back to the source
/// problem.
///
/// Rows are sign-flipped so that `b ≥ 0`, then divided by their largest
/// absolute coefficient. Rows with no nonzero coefficient are not carried
/// over: if the zero vector satisfies them they are dropped, otherwise they
/// are listed in [`StandardForm::infeasible_rows`].
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub(crate) columns: Vec<Vec<(usize, f64)>>,
    pub(crate) cost: Vec<f64>,
    pub(crate) rhs: Vec<f64>,
    pub(crate) kinds: Vec<ColumnKind>,
    /// Source constraint index for each row.
    pub(crate) row_origin: Vec<usize>,
    /// `±1`: whether the row was negated.
    pub(crate) row_sign: Vec<f64>,
    /// Factor the (possibly negated) row was divided by.
    pub(crate) row_scale: Vec<f64>,
    pub(crate) initial_basis: Vec<usize>,
    pub(crate) dropped_rows: Vec<usize>,
    pub(crate) infeasible_rows: Vec<(usize, f64)>,
    pub(crate) original_count: usize,
}

impl StandardForm {
    pub fn rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn cost(&self) -> &[f64] {
        &self.cost
    }

    pub fn kind(&self, col: usize) -> ColumnKind {
        self.kinds[col]
    }

    pub fn kinds(&self) -> &[ColumnKind] {
        &self.kinds
    }

    /// Dense copy of column `col`.
    pub fn column(&self, col: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for &(i, a) in &self.columns[col] {
            out[i] = a;
        }
        out
    }

    /// Standard-form column that carries original variable `j`.
    pub fn column_of_original(&self, j: usize) -> usize {
        debug_assert_eq!(self.kinds[j], ColumnKind::Original(j));
        j
    }

    pub fn original_count(&self) -> usize {
        self.original_count
    }

    pub fn initial_basis(&self) -> &[usize] {
        &self.initial_basis
    }

    pub fn row_origin(&self) -> &[usize] {
        &self.row_origin
    }

    /// Source rows dropped because they were all-zero and trivially satisfied.
    pub fn dropped_rows(&self) -> &[usize] {
        &self.dropped_rows
    }

    /// All-zero source rows whose right-hand side cannot be met, with the
    /// amount of violation at `x = 0`.
    pub fn infeasible_rows(&self) -> &[(usize, f64)] {
        &self.infeasible_rows
    }

    pub fn has_artificials(&self) -> bool {
        self.kinds.iter().any(|k| matches!(k, ColumnKind::Artificial(_)))
    }

    /// Maps a standard-form point back to the source variables.
    pub fn to_original(&self, x: &[f64]) -> Vec<f64> {
        x[..self.original_count].to_vec()
    }

    /// Converts standard-form row multipliers to multipliers on the source
    /// constraints (zero for rows that were dropped).
    pub(crate) fn duals_to_original(&self, y: &[f64], constraint_count: usize) -> Vec<f64> {
        let mut out = vec![0.0; constraint_count];
        for (r, &yr) in y.iter().enumerate() {
            out[self.row_origin[r]] = yr * self.row_sign[r] / self.row_scale[r];
        }
        out
    }
}

/// Brings `problem` to equality standard form with a diagonal starting basis.
///
/// `≤` rows (after sign normalization) get a slack that starts basic; `≥` rows
/// get a surplus plus an artificial; `=` rows get an artificial only.
pub fn to_standard_form(problem: &LpProblem) -> Result<StandardForm, ProblemError> {
    let n = problem.variable_count();
    for (column, c) in problem.objective().iter().enumerate() {
        if !c.is_finite() {
            return Err(ProblemError::NonFinite {
                location: Location::Objective { column },
            });
        }
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut kinds: Vec<ColumnKind> = (0..n).map(ColumnKind::Original).collect();
    let mut rhs = Vec::new();
    let mut row_origin = Vec::new();
    let mut row_sign = Vec::new();
    let mut row_scale = Vec::new();
    let mut dropped_rows = Vec::new();
    let mut infeasible_rows = Vec::new();
    // (row, sense after normalization)
    let mut senses = Vec::new();

    for (src, con) in problem.constraints().iter().enumerate() {
        if let Some(column) = con.coeffs.iter().position(|a| !a.is_finite()) {
            return Err(ProblemError::NonFinite {
                location: Location::Coefficient { row: src, column },
            });
        }
        if !con.rhs.is_finite() {
            return Err(ProblemError::NonFinite {
                location: Location::Rhs { row: src },
            });
        }
        if con.is_zero_row() {
            let v = con.violation(&vec![0.0; n]);
            if v > 0.0 {
                infeasible_rows.push((src, v));
            } else {
                warn!("dropping all-zero constraint {src} ({})", con.label);
                dropped_rows.push(src);
            }
            continue;
        }
        let (sign, sense) = if con.rhs < 0.0 {
            let flipped = match con.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            (-1.0, flipped)
        } else {
            (1.0, con.sense)
        };
        let scale = con.scale();
        let r = rhs.len();
        for (j, &a) in con.coeffs.iter().enumerate() {
            if a != 0.0 {
                columns[j].push((r, sign * a / scale));
            }
        }
        rhs.push(sign * con.rhs / scale);
        row_origin.push(src);
        row_sign.push(sign);
        row_scale.push(scale);
        senses.push(sense);
    }

    let m = rhs.len();
    let mut initial_basis = vec![usize::MAX; m];
    for (r, sense) in senses.iter().enumerate() {
        match sense {
            Sense::Le => {
                initial_basis[r] = columns.len();
                columns.push(vec![(r, 1.0 / row_scale[r])]);
                kinds.push(ColumnKind::Slack(r));
            }
            Sense::Ge => {
                columns.push(vec![(r, -1.0 / row_scale[r])]);
                kinds.push(ColumnKind::Surplus(r));
            }
            Sense::Eq => {}
        }
    }
    for (r, sense) in senses.iter().enumerate() {
        if *sense != Sense::Le {
            initial_basis[r] = columns.len();
            columns.push(vec![(r, 1.0)]);
            kinds.push(ColumnKind::Artificial(r));
        }
    }

    let mut cost = problem.objective().to_vec();
    cost.resize(columns.len(), 0.0);

    Ok(StandardForm {
        columns,
        cost,
        rhs,
        kinds,
        row_origin,
        row_sign,
        row_scale,
        initial_basis,
        dropped_rows,
        infeasible_rows,
        original_count: n,
    })
}
