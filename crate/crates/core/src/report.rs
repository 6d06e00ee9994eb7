//! Run records and their table, JSON and CSV renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diet::{BoundOverride, DietPlan, PlanEntry};
use crate::lp::{LpProblem, Sense, Solution, Status, TOL_FEAS};
use crate::oracle::{Violation, ViolationKind, ViolationReport};
use crate::scenarios::ScenarioRun;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_UNBOUNDED: i32 = 3;

/// Outcome of one scenario run as it appears in output files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The run did not produce a solver status (bad override, solver fault).
    Error,
}

impl From<Status> for RunStatus {
    fn from(s: Status) -> Self {
        match s {
            Status::Optimal => RunStatus::Optimal,
            Status::Infeasible => RunStatus::Infeasible,
            Status::Unbounded => RunStatus::Unbounded,
        }
    }
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::Infeasible => "infeasible",
            RunStatus::Unbounded => "unbounded",
            RunStatus::Error => "error",
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Optimal => EXIT_OK,
            RunStatus::Infeasible => EXIT_INFEASIBLE,
            RunStatus::Unbounded => EXIT_UNBOUNDED,
            RunStatus::Error => EXIT_INPUT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub scenario: String,
    pub status: RunStatus,
    /// `null` unless the run is optimal.
    pub total_cost: Option<f64>,
    pub total_weight_g: Option<f64>,
    pub iterations: usize,
    pub solve_time_s: f64,
    pub entries: Vec<PlanEntry>,
    pub nutrient_totals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// RFC 3339, UTC.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
}

impl RunRecord {
    pub fn from_run(scenario: impl Into<String>, run: &ScenarioRun) -> Self {
        let solution = &run.solution;
        let (total_cost, total_weight_g, entries, nutrient_totals) = match &run.plan {
            Some(plan) => (
                Some(plan.total_cost),
                Some(plan.total_weight),
                plan.entries.clone(),
                plan.nutrient_totals.clone(),
            ),
            None => (None, None, Vec::new(), BTreeMap::new()),
        };
        Self {
            scenario: scenario.into(),
            status: solution.status.into(),
            total_cost,
            total_weight_g,
            iterations: solution.iterations,
            solve_time_s: solution.solve_time,
            entries,
            nutrient_totals,
            error: None,
            timestamp: Some(now()),
        }
    }

    pub fn failed(scenario: impl Into<String>, error: impl ToString) -> Self {
        Self {
            scenario: scenario.into(),
            status: RunStatus::Error,
            total_cost: None,
            total_weight_g: None,
            iterations: 0,
            solve_time_s: 0.0,
            entries: Vec::new(),
            nutrient_totals: BTreeMap::new(),
            error: Some(error.to_string()),
            timestamp: Some(now()),
        }
    }

    /// Drops the timestamp and the measured solve time, the two fields that
    /// change between otherwise identical runs.
    pub fn without_clock(mut self) -> Self {
        self.timestamp = None;
        self.solve_time_s = 0.0;
        self
    }

    /// The plan the record describes. Totals are taken as recorded.
    pub fn plan(&self) -> DietPlan {
        DietPlan {
            entries: self.entries.clone(),
            total_cost: self.total_cost.unwrap_or(0.0),
            total_weight: self.total_weight_g.unwrap_or(0.0),
            nutrient_totals: self.nutrient_totals.clone(),
        }
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

pub fn render_json(record: &RunRecord) -> String {
    let mut s = serde_json::to_string_pretty(record).expect("run records serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> serde_json::Result<RunRecord> {
    serde_json::from_str(text)
}

fn fixed(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6}")).unwrap_or_else(|| "-".into())
}

/// Human-readable plan. Every listed entry is shown; numbers at 6 dp.
pub fn render_table(record: &RunRecord) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", record.scenario);
    let _ = writeln!(out, "status:   {}", record.status.as_str());
    if let Some(e) = &record.error {
        let _ = writeln!(out, "error:    {e}");
    }
    if !record.entries.is_empty() {
        let width = record.entries.iter().map(|e| e.name.chars().count()).max().unwrap_or(0).max(10);
        let _ = writeln!(out);
        let _ = writeln!(out, "{:>6}  {:<width$}  {:>14}", "id", "ingredient", "weight (g)");
        for e in &record.entries {
            let _ = writeln!(out, "{:>6}  {:<width$}  {:>14.6}", e.id, e.name, e.weight_g);
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "total cost:       {}", fixed(record.total_cost));
    let _ = writeln!(out, "total weight (g): {}", fixed(record.total_weight_g));
    let _ = writeln!(out, "iterations:       {}", record.iterations);
    let _ = writeln!(out, "solve time (s):   {:.6}", record.solve_time_s);
    if !record.nutrient_totals.is_empty() {
        let _ = writeln!(out);
        let width = record.nutrient_totals.keys().map(|k| k.chars().count()).max().unwrap_or(0);
        for (k, v) in &record.nutrient_totals {
            let _ = writeln!(out, "{k:<width$}  {v:>16.6}");
        }
    }
    out
}

/// Plan entries as `id,name,weight_g` with full precision weights.
pub fn render_plan_csv(record: &RunRecord) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for e in &record.entries {
        w.serialize(e).expect("writing to memory");
    }
    if record.entries.is_empty() {
        w.write_record(["id", "name", "weight_g"]).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

/// Mean total cost over the optimal rows.
pub fn mean_cost(records: &[RunRecord]) -> Option<f64> {
    let costs: Vec<f64> = records.iter().filter_map(|r| r.total_cost).collect();
    if costs.is_empty() {
        None
    } else {
        Some(costs.iter().sum::<f64>() / costs.len() as f64)
    }
}

/// Long-format comparison: one `(scenario, metric, value)` row per field,
/// then a `mean,total_cost` row when any scenario was optimal.
pub fn render_compare_csv(records: &[RunRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["scenario", "metric", "value"]).expect("writing to memory");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        let rows = [
            ("status", r.status.as_str().to_string()),
            ("total_cost", opt(r.total_cost)),
            ("total_weight_g", opt(r.total_weight_g)),
            ("iterations", r.iterations.to_string()),
            ("solve_time_s", r.solve_time_s.to_string()),
            ("support_size", r.entries.len().to_string()),
        ];
        for (metric, value) in rows {
            w.write_record([r.scenario.as_str(), metric, value.as_str()]).expect("writing to memory");
        }
        if let Some(e) = &r.error {
            w.write_record([r.scenario.as_str(), "error", e.as_str()]).expect("writing to memory");
        }
    }
    if let Some(mean) = mean_cost(records) {
        w.write_record(["mean", "total_cost", mean.to_string().as_str()]).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub fn render_compare_table(records: &[RunRecord]) -> String {
    let width = records.iter().map(|r| r.scenario.len()).max().unwrap_or(0).max(8);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:<10}  {:>14}  {:>16}  {:>10}  {:>12}",
        "scenario", "status", "cost", "weight (g)", "iterations", "time (s)"
    );
    for r in records {
        let _ = writeln!(
            out,
            "{:<width$}  {:<10}  {:>14}  {:>16}  {:>10}  {:>12.6}",
            r.scenario,
            r.status.as_str(),
            fixed(r.total_cost),
            fixed(r.total_weight_g),
            r.iterations,
            r.solve_time_s
        );
        if let Some(e) = &r.error {
            let _ = writeln!(out, "{:<width$}  error: {e}", "");
        }
    }
    let _ = writeln!(out, "mean cost: {}", fixed(mean_cost(records)));
    out
}

/// Parses `key=min:max`. Either side may be blank, not both.
pub fn parse_override(arg: &str) -> Result<(String, BoundOverride), String> {
    let (key, range) = arg
        .rsplit_once('=')
        .ok_or_else(|| format!("override {arg:?} is not of the form key=min:max"))?;
    let (min, max) = range
        .split_once(':')
        .ok_or_else(|| format!("override {arg:?} is not of the form key=min:max"))?;
    let side = |s: &str| -> Result<Option<f64>, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(None);
        }
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Some)
            .ok_or_else(|| format!("override {arg:?}: {s:?} is not a number"))
    };
    let key = key.trim();
    if key.is_empty() {
        return Err(format!("override {arg:?} has no nutrient key"));
    }
    Ok((
        key.to_string(),
        BoundOverride {
            min: side(min)?,
            max: side(max)?,
        },
    ))
}

/// A constraint the phase-one point fails, in source units.
#[derive(Debug, Clone, PartialEq)]
pub struct RowViolation {
    pub label: String,
    pub sense: Sense,
    pub activity: f64,
    pub rhs: f64,
    pub violation: f64,
}

/// The `limit` rows of `problem` most violated at the phase-one point of an
/// infeasible `solution`, ranked by violation relative to the row scale.
pub fn most_violated(problem: &LpProblem, solution: &Solution, limit: usize) -> Vec<RowViolation> {
    let x = &solution.weights;
    let mut rows: Vec<(f64, RowViolation)> = problem
        .constraints()
        .iter()
        .filter_map(|c| {
            let v = c.violation(x);
            (v / c.scale() > TOL_FEAS).then(|| {
                (
                    v / c.scale(),
                    RowViolation {
                        label: c.label.clone(),
                        sense: c.sense,
                        activity: c.activity(x),
                        rhs: c.rhs,
                        violation: v,
                    },
                )
            })
        })
        .collect();
    rows.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.label.cmp(&b.1.label)));
    rows.into_iter().take(limit).map(|(_, r)| r).collect()
}

pub fn render_infeasibility(solution: &Solution, rows: &[RowViolation]) -> String {
    let mut out = format!("infeasible: phase-one residual {:e}\n", solution.phase_one_residual);
    if rows.is_empty() {
        out.push_str("no individual bound is violated at the phase-one point\n");
    }
    for r in rows {
        let _ = writeln!(
            out,
            "  {}: {:.6} {} {} (off by {:.6})",
            r.label,
            r.activity,
            r.sense,
            r.rhs,
            r.violation
        );
    }
    out
}

fn kind_label(kind: ViolationKind) -> &'static str {
    match kind {
        ViolationKind::MinNutrient => "below minimum",
        ViolationKind::MaxNutrient => "above maximum",
        ViolationKind::Diversity => "diversity share exceeded",
        ViolationKind::NegativeWeight => "negative weight",
        ViolationKind::UnknownIngredient => "unknown ingredient",
    }
}

pub fn render_violations(report: &ViolationReport) -> String {
    if report.is_empty() {
        return "plan is feasible\n".into();
    }
    let mut out = format!("{} violation(s)\n", report.violations.len());
    for Violation {
        kind,
        subject,
        value,
        limit,
        slack,
    } in &report.violations
    {
        let _ = writeln!(
            out,
            "  {subject}: {} (value {value:.6}, limit {limit:.6}, slack {slack:.6})",
            kind_label(*kind)
        );
    }
    out
}
