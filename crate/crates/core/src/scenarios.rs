//! The six meal-planning presets and running them against a catalog.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::diet::{
    build_lp, extract_plan, nutrient_sum_vector, price_vector, BoundOverride, DietLpSpec, DietPlan, ModelError,
    ObjectiveMode,
};
use crate::ingest::Catalog;
use crate::lp::{
    solve_lexicographic_with, solve_with, LexicographicError, LexicographicSpec, LpProblem, Objective, Solution,
    SolveError, SolverOptions, Status,
};

pub const VITAMIN_D: &str = "vitamin_d (IU)";
pub const IRON: &str = "iron (mg)";
pub const CALORIES: &str = "calories (kcal)";
pub const PROTEIN: &str = "protein (g)";

/// Stage-two slack when nutrients come first: `1e-6·|z1| + 1e-9`.
pub const LEX_RELATIVE_DEGRADATION: f64 = 1e-6;
pub const LEX_ABSOLUTE_DEGRADATION: f64 = 1e-9;
/// Relative slack when price comes first. Any relative slack on cost lets the
/// nutrient objective pull the plan ~1e-4 g off the cost-min vertex, so only
/// the absolute `1e-9` applies.
pub const LEX_COST_FIRST_RELATIVE_DEGRADATION: f64 = 0.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    Optimal,
    VitaminD,
    Iron,
    CalorieDeficit,
    HighProtein,
    GodsDiet,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 6] = [
        ScenarioId::Optimal,
        ScenarioId::VitaminD,
        ScenarioId::Iron,
        ScenarioId::CalorieDeficit,
        ScenarioId::HighProtein,
        ScenarioId::GodsDiet,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioId::Optimal => "optimal",
            ScenarioId::VitaminD => "vitamin_d",
            ScenarioId::Iron => "iron",
            ScenarioId::CalorieDeficit => "calorie_deficit",
            ScenarioId::HighProtein => "high_protein",
            ScenarioId::GodsDiet => "gods_diet",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = ScenarioError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|id| id.as_str() == s.trim())
            .ok_or_else(|| ScenarioError::Unknown(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0:?} (expected one of optimal, vitamin_d, iron, calorie_deficit, high_protein, gods_diet)")]
    Unknown(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Lexicographic(#[from] LexicographicError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioPreset {
    pub id: ScenarioId,
    pub description: &'static str,
    pub spec: DietLpSpec,
}

impl ScenarioPreset {
    /// The hierarchical preset with price as the primary objective instead.
    pub fn with_swapped_priorities(mut self) -> Self {
        self.spec.objective_mode = match self.spec.objective_mode {
            ObjectiveMode::MaxNutrientsThenCost => ObjectiveMode::CostThenMaxNutrients,
            ObjectiveMode::CostThenMaxNutrients => ObjectiveMode::MaxNutrientsThenCost,
            ObjectiveMode::CostMin => ObjectiveMode::CostMin,
        };
        self
    }
}

pub fn preset(id: ScenarioId) -> ScenarioPreset {
    let mut spec = DietLpSpec::default();
    let mut set = |key: &str, min: f64, max: f64| {
        spec.bound_overrides.insert(key.to_string(), BoundOverride::both(min, max));
    };
    let description = match id {
        ScenarioId::Optimal => "cheapest plan meeting every nutrient bound",
        ScenarioId::VitaminD => {
            set(VITAMIN_D, 6000.0, 10000.0);
            "vitamin D deficiency: 6000-10000 IU per day"
        }
        ScenarioId::Iron => {
            set(IRON, 80.0, 100.0);
            "iron deficiency anaemia: 80-100 mg iron per day"
        }
        ScenarioId::CalorieDeficit => {
            set(CALORIES, 1000.0, 1500.0);
            "calorie deficit: 1000-1500 kcal per day"
        }
        ScenarioId::HighProtein => {
            set(PROTEIN, 128.0, 184.8);
            "high protein: 128-184.8 g protein per day"
        }
        ScenarioId::GodsDiet => {
            spec.objective_mode = ObjectiveMode::MaxNutrientsThenCost;
            "maxed-out diet: most total nutrients within bounds, then cheapest"
        }
    };
    ScenarioPreset { id, description, spec }
}

pub fn preset_by_name(name: &str) -> Result<ScenarioPreset, ScenarioError> {
    Ok(preset(name.parse()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioRun {
    pub id: ScenarioId,
    /// The problem `solution` solves. For hierarchical presets this is the
    /// stage-two problem, so its duals certify against it.
    pub problem: LpProblem,
    pub solution: Solution,
    /// Present when the solve is optimal.
    pub plan: Option<DietPlan>,
    /// Stage-one optimum for hierarchical presets.
    pub primary_optimum: Option<f64>,
}

impl ScenarioRun {
    pub fn status(&self) -> Status {
        self.solution.status
    }
}

pub fn run_scenario(catalog: &Catalog, preset: &ScenarioPreset) -> Result<ScenarioRun, ScenarioError> {
    run_scenario_with(catalog, preset, &SolverOptions::default())
}

pub fn run_scenario_with(
    catalog: &Catalog,
    preset: &ScenarioPreset,
    options: &SolverOptions,
) -> Result<ScenarioRun, ScenarioError> {
    let lp = build_lp(catalog, &preset.spec)?;
    let hierarchical = |primary: Objective, secondary: Objective, relative: f64| LexicographicSpec {
        primary,
        secondary,
        degradation_tolerance: LEX_ABSOLUTE_DEGRADATION,
        relative_degradation: relative,
    };
    let (problem, solution, primary_optimum) = match preset.spec.objective_mode {
        ObjectiveMode::CostMin => {
            let solution = solve_with(&lp, options)?;
            (lp, solution, None)
        }
        mode => {
            let nutrients = Objective::maximize(nutrient_sum_vector(catalog));
            let cost = Objective::minimize(price_vector(catalog));
            let spec = if mode == ObjectiveMode::MaxNutrientsThenCost {
                hierarchical(nutrients, cost, LEX_RELATIVE_DEGRADATION)
            } else {
                hierarchical(cost, nutrients, LEX_COST_FIRST_RELATIVE_DEGRADATION)
            };
            let out = solve_lexicographic_with(&lp, &spec, options)?;
            let problem = match out.stage_two_problem {
                Some(p) => p,
                None => lp.with_replaced_objective(spec.primary.as_minimization()).map_err(ModelError::from)?,
            };
            (problem, out.solution, out.primary_optimum)
        }
    };
    let plan = match solution.status {
        Status::Optimal => Some(extract_plan(catalog, &solution)?),
        _ => None,
    };
    Ok(ScenarioRun {
        id: preset.id,
        problem,
        solution,
        plan,
        primary_optimum,
    })
}
