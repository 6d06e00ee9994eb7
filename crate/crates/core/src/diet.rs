//! Turning a [`Catalog`] into a diet linear program and reading plans back.
//!
//! Variables are grams of each catalog ingredient, in catalog order. Rows, in
//! order:
//!
//! 1. for each bounded nutrient `k`: `Σ_i W_i·N_ik ≥ min_k` and/or
//!    `Σ_i W_i·N_ik ≤ max_k`;
//! 2. for each ingredient `i`: `W_i − f·Σ_j W_j ≤ 0`, i.e. no ingredient is
//!    more than a fraction `f` of the meal's weight.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Catalog;
use crate::lp::{LpProblem, ProblemError, Sense, Solution, Status};

/// Weights at or below this many grams are treated as not selected.
pub const DISPLAY_THRESHOLD: f64 = 1e-6;
/// No ingredient may exceed a fifth of total weight.
pub const DEFAULT_DIVERSITY_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("the catalog has no ingredients")]
    EmptyCatalog,
    #[error("diversity fraction must lie in (0, 1], got {0}")]
    DiversityFraction(f64),
    #[error("override for unknown nutrient {0:?}")]
    UnknownOverride(String),
    #[error("bound for {key:?} after overrides is empty: min {min} > max {max}")]
    OverrideRange { key: String, min: f64, max: f64 },
    #[error("override for {0:?} sets neither side")]
    EmptyOverride(String),
    #[error("a plan needs an optimal solution, got {0}")]
    NotOptimal(Status),
    #[error("solution has {found} weights, catalog has {expected} ingredients")]
    WeightCount { expected: usize, found: usize },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveMode {
    /// Minimize total price.
    CostMin,
    /// Maximize the raw sum of every nutrient amount, then minimize price.
    MaxNutrientsThenCost,
    /// The same two objectives with priorities swapped.
    CostThenMaxNutrients,
}

/// Which ingredients get a diversity row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiversityScope {
    #[default]
    AllIngredients,
    /// Only ingredients with a positive price. Shrinks the model; for
    /// experiments only.
    PricedOnly,
}

/// Replacement range for one nutrient. A `None` side keeps the catalog's
/// value for that side.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundOverride {
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl BoundOverride {
    pub fn both(min: f64, max: f64) -> Self {
        Self {
            min: Some(min),
            max: Some(max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DietLpSpec {
    pub diversity_fraction: f64,
    pub bound_overrides: BTreeMap<String, BoundOverride>,
    pub objective_mode: ObjectiveMode,
    pub diversity_scope: DiversityScope,
}

impl Default for DietLpSpec {
    fn default() -> Self {
        Self {
            diversity_fraction: DEFAULT_DIVERSITY_FRACTION,
            bound_overrides: BTreeMap::new(),
            objective_mode: ObjectiveMode::CostMin,
            diversity_scope: DiversityScope::AllIngredients,
        }
    }
}

/// A nutrient range after overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveBound {
    pub key: String,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl DietLpSpec {
    pub fn validate(&self, catalog: &Catalog) -> Result<(), ModelError> {
        let f = self.diversity_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(ModelError::DiversityFraction(f));
        }
        for (key, o) in &self.bound_overrides {
            if !catalog.nutrient_keys.contains(key) {
                return Err(ModelError::UnknownOverride(key.clone()));
            }
            if o.min.is_none() && o.max.is_none() {
                return Err(ModelError::EmptyOverride(key.clone()));
            }
        }
        Ok(())
    }

    /// Catalog bounds with overrides applied, catalog order first, then any
    /// overridden nutrients the catalog leaves unbounded.
    pub fn effective_bounds(&self, catalog: &Catalog) -> Result<Vec<EffectiveBound>, ModelError> {
        self.validate(catalog)?;
        let mut out: Vec<EffectiveBound> = catalog
            .bounds
            .iter()
            .map(|b| EffectiveBound {
                key: b.key.clone(),
                min: b.min_value,
                max: b.max_value,
            })
            .collect();
        for (key, o) in &self.bound_overrides {
            let slot = match out.iter().position(|b| &b.key == key) {
                Some(i) => &mut out[i],
                None => {
                    out.push(EffectiveBound {
                        key: key.clone(),
                        min: None,
                        max: None,
                    });
                    out.last_mut().unwrap()
                }
            };
            if o.min.is_some() {
                slot.min = o.min;
            }
            if o.max.is_some() {
                slot.max = o.max;
            }
        }
        for b in &out {
            if let (Some(min), Some(max)) = (b.min, b.max) {
                if min > max {
                    return Err(ModelError::OverrideRange {
                        key: b.key.clone(),
                        min,
                        max,
                    });
                }
            }
        }
        Ok(out)
    }
}

pub fn price_vector(catalog: &Catalog) -> Vec<f64> {
    catalog.ingredients.iter().map(|i| i.price_per_gram).collect()
}

/// Per-gram sum of every nutrient column, units mixed as they come.
pub fn nutrient_sum_vector(catalog: &Catalog) -> Vec<f64> {
    catalog
        .ingredients
        .iter()
        .map(|i| catalog.nutrient_keys.iter().map(|k| i.nutrient(k)).sum())
        .collect()
}

/// Builds the diet LP. The objective is always the price vector; the
/// lexicographic modes replace it per stage.
pub fn build_lp(catalog: &Catalog, spec: &DietLpSpec) -> Result<LpProblem, ModelError> {
    if catalog.is_empty() {
        return Err(ModelError::EmptyCatalog);
    }
    let bounds = spec.effective_bounds(catalog)?;
    let names = catalog.ingredients.iter().map(|i| i.name.clone()).collect();
    let mut lp = LpProblem::new(names, price_vector(catalog))?;

    for b in &bounds {
        let row: Vec<f64> = catalog.ingredients.iter().map(|i| i.nutrient(&b.key)).collect();
        if let Some(min) = b.min {
            lp.add_constraint(format!("min {}", b.key), row.clone(), Sense::Ge, min)?;
        }
        if let Some(max) = b.max {
            lp.add_constraint(format!("max {}", b.key), row, Sense::Le, max)?;
        }
    }

    let f = spec.diversity_fraction;
    // with f = 1 every row reads -Σ_{j≠i} W_j ≤ 0, which x ≥ 0 already implies
    if f < 1.0 {
        let n = catalog.len();
        for (i, ing) in catalog.ingredients.iter().enumerate() {
            if spec.diversity_scope == DiversityScope::PricedOnly && ing.price_per_gram <= 0.0 {
                continue;
            }
            let mut row = vec![-f; n];
            row[i] = 1.0 - f;
            lp.add_constraint(format!("diversity {}", ing.name), row, Sense::Le, 0.0)?;
        }
    }
    Ok(lp)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEntry {
    pub id: usize,
    pub name: String,
    pub weight_g: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DietPlan {
    /// Ingredients above [`DISPLAY_THRESHOLD`], ascending by id.
    pub entries: Vec<PlanEntry>,
    pub total_cost: f64,
    pub total_weight: f64,
    pub nutrient_totals: BTreeMap<String, f64>,
}

impl DietPlan {
    /// Totals come from the full weight vector, not only the listed entries.
    pub fn from_weights(catalog: &Catalog, weights: &[f64]) -> Result<Self, ModelError> {
        if weights.len() != catalog.len() {
            return Err(ModelError::WeightCount {
                expected: catalog.len(),
                found: weights.len(),
            });
        }
        let mut entries: Vec<PlanEntry> = catalog
            .ingredients
            .iter()
            .zip(weights)
            .filter(|(_, &w)| w > DISPLAY_THRESHOLD)
            .map(|(ing, &w)| PlanEntry {
                id: ing.id,
                name: ing.name.clone(),
                weight_g: w,
            })
            .collect();
        entries.sort_by_key(|e| e.id);

        let total_weight = weights.iter().sum();
        let total_cost = catalog
            .ingredients
            .iter()
            .zip(weights)
            .map(|(i, w)| i.price_per_gram * w)
            .sum();
        let nutrient_totals = catalog
            .nutrient_keys
            .iter()
            .map(|k| {
                let total = catalog.ingredients.iter().zip(weights).map(|(i, w)| i.nutrient(k) * w).sum();
                (k.clone(), total)
            })
            .collect();
        Ok(Self {
            entries,
            total_cost,
            total_weight,
            nutrient_totals,
        })
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }
}

pub fn extract_plan(catalog: &Catalog, solution: &Solution) -> Result<DietPlan, ModelError> {
    if solution.status != Status::Optimal {
        return Err(ModelError::NotOptimal(solution.status));
    }
    DietPlan::from_weights(catalog, &solution.weights)
}
