mod common;

use common::{assert_certified, close, rng};
use mealsolve::diet::{build_lp, extract_plan, BoundOverride, DietLpSpec, DietPlan, ObjectiveMode};
use mealsolve::ingest::Catalog;
use mealsolve::lp::{solve, Sense, Status};
use mealsolve::oracle::{check_plan, enumerate_vertices, toy_catalog, OracleOutcome, ViolationKind, TOY_BOUNDS, TOY_NUTRITION, TOY_PRICES};
use mealsolve::scenarios::{preset, run_scenario, ScenarioId, ScenarioRun, VITAMIN_D};
use rand::Rng;

fn toy() -> Catalog {
    toy_catalog().unwrap().0
}

fn run(catalog: &Catalog, id: ScenarioId) -> ScenarioRun {
    run_scenario(catalog, &preset(id)).unwrap()
}

/// Totals recomputed straight from the catalog rows.
fn hand_totals(catalog: &Catalog, weights: &[f64]) -> (f64, f64) {
    let mut cost = 0.0;
    let mut weight = 0.0;
    for (i, ing) in catalog.ingredients.iter().enumerate() {
        cost += weights[i] * ing.price_per_gram;
        weight += weights[i];
    }
    (cost, weight)
}

#[test]
fn small_model_has_the_expected_rows() {
    let (catalog, _) = Catalog::from_csv_strs(
        "name,serving_size (g),iron (mg),vitamin_d (IU)\nA,1,1,0\nB,1,0,2\nC,1,2,1\n",
        "name,price_per_unit\nA,1\nB,2\nC,3\n",
        "nutrient,min_value,max_value\niron (mg),1,5\nvitamin_d (IU),2,4\n",
    )
    .unwrap();
    let lp = build_lp(&catalog, &DietLpSpec::default()).unwrap();
    assert_eq!(lp.variable_count(), 3);
    assert_eq!(lp.constraint_count(), 2 * 2 + 3);
    assert_eq!(lp.objective(), &[1.0, 2.0, 3.0]);
    let diversity = &lp.constraints()[4];
    assert_eq!(diversity.coeffs, vec![0.8, -0.2, -0.2]);
    assert_eq!((diversity.sense, diversity.rhs), (Sense::Le, 0.0));

    let loose = DietLpSpec {
        diversity_fraction: 1.0,
        ..Default::default()
    };
    assert_eq!(build_lp(&catalog, &loose).unwrap().constraint_count(), 4);
}

#[test]
fn vitamin_d_preset_moves_the_rhs() {
    let catalog = toy();
    let lp = build_lp(&catalog, &preset(ScenarioId::VitaminD).spec).unwrap();
    let rows: Vec<(Sense, f64)> = lp
        .constraints()
        .iter()
        .filter(|c| c.label.ends_with(VITAMIN_D))
        .map(|c| (c.sense, c.rhs))
        .collect();
    assert_eq!(rows, vec![(Sense::Ge, 6000.0), (Sense::Le, 10000.0)]);
}

#[test]
fn no_lower_bounds_gives_an_empty_plan() {
    let (catalog, _) = Catalog::from_csv_strs(
        "name,serving_size (g),iron (mg)\nA,1,1\nB,1,2\n",
        "name,price_per_unit\nA,1\nB,1\n",
        "nutrient,min_value,max_value\niron (mg),,5\n",
    )
    .unwrap();
    let lp = build_lp(&catalog, &DietLpSpec::default()).unwrap();
    let s = solve(&lp).unwrap();
    let plan = extract_plan(&catalog, &s).unwrap();
    assert!(plan.entries.is_empty());
    assert_eq!((plan.total_cost, plan.total_weight), (0.0, 0.0));
}

#[test]
fn every_preset_matches_vertex_enumeration() {
    let catalog = toy();
    for id in ScenarioId::ALL {
        let r = run(&catalog, id);
        let e = enumerate_vertices(&r.problem).unwrap();
        let OracleOutcome::Optimal { value, argmin } = e.outcome else {
            panic!("{id}: oracle says {:?}", e.outcome);
        };
        assert_eq!(r.status(), Status::Optimal, "{id}");
        assert!(close(r.solution.objective_value, value, 1e-6), "{id}");
        // one optimal vertex, so the weights themselves must agree
        assert_eq!(argmin.len(), 1, "{id}");
        for (a, b) in r.solution.weights.iter().zip(&argmin[0]) {
            assert!((a - b).abs() <= 1e-6, "{id}: {a} vs {b}");
        }
    }
}

#[test]
fn optimal_plans_are_certified_and_consistent() {
    let catalog = toy();
    for id in ScenarioId::ALL {
        let r = run(&catalog, id);
        assert_certified(&r.problem, &r.solution);
        let plan = r.plan.as_ref().unwrap();
        let (cost, weight) = hand_totals(&catalog, &r.solution.weights);
        assert!(close(plan.total_cost, cost, 1e-9), "{id}");
        assert!((plan.total_weight - weight).abs() <= 1e-6, "{id}");
        let listed: f64 = plan.entries.iter().map(|e| e.weight_g).sum();
        assert!((listed - plan.total_weight).abs() <= 1e-6 * catalog.len() as f64);
        for (k, total) in &plan.nutrient_totals {
            let direct: f64 = catalog
                .ingredients
                .iter()
                .zip(&r.solution.weights)
                .map(|(i, w)| i.nutrient(k) * w)
                .sum();
            assert!(close(*total, direct, 1e-6), "{id} {k}");
        }
        // the price objective rebuilt from scratch gives the same cost
        let rebuilt = build_lp(&catalog, &preset(id).spec).unwrap();
        assert!(close(rebuilt.objective_value(&r.solution.weights), plan.total_cost, 1e-9));
        assert!(check_plan(&catalog, &preset(id).spec, plan).is_empty(), "{id}");
    }
}

#[test]
fn diversity_forces_five_ingredients() {
    let catalog = toy();
    for id in ScenarioId::ALL {
        let plan = run(&catalog, id).plan.unwrap();
        assert!(plan.total_weight > 0.0);
        let support = plan.entries.iter().filter(|e| e.weight_g > 1e-6).count();
        assert!(support >= 5, "{id}: {support}");
    }
}

#[test]
fn deficiency_presets_cost_at_least_the_base_plan() {
    let catalog = toy();
    let base = run(&catalog, ScenarioId::Optimal).plan.unwrap().total_cost;
    for id in [ScenarioId::VitaminD, ScenarioId::Iron, ScenarioId::CalorieDeficit, ScenarioId::HighProtein] {
        let cost = run(&catalog, id).plan.unwrap().total_cost;
        assert!(cost >= base - 1e-9, "{id}: {cost} < {base}");
    }
}

#[test]
fn vitamin_d_needs_a_source() {
    // same catalog with every vitamin D cell zeroed and the base vitamin D
    // bound dropped
    let nutrition: String = TOY_NUTRITION
        .lines()
        .map(|l| match l.rsplit_once(',') {
            Some((rest, _)) if !l.starts_with(',') => format!("{rest},0\n"),
            _ => format!("{l}\n"),
        })
        .collect();
    let bounds: String = TOY_BOUNDS.lines().filter(|l| !l.starts_with(VITAMIN_D)).map(|l| format!("{l}\n")).collect();
    let (catalog, _) = Catalog::from_csv_strs(&nutrition, TOY_PRICES, &bounds).unwrap();
    assert!(catalog.ingredients.iter().all(|i| i.nutrient(VITAMIN_D) == 0.0));
    assert_eq!(run(&catalog, ScenarioId::Optimal).status(), Status::Optimal);
    assert_eq!(run(&catalog, ScenarioId::VitaminD).status(), Status::Infeasible);
}

#[test]
fn max_nutrient_stage_ignores_row_order() {
    let mut lines: Vec<&str> = TOY_NUTRITION.lines().collect();
    let header = lines.remove(0);
    lines.reverse();
    let reversed = format!("{header}\n{}\n", lines.join("\n"));
    let (flipped, _) = Catalog::from_csv_strs(&reversed, TOY_PRICES, TOY_BOUNDS).unwrap();
    let a = run(&toy(), ScenarioId::GodsDiet).primary_optimum.unwrap();
    let b = run(&flipped, ScenarioId::GodsDiet).primary_optimum.unwrap();
    assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} vs {b}");
}

#[test]
fn price_first_reproduces_the_base_plan() {
    let catalog = toy();
    let base = run(&catalog, ScenarioId::Optimal);
    let swapped = run_scenario(&catalog, &preset(ScenarioId::GodsDiet).with_swapped_priorities()).unwrap();
    assert_eq!(swapped.status(), Status::Optimal);
    for (a, b) in base.solution.weights.iter().zip(&swapped.solution.weights) {
        assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
    }
}

#[test]
fn nutrients_first_spends_more_for_more() {
    let catalog = toy();
    let base = run(&catalog, ScenarioId::Optimal).plan.unwrap();
    let god = run(&catalog, ScenarioId::GodsDiet);
    assert_eq!(preset(ScenarioId::GodsDiet).spec.objective_mode, ObjectiveMode::MaxNutrientsThenCost);
    let sum = |p: &DietPlan| p.nutrient_totals.values().sum::<f64>();
    let plan = god.plan.unwrap();
    assert!(sum(&plan) > sum(&base));
    assert!(plan.total_cost > base.total_cost);
}

#[test]
fn one_heavy_ingredient_breaks_diversity() {
    let catalog = toy();
    let spec = DietLpSpec::default();
    let mut plan = run(&catalog, ScenarioId::Optimal).plan.unwrap();
    // lift the first entry to 30% of the total
    let rest: f64 = plan.entries[1..].iter().map(|e| e.weight_g).sum();
    plan.entries[0].weight_g = 0.3 / 0.7 * rest;
    let report = check_plan(&catalog, &spec, &plan);
    let v = report.violations.iter().find(|v| v.kind == ViolationKind::Diversity).unwrap();
    assert_eq!(v.subject, plan.entries[0].name);
    assert!(v.slack < 0.0);
}

#[test]
fn halved_plan_misses_the_calorie_floor() {
    let catalog = toy();
    let spec = DietLpSpec {
        bound_overrides: [("calories (kcal)".to_string(), BoundOverride::both(1000.0, 1500.0))].into(),
        ..Default::default()
    };
    let mut plan = run_scenario(&catalog, &preset(ScenarioId::CalorieDeficit)).unwrap().plan.unwrap();
    for e in &mut plan.entries {
        e.weight_g *= 0.5;
    }
    let report = check_plan(&catalog, &spec, &plan);
    assert!(report
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::MinNutrient && v.subject == "calories (kcal)" && v.slack < 0.0));
    assert!(!report.has(ViolationKind::Diversity));
}

#[test]
fn plan_checker_agrees_with_the_model() {
    let catalog = toy();
    let optima: Vec<Vec<f64>> = ScenarioId::ALL.iter().map(|&id| run(&catalog, id).solution.weights).collect();
    let mut r = rng(3);
    let mut verdicts = [0usize; 2];
    for id in ScenarioId::ALL {
        let spec = preset(id).spec;
        let lp = build_lp(&catalog, &spec).unwrap();
        let model_ok = |w: &[f64]| {
            lp.constraints()
                .iter()
                .all(|c| c.violation(w) <= 1e-6 * c.rhs.abs().max(1.0))
        };
        // mixtures of plans feasible here stay feasible; jitter mostly breaks them
        let feasible: Vec<&Vec<f64>> = optima.iter().filter(|w| model_ok(w)).collect();
        for k in 0..200 {
            let w: Vec<f64> = if k % 2 == 0 {
                let a = feasible[r.gen_range(0..feasible.len())];
                let b = feasible[r.gen_range(0..feasible.len())];
                let t = r.gen_range(0.0..1.0);
                a.iter().zip(b).map(|(x, y)| t * x + (1.0 - t) * y).collect()
            } else {
                let a = feasible[r.gen_range(0..feasible.len())];
                a.iter().map(|x| x * r.gen_range(0.9..1.1) + r.gen_range(0.0..2.0)).collect()
            };
            let ok = model_ok(&w);
            let plan = DietPlan::from_weights(&catalog, &w).unwrap();
            assert_eq!(check_plan(&catalog, &spec, &plan).is_empty(), ok, "{id} {w:?}");
            verdicts[ok as usize] += 1;
        }
    }
    assert!(verdicts.iter().all(|&k| k >= 100), "{verdicts:?}");
}
