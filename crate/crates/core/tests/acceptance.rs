//! One line per acceptance criterion. Runs as a plain binary so the lines
//! show up in `cargo test` output; exits non-zero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{random_le_lp, rng, DUAL_TOL, GAP_TOL, PRIMAL_TOL};
use mealsolve::diet::{DietLpSpec, DiversityScope};
use mealsolve::ingest::{load_bounds, Catalog};
use mealsolve::lp::{certificate, solve, solve_with, LpProblem, PivotRule, Solution, SolveError, SolverOptions, Status};
use mealsolve::oracle::{enumerate_vertices, toy_catalog, OracleOutcome};
use mealsolve::scenarios::{preset, run_scenario, run_scenario_with, ScenarioId, ScenarioPreset, ScenarioRun};

type Outcome = Result<String, String>;

fn manifest(path: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(path)
}

/// Every optimal solve the suite performs, for the certificate criterion.
#[derive(Default)]
struct Certified {
    solves: Vec<(String, LpProblem, Solution)>,
}

impl Certified {
    fn record(&mut self, tag: impl Into<String>, problem: &LpProblem, solution: &Solution) {
        if solution.status == Status::Optimal {
            self.solves.push((tag.into(), problem.clone(), solution.clone()));
        }
    }

    fn run(&mut self, tag: &str, catalog: &Catalog, preset: &ScenarioPreset) -> ScenarioRun {
        let r = run_scenario(catalog, preset).expect("scenario runs");
        self.record(tag, &r.problem, &r.solution);
        r
    }
}

fn oracle_equivalence(cert: &mut Certified) -> Outcome {
    let started = Instant::now();
    let mut r = rng(2024);
    let (mut kept, mut discarded) = (0, 0);
    let mut failures = Vec::new();
    for k in 0..200 {
        let p = random_le_lp(&mut r);
        let e = match enumerate_vertices(&p) {
            Ok(e) if e.condition <= 1e10 => e,
            _ => {
                discarded += 1;
                continue;
            }
        };
        kept += 1;
        let s = solve(&p).map_err(|e| format!("instance {k}: {e}"))?;
        cert.record(format!("random #{k}"), &p, &s);
        let ok = match &e.outcome {
            OracleOutcome::Optimal { value, .. } => {
                s.status == Status::Optimal && (s.objective_value - value).abs() <= 1e-6
            }
            OracleOutcome::Infeasible => s.status == Status::Infeasible,
            OracleOutcome::Unbounded => s.status == Status::Unbounded,
        };
        if !ok {
            failures.push(format!("#{k}: solver {:?} {} vs oracle {:?}", s.status, s.objective_value, e.outcome.value()));
        }
    }
    let elapsed = started.elapsed();
    let detail = format!(
        "{kept} compared, {discarded} discarded ({:.1}%), {:.2}s",
        100.0 * discarded as f64 / 200.0,
        elapsed.as_secs_f64()
    );
    if !failures.is_empty() {
        return Err(format!("{detail}; mismatches: {}", failures.join("; ")));
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("{detail}; over the 10 s budget"));
    }
    Ok(detail)
}

fn anti_cycling(cert: &mut Certified) -> Outcome {
    let mut parts = Vec::new();
    for (name, p) in [("Beale", common::beale()), ("Chvatal", common::chvatal())] {
        let dantzig = SolverOptions {
            pivot_rule: PivotRule::DantzigOnly,
            max_iterations: 1000,
            ..Default::default()
        };
        match solve_with(&p, &dantzig) {
            Err(SolveError::IterationLimit { .. }) => {}
            other => return Err(format!("{name}: Dantzig-only did not cycle: {other:?}")),
        }
        let s = solve(&p).map_err(|e| format!("{name}: {e}"))?;
        cert.record(name, &p, &s);
        if s.status != Status::Optimal || s.iterations >= 1000 || !s.used_bland {
            return Err(format!("{name}: {:?} after {} iterations", s.status, s.iterations));
        }
        parts.push(format!("{name} cycles under Dantzig, optimal {} in {} iterations with fallback", s.objective_value, s.iterations));
    }
    Ok(parts.join("; "))
}

/// Catalogs with random nutrient data; feasible ones feed the support check.
fn random_catalog(seed: u64) -> Catalog {
    use rand::Rng;
    let mut r = rng(seed);
    let n = r.gen_range(5..12);
    let mut nutrition = String::from("name,serving_size (g),a (g),b (mg),c (IU)\n");
    let mut prices = String::from("name,price_per_unit\n");
    for i in 0..n {
        nutrition.push_str(&format!(
            "food {i},100,{},{},{}\n",
            r.gen_range(0..400),
            r.gen_range(0..60),
            r.gen_range(0..900)
        ));
        prices.push_str(&format!("food {i},{}\n", r.gen_range(1..50) as f64 / 1000.0));
    }
    let bounds = format!(
        "nutrient,min_value,max_value\na (g),{},\nb (mg),{},{}\nc (IU),{},\n",
        r.gen_range(100..1000),
        r.gen_range(10..50),
        r.gen_range(100..400),
        r.gen_range(0..500)
    );
    Catalog::from_csv_strs(&nutrition, &prices, &bounds).unwrap().0
}

fn diversity_support(cert: &mut Certified, toy: &Catalog) -> Outcome {
    let mut plans = 0;
    let mut smallest = usize::MAX;
    let mut check = |tag: String, r: &ScenarioRun| -> Result<(), String> {
        if let Some(plan) = &r.plan {
            if plan.total_weight > 0.0 {
                let support = plan.entries.iter().filter(|e| e.weight_g > 1e-6).count();
                smallest = smallest.min(support);
                plans += 1;
                if support < 5 {
                    return Err(format!("{tag}: only {support} ingredients"));
                }
            }
        }
        Ok(())
    };
    for id in ScenarioId::ALL {
        let r = cert.run(id.as_str(), toy, &preset(id));
        check(id.to_string(), &r)?;
    }
    let swapped = cert.run("gods_diet swapped", toy, &preset(ScenarioId::GodsDiet).with_swapped_priorities());
    check("gods_diet swapped".into(), &swapped)?;
    for seed in 0..60 {
        let catalog = random_catalog(seed);
        for id in [ScenarioId::Optimal, ScenarioId::GodsDiet] {
            let mut p = preset(id);
            p.spec = DietLpSpec {
                objective_mode: p.spec.objective_mode,
                ..Default::default()
            };
            let r = run_scenario_with(&catalog, &p, &SolverOptions::default()).map_err(|e| e.to_string())?;
            cert.record(format!("random catalog {seed} {id}"), &r.problem, &r.solution);
            check(format!("random catalog {seed} {id}"), &r)?;
        }
    }
    Ok(format!("{plans} optimal plans with f = 1/5, smallest support {smallest}"))
}

fn certificate_suite(cert: &Certified) -> Outcome {
    let mut worst = [0.0f64; 3];
    for (tag, p, s) in &cert.solves {
        let r = certificate(p, s).map_err(|e| format!("{tag}: {e}"))?;
        if r.duality_gap > GAP_TOL || r.primal_violation > PRIMAL_TOL || r.dual_violation > DUAL_TOL {
            return Err(format!("{tag}: {r:?}"));
        }
        worst[0] = worst[0].max(r.duality_gap);
        worst[1] = worst[1].max(r.primal_violation);
        worst[2] = worst[2].max(r.dual_violation);
    }
    Ok(format!(
        "{} optimal solves; worst gap {:.1e}, primal {:.1e}, dual {:.1e}",
        cert.solves.len(),
        worst[0],
        worst[1],
        worst[2]
    ))
}

fn monotonicity(toy: &Catalog) -> Outcome {
    let cost = |id| {
        run_scenario(toy, &preset(id))
            .ok()
            .and_then(|r| r.plan)
            .map(|p| p.total_cost)
            .ok_or_else(|| format!("{id} not optimal"))
    };
    let base = cost(ScenarioId::Optimal)?;
    let mut parts = vec![format!("optimal {base:.6}")];
    for id in [ScenarioId::VitaminD, ScenarioId::Iron, ScenarioId::CalorieDeficit, ScenarioId::HighProtein] {
        let c = cost(id)?;
        if c < base - 1e-9 {
            return Err(format!("{id} costs {c} < optimal {base}"));
        }
        parts.push(format!("{id} {c:.6}"));
    }
    Ok(parts.join(", "))
}

fn lexicographic_swap(toy: &Catalog) -> Outcome {
    let base = run_scenario(toy, &preset(ScenarioId::Optimal)).map_err(|e| e.to_string())?;
    let swapped = run_scenario(toy, &preset(ScenarioId::GodsDiet).with_swapped_priorities()).map_err(|e| e.to_string())?;
    if swapped.status() != Status::Optimal {
        return Err(format!("swapped gods_diet is {:?}", swapped.status()));
    }
    let diff = base
        .solution
        .weights
        .iter()
        .zip(&swapped.solution.weights)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if diff > 1e-6 {
        return Err(format!("max weight difference {diff:.3e} g"));
    }
    Ok(format!("max weight difference {diff:.3e} g"))
}

const REFERENCE_BOUNDS: [(&str, f64, f64); 24] = [
    ("total_fat (g)", 44.0, 78.0),
    ("saturated_fat (g)", 0.0, 13.0),
    ("cholesterol (mg)", 0.0, 200.0),
    ("sodium (mg)", 500.0, 2000.0),
    ("choline (mg)", 10.0, 450.0),
    ("folate (mcg)", 400.0, 1000.0),
    ("folic_acid (mcg)", 400.0, 1000.0),
    ("niacin (mg)", 16.0, 35.0),
    ("pantothenic_acid (mg)", 5.0, 1000.0),
    ("riboflavin (mg)", 1.3, 1000.0),
    ("thiamin (mg)", 1.3, 1000.0),
    ("vitamin_a (IU)", 3000.0, 10000.0),
    ("vitamin_a_rae (mcg)", 900.0, 3000.0),
    ("carotene_alpha (mcg)", 0.0, 300000.0),
    ("carotene_beta (mcg)", 0.0, 300000.0),
    ("cryptoxanthin_beta (mcg)", 0.0, 300000.0),
    ("lutein_zeaxanthin (mcg)", 2.0, 10.0),
    ("vitamin_b12 (mg)", 2.4, 100.0),
    ("vitamin_b6 (mg)", 1.3, 100.0),
    ("vitamin_c (mg)", 75.0, 2000.0),
    ("vitamin_d (IU)", 600.0, 4000.0),
    ("vitamin_e (mg)", 15.0, 1000.0),
    ("tocopherol_alpha (mg)", 15.0, 1000.0),
    ("vitamin_k (mcg)", 90.0, 10000.0),
];

fn bounds_fidelity() -> Outcome {
    let bounds = load_bounds(manifest("data/reference/nutrient_bounds.csv")).map_err(|e| e.to_string())?;
    if bounds.len() != REFERENCE_BOUNDS.len() {
        return Err(format!("{} bounds loaded, expected {}", bounds.len(), REFERENCE_BOUNDS.len()));
    }
    for (key, min, max) in REFERENCE_BOUNDS {
        let b = bounds.iter().find(|b| b.key == key).ok_or_else(|| format!("{key} missing"))?;
        if b.min_value != Some(min) || b.max_value != Some(max) {
            return Err(format!("{key}: got ({:?}, {:?})", b.min_value, b.max_value));
        }
    }
    Ok("24 nutrients, (min, max) exact".into())
}

/// Runs only when MEALSOLVE_FULL_NUTRITION and MEALSOLVE_FULL_PRICES name the
/// dataset files. MEALSOLVE_FULL_BOUNDS defaults to the reference table.
fn full_dataset() -> Option<Outcome> {
    let nutrition = std::env::var_os("MEALSOLVE_FULL_NUTRITION")?;
    let prices = std::env::var_os("MEALSOLVE_FULL_PRICES")?;
    let bounds = std::env::var_os("MEALSOLVE_FULL_BOUNDS")
        .map(PathBuf::from)
        .unwrap_or_else(|| manifest("data/reference/nutrient_bounds.csv"));
    Some((|| {
        let started = Instant::now();
        let (catalog, _) = Catalog::load(&nutrition, &prices, &bounds).map_err(|e| e.to_string())?;
        let mut p = preset(ScenarioId::Optimal);
        if std::env::var_os("MEALSOLVE_FULL_PRICED_ONLY").is_some() {
            p.spec.diversity_scope = DiversityScope::PricedOnly;
        }
        let r = run_scenario(&catalog, &p).map_err(|e| e.to_string())?;
        let plan = r.plan.as_ref().ok_or_else(|| format!("status {:?}", r.status()))?;
        let c = certificate(&r.problem, &r.solution).map_err(|e| e.to_string())?;
        if !c.passes() {
            return Err(format!("certificate {c:?}"));
        }
        let support = plan.entries.iter().filter(|e| e.weight_g > 1e-6).count();
        if plan.total_weight > 0.0 && support < 5 {
            return Err(format!("support {support}"));
        }
        let elapsed = started.elapsed();
        if elapsed > Duration::from_secs(600) {
            return Err(format!("{:.0}s, over the 10 minute budget", elapsed.as_secs_f64()));
        }
        Ok(format!(
            "{} ingredients, support {support}, {} iterations, {:.1}s",
            catalog.len(),
            r.solution.iterations,
            elapsed.as_secs_f64()
        ))
    })())
}

fn cli_determinism() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_mealsolve"))
            .args(["solve", "--scenario", "gods_diet", "--format", "json", "--no-timestamp"])
            .args(["--nutrition", manifest("data/toy/nutrition.csv").to_str().unwrap()])
            .args(["--prices", manifest("data/toy/prices.csv").to_str().unwrap()])
            .args(["--bounds", manifest("data/toy/bounds.csv").to_str().unwrap()])
            .output()
            .map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    if !a.status.success() {
        return Err(String::from_utf8_lossy(&a.stderr).into_owned());
    }
    if a.stdout != b.stdout {
        return Err("outputs differ".into());
    }
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn main() {
    let toy = toy_catalog().expect("toy catalog loads").0;
    let mut cert = Certified::default();

    let oracle = oracle_equivalence(&mut cert);
    let cycling = anti_cycling(&mut cert);
    let support = diversity_support(&mut cert, &toy);
    // after every solve above has been recorded
    let certificates = certificate_suite(&cert);
    let results: Vec<(&str, Option<Outcome>)> = vec![
        ("oracle equivalence", Some(oracle)),
        ("certificate suite", Some(certificates)),
        ("anti-cycling", Some(cycling)),
        ("diversity support", Some(support)),
        ("scenario monotonicity", Some(monotonicity(&toy))),
        ("lexicographic consistency", Some(lexicographic_swap(&toy))),
        ("bounds-file fidelity", Some(bounds_fidelity())),
        ("full-dataset smoke test", full_dataset()),
        ("CLI determinism", Some(cli_determinism())),
    ];

    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Some(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Some(Err(detail)) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
            None => println!("SKIP  {name}: set MEALSOLVE_FULL_NUTRITION and MEALSOLVE_FULL_PRICES to run"),
        }
    }
    if failed > 0 {
        println!("{failed} criterion/criteria failed");
        std::process::exit(1);
    }
}
