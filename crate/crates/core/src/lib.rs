//! Least-cost meal planning as a linear program.
//!
//! [`ingest`] reads nutrition, price and bound tables into a [`ingest::Catalog`];
//! [`diet`] turns a catalog into an [`lp::LpProblem`]; [`lp`] solves it with a
//! two-phase revised simplex; [`scenarios`] holds the six presets; [`oracle`]
//! checks answers independently of the solver.
//!
//! ```
//! use mealsolve::oracle::{check_plan, toy_catalog};
//! use mealsolve::scenarios::{preset, run_scenario, ScenarioId};
//!
//! let (catalog, _) = toy_catalog()?;
//! let chosen = preset(ScenarioId::VitaminD);
//! let run = run_scenario(&catalog, &chosen)?;
//! let plan = run.plan.expect("feasible");
//! assert!(check_plan(&catalog, &chosen.spec, &plan).is_empty());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod diet;
pub mod ingest;
pub mod lp;
pub mod oracle;
pub mod report;
pub mod scenarios;

#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $file:literal) => {
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            mod $name {}
        };
    }
    chapter!(introduction, "introduction.md");
    chapter!(linear_programs, "linear-programs.md");
    chapter!(simplex, "simplex.md");
    chapter!(diet_model, "diet-model.md");
    chapter!(scenarios, "scenarios.md");
    chapter!(verification, "verification.md");
    chapter!(cli, "cli.md");
}
