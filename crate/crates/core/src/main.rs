use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use mealsolve::diet::{BoundOverride, DietLpSpec};
use mealsolve::ingest::Catalog;
use mealsolve::oracle::{check_plan, ViolationKind};
use mealsolve::report::{
    self, most_violated, parse_override, render_compare_csv, render_compare_table, render_infeasibility,
    render_json, render_plan_csv, render_table, render_violations, RunRecord, RunStatus, EXIT_INFEASIBLE,
    EXIT_INPUT, EXIT_OK,
};
use mealsolve::scenarios::{preset, run_scenario, ScenarioId, ScenarioPreset};

/// Least-cost and nutrient-maximizing meal plans from ingredient tables.
#[derive(Parser)]
#[command(name = "mealsolve", version)]
struct Cli {
    /// Log solver progress to stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the plan.
    Solve(SolveArgs),
    /// Solve several scenarios and tabulate cost, weight, iterations and time.
    Compare(CompareArgs),
    /// Check a saved plan JSON against the bounds and the diversity rule.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Nutrition facts CSV.
    #[arg(long)]
    nutrition: PathBuf,
    /// Prices CSV (`name,price_per_unit`, currency per gram).
    #[arg(long)]
    prices: PathBuf,
    /// Nutrient bounds CSV (`nutrient,min_value,max_value`).
    #[arg(long)]
    bounds: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Largest share of the total weight any one ingredient may take.
    #[arg(long, value_name = "F")]
    diversity_fraction: Option<f64>,
    /// Replace a nutrient range, e.g. "iron (mg)=80:100". Either side may be blank.
    #[arg(long = "override", value_name = "KEY=MIN:MAX", value_parser = parse_override)]
    overrides: Vec<(String, BoundOverride)>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value = "optimal")]
    scenario: ScenarioId,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Write the result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Leave out the timestamp and measured solve time so output is reproducible.
    #[arg(long)]
    no_timestamp: bool,
    /// For two-objective scenarios, optimize the secondary objective first.
    #[arg(long)]
    swap_priorities: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `all` or a comma-separated list of scenario ids.
    #[arg(long, default_value = "all")]
    scenarios: String,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Plan JSON as written by `solve --format json`.
    #[arg(long)]
    plan: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
}

/// Error that ends the process with a message and exit code.
struct Failure(i32, String);

impl Failure {
    fn input(msg: impl ToString) -> Self {
        Failure(EXIT_INPUT, msg.to_string())
    }
}

fn main() -> ExitCode {
    // clap's own usage-error code is 2, which here means infeasible
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { EXIT_OK as u8 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let result = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Compare(args) => compare(args),
        Command::Validate(args) => validate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code as u8)
        }
    }
}

fn load(data: &DataArgs) -> Result<Catalog, Failure> {
    let (catalog, report) = Catalog::load(&data.nutrition, &data.prices, &data.bounds).map_err(Failure::input)?;
    info!("loaded {} priced ingredients", catalog.len());
    for line in report.load.lines() {
        warn!("{line}");
    }
    if !report.join.unpriced.is_empty() {
        warn!("{} ingredient(s) without a price left out", report.join.unpriced.len());
    }
    if !report.join.unmatched_prices.is_empty() {
        warn!("{} price row(s) match no ingredient", report.join.unmatched_prices.len());
    }
    Ok(catalog)
}

/// Layers command-line overrides and the diversity fraction onto `spec`.
fn customize(mut spec: DietLpSpec, model: &ModelArgs) -> DietLpSpec {
    if let Some(f) = model.diversity_fraction {
        spec.diversity_fraction = f;
    }
    for (key, o) in &model.overrides {
        let entry = spec.bound_overrides.entry(key.clone()).or_default();
        if o.min.is_some() {
            entry.min = o.min;
        }
        if o.max.is_some() {
            entry.max = o.max;
        }
    }
    spec
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(args: SolveArgs) -> Result<i32, Failure> {
    let catalog = load(&args.data)?;
    let mut chosen = preset(args.scenario);
    if args.swap_priorities {
        chosen = chosen.with_swapped_priorities();
    }
    chosen.spec = customize(chosen.spec, &args.model);
    let run = run_scenario(&catalog, &chosen).map_err(Failure::input)?;

    let mut record = RunRecord::from_run(args.scenario.as_str(), &run);
    if args.no_timestamp {
        record = record.without_clock();
    }
    let text = match args.format {
        Format::Table => render_table(&record),
        Format::Json => render_json(&record),
        Format::Csv => render_plan_csv(&record),
    };
    emit(args.out.as_deref(), &text)?;

    match record.status {
        RunStatus::Infeasible => {
            let rows = most_violated(&run.problem, &run.solution, 5);
            eprint!("{}", render_infeasibility(&run.solution, &rows));
        }
        RunStatus::Unbounded => eprintln!("unbounded: the objective decreases without limit"),
        _ => {}
    }
    Ok(record.status.exit_code())
}

fn requested(list: &str) -> Result<Vec<ScenarioId>, Failure> {
    if list.trim() == "all" {
        return Ok(ScenarioId::ALL.to_vec());
    }
    list.split(',').map(|s| s.parse().map_err(Failure::input)).collect()
}

fn compare(args: CompareArgs) -> Result<i32, Failure> {
    let catalog = load(&args.data)?;
    let ids = requested(&args.scenarios)?;
    let presets: Vec<ScenarioPreset> = ids
        .iter()
        .map(|&id| {
            let mut p = preset(id);
            p.spec = customize(p.spec, &args.model);
            p
        })
        .collect();

    let records: Vec<RunRecord> = std::thread::scope(|scope| {
        let handles: Vec<_> = presets
            .iter()
            .map(|p| {
                let catalog = &catalog;
                scope.spawn(move || match run_scenario(catalog, p) {
                    Ok(run) => RunRecord::from_run(p.id.as_str(), &run),
                    Err(e) => RunRecord::failed(p.id.as_str(), e),
                })
            })
            .collect();
        handles
            .into_iter()
            .zip(&presets)
            .map(|(h, p)| {
                h.join()
                    .unwrap_or_else(|_| RunRecord::failed(p.id.as_str(), "solver thread panicked"))
            })
            .collect()
    });
    let records: Vec<RunRecord> = if args.no_timestamp {
        records.into_iter().map(RunRecord::without_clock).collect()
    } else {
        records
    };

    let text = match args.format {
        Format::Csv => render_compare_csv(&records),
        Format::Table => render_compare_table(&records),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&records).expect("run records serialize");
            s.push('\n');
            s
        }
    };
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}

fn validate(args: ValidateArgs) -> Result<i32, Failure> {
    let catalog = load(&args.data)?;
    let text = fs::read_to_string(&args.plan).map_err(|e| Failure::input(format!("{}: {e}", args.plan.display())))?;
    let record = report::parse_json(&text)
        .map_err(|e| Failure::input(format!("{}: malformed plan: {e}", args.plan.display())))?;
    let id: ScenarioId = record.scenario.parse().map_err(Failure::input)?;
    let spec = customize(preset(id).spec, &args.model);

    let found = check_plan(&catalog, &spec, &record.plan());
    let unknown: Vec<&str> = found
        .violations
        .iter()
        .filter(|v| v.kind == ViolationKind::UnknownIngredient)
        .map(|v| v.subject.as_str())
        .collect();
    if !unknown.is_empty() {
        return Err(Failure::input(format!("plan names unknown ingredient(s): {}", unknown.join(", "))));
    }
    print!("{}", render_violations(&found));
    Ok(if found.is_empty() { EXIT_OK } else { EXIT_INFEASIBLE })
}
