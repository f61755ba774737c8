//! `fleetopt` — generate, solve, validate, sweep, and export fleet
//! assignment instances from the command line.
//!
//! Exit codes are stable for scripting: 0 success, 1 validation failure or
//! oracle disagreement, 2 input error, 3 infeasible model, 4 solver failure.

use clap::{Args, Parser, Subcommand, ValueEnum};
use fleet_core::analysis::{self, SweepResult};
use fleet_core::branch_bound::{solve_ilp, IlpStatus, SolveParams};
use fleet_core::gen::{self, texas, GenSpec};
use fleet_core::ilp::{build_ilp, export_lp_text, extract_solution};
use fleet_core::model::{
    budget_usage, check_feasible, evaluate_objective, rental_share, total_emissions, Instance,
    Solution, Variant,
};
use fleet_core::oracle::{brute_force_solve_with_limit, enumeration_size, BruteForceOutcome};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Default output directory for files whose `-o` flag is omitted.
const OUT_DIR_ENV: &str = "FLEETOPT_OUT_DIR";

#[derive(Parser)]
#[command(name = "fleetopt", version, about, max_term_width = 100)]
struct Cli {
    /// Log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Base,
    Enhanced,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Base => Variant::Base,
            VariantArg::Enhanced => Variant::Enhanced,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance from a preset or a generator-spec file.
    Generate(GenerateArgs),
    /// Solve an instance and write the optimal assignment.
    Solve(SolveArgs),
    /// Solve the capped model across a grid of emission caps.
    Sweep(SweepArgs),
    /// Check a solution file against an instance's constraints.
    Validate(ValidateArgs),
    /// Cross-check the solver against exhaustive enumeration.
    OracleCheck(OracleCheckArgs),
    /// Export the model as CPLEX-style LP text.
    ExportLp(ExportLpArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Built-in preset (`texas`: five cities, three modes).
    #[arg(long, conflicts_with = "spec")]
    preset: Option<String>,
    /// Generator-spec JSON file.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Seed; overrides the seed in the spec file.
    #[arg(long)]
    seed: Option<u64>,
    /// Periods for the preset.
    #[arg(short = 'T', long, default_value_t = 2)]
    periods: usize,
    /// Output path (default `instance.json` in the output directory).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "base")]
    variant: VariantArg,
    /// Emission cap override; requires the enhanced variant.
    #[arg(long, requires = "variant")]
    cap: Option<f64>,
    /// Output path for the solution (default `solution.json`).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Node limit for branch-and-bound.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Time limit in seconds.
    #[arg(long)]
    time_limit: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    instance: PathBuf,
    /// Grid size: evenly spaced caps between the minimum achievable and the
    /// uncapped plan's emissions.
    #[arg(short = 'n', long, default_value_t = 15, conflicts_with = "caps")]
    grid: usize,
    /// Explicit comma-separated caps; `inf` marks an uncapped row.
    #[arg(long, value_delimiter = ',')]
    caps: Option<Vec<String>>,
    /// Output path for the CSV (default `sweep.csv`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    solution: PathBuf,
    #[arg(long, value_enum, default_value = "base")]
    variant: VariantArg,
}

#[derive(Args)]
struct OracleCheckArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "base")]
    variant: VariantArg,
    /// Refuse enumeration beyond this many assignments.
    #[arg(long, default_value_t = 1_000_000)]
    limit: u128,
}

#[derive(Args)]
struct ExportLpArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value = "base")]
    variant: VariantArg,
    /// Emission cap override; requires the enhanced variant.
    #[arg(long)]
    cap: Option<f64>,
    /// Output path (default `model.lp`).
    #[arg(short, long)]
    out: Option<PathBuf>,
}

/// Command failure with its process exit code.
enum Failure {
    Input(String),
    Validation(String),
    Infeasible(String),
    Solver(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Input(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Solver(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m)
            | Failure::Validation(m)
            | Failure::Infeasible(m)
            | Failure::Solver(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let outcome = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::ExportLp(args) => cmd_export_lp(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn out_path(explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(path) => path,
        None => match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) => Path::new(&dir).join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents)
        .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    gen::load_instance_json(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn apply_cap(
    mut instance: Instance,
    variant: Variant,
    cap: Option<f64>,
) -> Result<Instance, Failure> {
    if let Some(cap) = cap {
        if variant != Variant::Enhanced {
            return Err(Failure::Input("--cap only applies to --variant enhanced".into()));
        }
        instance.emission_cap = Some(cap);
    }
    if variant == Variant::Enhanced && instance.emission_cap.is_none() {
        return Err(Failure::Input(
            "the enhanced variant needs an emission cap (instance field or --cap)".into(),
        ));
    }
    Ok(instance)
}

fn cmd_generate(args: GenerateArgs) -> Result<(), Failure> {
    let instance = match (&args.preset, &args.spec) {
        (Some(name), None) => {
            if name != "texas" {
                return Err(Failure::Input(format!("unknown preset `{name}` (try `texas`)")));
            }
            texas::texas_preset_with_periods(args.seed.unwrap_or(0), args.periods)
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            let mut spec = GenSpec::from_json(&text)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            if let Some(seed) = args.seed {
                spec.seed = seed;
            }
            gen::generate(&spec).map_err(|e| Failure::Input(e.to_string()))?
        }
        _ => {
            return Err(Failure::Input("pass exactly one of --preset or --spec".into()));
        }
    };
    let path = out_path(args.out, "instance.json");
    write_file(&path, &instance.to_json_pretty())?;
    let d = instance.dims;
    println!(
        "generated {}x{}x{}x{} instance (seed {}) -> {}",
        d.num_origins,
        d.num_destinations,
        d.num_modes,
        d.num_periods,
        args.seed.unwrap_or(0),
        path.display()
    );
    Ok(())
}

fn solve_params(node_limit: Option<u64>, time_limit: Option<f64>) -> SolveParams {
    SolveParams {
        node_limit,
        time_limit: time_limit.map(std::time::Duration::from_secs_f64),
        ..Default::default()
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let variant: Variant = args.variant.into();
    let instance = apply_cap(load_instance(&args.instance)?, variant, args.cap)?;
    let (problem, map) =
        build_ilp(&instance, variant).map_err(|e| Failure::Input(e.to_string()))?;
    let params = solve_params(args.node_limit, args.time_limit);
    let result = solve_ilp(&problem, &params);
    match result.status {
        IlpStatus::Optimal => {
            let solution = extract_solution(&result.values.expect("optimal"), &map)
                .map_err(|e| Failure::Solver(e.to_string()))?;
            let path = out_path(args.out, "solution.json");
            write_file(&path, &solution.to_json_pretty())?;
            print_report(&instance, &solution, result.nodes);
            println!("solution: {}", path.display());
            Ok(())
        }
        IlpStatus::Infeasible => {
            println!("status: infeasible");
            println!("nodes: {}", result.nodes);
            Err(Failure::Infeasible(format!("no feasible assignment ({variant} variant)")))
        }
        other => Err(Failure::Solver(format!("solver ended with {other:?}"))),
    }
}

fn print_report(instance: &Instance, solution: &Solution, nodes: u64) {
    let objective = evaluate_objective(instance, solution).expect("shapes match");
    let emissions = total_emissions(instance, solution).expect("shapes match");
    let spend = budget_usage(instance, solution).expect("shapes match");
    println!("status: optimal");
    println!("objective: {objective}");
    println!("emissions: {emissions}");
    println!("budget_usage: {spend} (budget {})", instance.budget);
    println!("rental_share: {}", rental_share(solution));
    println!("nodes: {nodes}");
}

fn parse_caps(raw: &[String]) -> Result<Vec<f64>, Failure> {
    raw.iter()
        .map(|s| {
            let t = s.trim();
            if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
                Ok(f64::INFINITY)
            } else {
                t.parse::<f64>().map_err(|_| Failure::Input(format!("bad cap value `{t}`")))
            }
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.instance)?;
    let params = SolveParams::default();
    let caps = match &args.caps {
        Some(raw) => parse_caps(raw)?,
        None => analysis::cap_grid(&instance, args.grid, &params)
            .map_err(|e| Failure::Solver(e.to_string()))?,
    };
    let sweep: SweepResult = analysis::sweep_emission_cap(&instance, &caps, &params)
        .map_err(|e| Failure::Solver(e.to_string()))?;
    let path = out_path(args.out, "sweep.csv");
    write_file(&path, &sweep.to_csv())?;
    let feasible = sweep.rows.iter().filter(|r| r.objective.is_some()).count();
    println!(
        "swept {} caps ({} feasible), base objective {} -> {}",
        sweep.rows.len(),
        feasible,
        sweep.base_objective,
        path.display()
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), Failure> {
    let variant: Variant = args.variant.into();
    let instance = load_instance(&args.instance)?;
    let text = std::fs::read_to_string(&args.solution)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.solution.display())))?;
    let solution = Solution::from_json(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.solution.display())))?;
    let violations = check_feasible(&instance, &solution, variant)
        .map_err(|e| Failure::Input(e.to_string()))?;
    if violations.is_empty() {
        println!("ok: solution satisfies the {variant} constraints");
        Ok(())
    } else {
        for v in &violations {
            println!("{v}");
        }
        Err(Failure::Validation(format!("{} violated constraint(s)", violations.len())))
    }
}

fn cmd_oracle_check(args: OracleCheckArgs) -> Result<(), Failure> {
    let variant: Variant = args.variant.into();
    let instance = load_instance(&args.instance)?;
    let space = enumeration_size(&instance);
    if !space.within(args.limit) {
        return Err(Failure::Input(format!(
            "search space of {} assignments exceeds the limit of {}",
            space.combinations, args.limit
        )));
    }
    let oracle = brute_force_solve_with_limit(&instance, variant, args.limit)
        .map_err(|e| Failure::Input(e.to_string()))?;

    let (problem, _) = build_ilp(&instance, variant).map_err(|e| Failure::Input(e.to_string()))?;
    let result = solve_ilp(&problem, &SolveParams::default());

    match (oracle, result.status) {
        (BruteForceOutcome::Optimal { objective: expected, .. }, IlpStatus::Optimal) => {
            let got = result.objective.expect("optimal");
            println!("oracle: {expected}");
            println!("solver: {got} ({} nodes)", result.nodes);
            if (got - expected).abs() <= 1e-6 {
                println!("agreement within 1e-6");
                Ok(())
            } else {
                Err(Failure::Validation(format!(
                    "solver objective {got} disagrees with oracle {expected}"
                )))
            }
        }
        (BruteForceOutcome::Infeasible, IlpStatus::Infeasible) => {
            println!("oracle: infeasible");
            println!("solver: infeasible ({} nodes)", result.nodes);
            println!("agreement");
            Ok(())
        }
        (oracle, solver) => {
            let oracle_desc = match oracle {
                BruteForceOutcome::Optimal { objective, .. } => format!("optimal {objective}"),
                BruteForceOutcome::Infeasible => "infeasible".to_string(),
            };
            Err(Failure::Validation(format!(
                "oracle says {oracle_desc}, solver says {solver:?}"
            )))
        }
    }
}

fn cmd_export_lp(args: ExportLpArgs) -> Result<(), Failure> {
    let variant: Variant = args.variant.into();
    let instance = apply_cap(load_instance(&args.instance)?, variant, args.cap)?;
    let (problem, map) =
        build_ilp(&instance, variant).map_err(|e| Failure::Input(e.to_string()))?;
    let path = out_path(args.out, "model.lp");
    write_file(&path, &export_lp_text(&problem, &map))?;
    println!(
        "exported {} columns x {} rows -> {}",
        problem.num_columns(),
        problem.num_rows(),
        path.display()
    );
    Ok(())
}
