//! `chainplace`: generate scenarios, solve placement instances, compare the
//! reuse and no-reuse cases, and check plans.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 infeasible, 3 time limit.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use chainplace::costs::{total_objective, CostBreakdown};
use chainplace::ilp::{
    build_ilp, export_lp, export_mps, import_solution, parse_solution, BuildOptions,
};
use chainplace::model::{check_feasibility_with, ConstraintReport, PlacementPlan, ProblemInstance};
use chainplace::scenario::{
    emit_report, generate, run_comparison, ReportFormat, Scale, ScenarioSpec, DEFAULT_SEED,
};
use chainplace::solver::{
    brute_force_with, solve_exact, BruteForceOptions, SolveOptions, SolveResult, SolveStatus,
};
use chainplace::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_TIME_LIMIT: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "chainplace",
    version,
    about = "Online VNF chain placement for CDN value-added services"
)]
struct Cli {
    /// Random seed for scenario generation.
    #[arg(long, global = true, env = "CHAINPLACE_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Solver wall-clock limit in seconds.
    #[arg(
        long,
        global = true,
        env = "CHAINPLACE_TIME_LIMIT",
        default_value_t = 600.0
    )]
    time_limit: f64,

    /// Search threads.
    #[arg(long, global = true, env = "CHAINPLACE_WORKERS", default_value_t = 1)]
    workers: usize,

    /// Write the result here instead of standard output.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a scenario instance.
    Generate(GenerateArgs),
    /// Solve an instance, or export it as a MILP file.
    Solve(SolveArgs),
    /// Solve scenarios with and without reuse and print a cost report.
    Compare(CompareArgs),
    /// Check a plan against an instance and print its cost.
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct ScaleArgs {
    /// Use the reduced scale: 4 servers, 4 user groups, 4 requests.
    #[arg(long, conflicts_with = "full")]
    reduced: bool,

    /// Use the evaluation scale: 6 servers, 6 user groups, 6 requests (default).
    #[arg(long)]
    full: bool,
}

impl ScaleArgs {
    fn scale(&self) -> Scale {
        if self.reduced {
            Scale::Reduced
        } else {
            Scale::Full
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// Scenario number (1, 2 or 3).
    #[arg(long, conflicts_with_all = ["existing", "new"], required_unless_present_any = ["existing", "new"])]
    scenario: Option<u8>,

    /// Number of existing requests (custom counts).
    #[arg(long, requires = "new")]
    existing: Option<usize>,

    /// Number of new requests (custom counts).
    #[arg(long, requires = "existing")]
    new: Option<usize>,

    /// Servers for custom counts; defaults to the scale's value.
    #[arg(long)]
    servers: Option<usize>,

    /// User groups for custom counts; defaults to the scale's value.
    #[arg(long)]
    users: Option<usize>,

    #[command(flatten)]
    scale: ScaleArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Mps,
    Lp,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance document.
    instance: PathBuf,

    /// Forbid new requests from using instances already deployed.
    #[arg(long)]
    no_reuse: bool,

    /// Write the binary program in this format instead of solving.
    #[arg(long, value_enum)]
    export: Option<ExportFormat>,

    /// Also run the brute-force oracle and fail unless it agrees.
    #[arg(long, conflicts_with = "export")]
    oracle: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ReportKind {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// Scenario number or range, e.g. `2`, `1..3` or `1,3`.
    #[arg(long, default_value = "1..3", value_parser = parse_scenarios)]
    scenario: Scenarios,

    #[command(flatten)]
    scale: ScaleArgs,

    #[arg(long, value_enum, default_value_t = ReportKind::Csv)]
    format: ReportKind,

    /// Include wall-clock times (makes the output run-dependent).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Instance document.
    instance: PathBuf,

    /// Plan document, solve report, or variable values (`name=value` lines or a JSON object).
    plan: PathBuf,

    /// Also enforce the no-reuse rule.
    #[arg(long)]
    no_reuse: bool,
}

#[derive(Clone, Debug)]
struct Scenarios(Vec<u8>);

fn parse_scenarios(text: &str) -> Result<Scenarios, String> {
    let one = |s: &str| match s.trim().parse::<u8>() {
        Ok(id @ 1..=3) => Ok(id),
        _ => Err(format!("scenario must be 1, 2 or 3, got `{s}`")),
    };
    let mut ids = Vec::new();
    for part in text.split(',') {
        if let Some((a, b)) = part.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (one(a)?, one(b)?);
            if a > b {
                return Err(format!("empty scenario range `{part}`"));
            }
            ids.extend(a..=b);
        } else {
            ids.push(one(part)?);
        }
    }
    Ok(Scenarios(ids))
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_instance(path: &Path) -> Result<ProblemInstance> {
    ProblemInstance::from_json(&read(path)?)
        .with_context(|| format!("parsing instance {}", path.display()))
}

fn status_code(status: SolveStatus) -> u8 {
    match status {
        SolveStatus::Optimal => 0,
        SolveStatus::Infeasible => EXIT_INFEASIBLE,
        SolveStatus::TimeLimit => EXIT_TIME_LIMIT,
    }
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<u8> {
    let scale = args.scale.scale();
    let spec = match args.scenario {
        Some(id) => ScenarioSpec::scenario(id, scale, cli.seed)?,
        None => {
            let base = ScenarioSpec::scenario(1, scale, cli.seed)?;
            ScenarioSpec::new(
                cli.seed,
                args.servers.unwrap_or(base.n_servers),
                args.users.unwrap_or(base.n_user_groups),
                args.existing.unwrap_or(0),
                args.new.unwrap_or(0),
            )
        }
    };
    match generate(&spec) {
        Ok(instance) => {
            write_output(cli.output.as_deref(), &instance.to_json()?)?;
            Ok(0)
        }
        Err(Error::BootstrapInfeasible) => {
            log::error!("the existing requests cannot be placed; try another seed");
            Ok(EXIT_INFEASIBLE)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct OracleCheck {
    matched: bool,
    objective: Option<String>,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    #[serde(flatten)]
    result: &'a SolveResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleCheck>,
}

fn cmd_solve(cli: &Cli, args: &SolveArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    if let Some(format) = args.export {
        let model = build_ilp(
            &instance,
            BuildOptions {
                no_reuse: args.no_reuse,
            },
        )?;
        let text = match format {
            ExportFormat::Mps => export_mps(&model),
            ExportFormat::Lp => export_lp(&model),
        };
        write_output(cli.output.as_deref(), &text)?;
        return Ok(0);
    }
    let options = SolveOptions {
        time_limit: cli.time_limit,
        no_reuse: args.no_reuse,
        workers: cli.workers,
    };
    let result = solve_exact(&instance, &options)?;
    log::info!(
        "{:?} after {} nodes in {} ms",
        result.status,
        result.stats.nodes,
        result.stats.wall_time_ms
    );

    let oracle = if args.oracle {
        let brute = brute_force_with(
            &instance,
            &BruteForceOptions {
                no_reuse: args.no_reuse,
                ..Default::default()
            },
        )?;
        let matched = brute.status == result.status
            && brute.plan == result.plan
            && brute.breakdown == result.breakdown;
        Some(OracleCheck {
            matched,
            objective: brute.objective().map(|m| m.to_decimal()),
        })
    } else {
        None
    };
    let mismatch = oracle.as_ref().is_some_and(|o| !o.matched);
    let mut text = serde_json::to_string_pretty(&SolveReport {
        result: &result,
        oracle,
    })?;
    text.push('\n');
    write_output(cli.output.as_deref(), &text)?;
    if mismatch {
        bail!("brute-force oracle disagrees with the branch-and-bound result");
    }
    Ok(status_code(result.status))
}

fn cmd_compare(cli: &Cli, args: &CompareArgs) -> Result<u8> {
    let options = SolveOptions {
        time_limit: cli.time_limit,
        no_reuse: false,
        workers: cli.workers,
    };
    let mut reports = Vec::with_capacity(args.scenario.0.len());
    for &id in &args.scenario.0 {
        let spec = ScenarioSpec::scenario(id, args.scale.scale(), cli.seed)?;
        log::info!(
            "scenario {id}: {} existing, {} new",
            spec.existing_requests,
            spec.new_requests
        );
        match run_comparison(&spec, &options) {
            Ok(report) => reports.push(report),
            Err(Error::BootstrapInfeasible) => {
                log::error!(
                    "scenario {id}: the existing requests cannot be placed; try another seed"
                );
                return Ok(EXIT_INFEASIBLE);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let format = match args.format {
        ReportKind::Csv => ReportFormat::Csv,
        ReportKind::Json => ReportFormat::Json,
    };
    write_output(
        cli.output.as_deref(),
        &emit_report(&reports, format, args.timing)?,
    )?;
    let worst = reports
        .iter()
        .flat_map(|r| [r.online.status, r.no_reuse.status])
        .map(status_code)
        .max()
        .unwrap_or(0);
    Ok(worst)
}

/// Reads a plan from a plan document, the `plan` field of a solve report, or variable values.
fn load_plan(instance: &ProblemInstance, text: &str, no_reuse: bool) -> Result<PlacementPlan> {
    if let Ok(value) = serde_json::from_str::<serde_json::Value>(text) {
        if value.get("content_server").is_some() {
            return Ok(serde_json::from_value(value)?);
        }
        if let Some(plan) = value.get("plan") {
            if plan.is_null() {
                bail!("the report has no plan");
            }
            return Ok(serde_json::from_value(plan.clone())?);
        }
    }
    let values = parse_solution(text)?;
    let model = build_ilp(instance, BuildOptions { no_reuse })?;
    Ok(import_solution(&model, &values)?)
}

#[derive(Serialize)]
struct CheckReport {
    feasible: bool,
    #[serde(flatten)]
    constraints: ConstraintReport,
    breakdown: CostBreakdown,
}

fn cmd_check(cli: &Cli, args: &CheckArgs) -> Result<u8> {
    let instance = load_instance(&args.instance)?;
    let plan = load_plan(&instance, &read(&args.plan)?, args.no_reuse)
        .with_context(|| format!("reading plan {}", args.plan.display()))?;
    let constraints = check_feasibility_with(&instance, &plan, args.no_reuse)?;
    let breakdown = total_objective(&instance, &plan)?;
    for v in &constraints.violations {
        log::warn!(
            "violated {} {:?}: lhs {} rhs {}",
            v.kind.code(),
            v.indices,
            v.lhs,
            v.rhs
        );
    }
    let feasible = constraints.is_feasible();
    let mut text = serde_json::to_string_pretty(&CheckReport {
        feasible,
        constraints,
        breakdown,
    })?;
    text.push('\n');
    write_output(cli.output.as_deref(), &text)?;
    Ok(if feasible { 0 } else { EXIT_INFEASIBLE })
}

fn run(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Solve(args) => cmd_solve(cli, args),
        Command::Compare(args) => cmd_compare(cli, args),
        Command::Check(args) => cmd_check(cli, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
