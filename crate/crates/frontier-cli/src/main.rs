//! `frontier` — scenario-driven simulations and verdicts for
//! boundary-controlled moving sets.
//!
//! Every subcommand reads a JSON scenario file, checks it against the schema,
//! runs its pipeline, and writes deterministic artifacts (CSV tables, JSON
//! reports, SVG frames) plus a digest manifest into the output directory.
//!
//! Exit codes: 0 success, 2 schema violation, 3 computation or data error.
//! Failures print a single machine-readable JSON object on stderr.

mod artifacts;
mod run;
mod scenario;

use clap::{Args, Parser, Subcommand};
use run::AppError;
use scenario::{parse_scenario, Kind, Scenario, SchemaError};
use serde_json::json;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "frontier",
    version,
    about = "Simulations and optimality verdicts for boundary-controlled moving sets",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; overrides the scenario's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Suppress the artifact listing on stdout.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate the control effort of sustained invasion speeds
    Effort(RunArgs),
    /// Drive the one-dimensional wave at a target speed and measure it
    Wave(RunArgs),
    /// Evolve a closed front at a uniform normal speed
    Evolve(RunArgs),
    /// Plan and simulate budget-limited extinction of a convex region
    Eradicate(RunArgs),
    /// Classify a confined region as eradicable or not under a budget
    Constrained(RunArgs),
    /// Check a control strategy against the optimality conditions
    Verify(RunArgs),
    /// Run an area-balanced slicing sweep of an elliptical region
    Slice(RunArgs),
    /// Check a scenario file against the schema without computing anything
    Validate(ValidateArgs),
}

fn load_scenario(path: &Path, expect: Option<Kind>) -> Result<Scenario, AppError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        AppError::Schema(SchemaError {
            field: None,
            message: format!("cannot read scenario file {}: {e}", path.display()),
        })
    })?;
    let sc = parse_scenario(&text)?;
    sc.validate()?;
    if let Some(kind) = expect {
        if sc.kind != kind {
            return Err(AppError::Schema(SchemaError {
                field: Some("kind".to_string()),
                message: format!(
                    "scenario kind is `{}` but the subcommand is `{}`",
                    sc.kind.name(),
                    kind.name()
                ),
            }));
        }
    }
    Ok(sc)
}

fn run_kind(kind: Kind, args: &RunArgs) -> Result<(), AppError> {
    let sc = load_scenario(&args.scenario, Some(kind))?;
    let out_dir = match &args.out {
        Some(dir) => dir.clone(),
        None => PathBuf::from(sc.output_dir.as_deref().unwrap_or(".")),
    };
    run::execute(&sc, &out_dir, args.quiet)
}

fn run_validate(args: &ValidateArgs) -> Result<(), AppError> {
    let sc = load_scenario(&args.scenario, None)?;
    let status = json!({
        "status": "ok",
        "kind": sc.kind.name(),
        "schema_version": sc.schema_version,
    });
    println!("{status}");
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), AppError> {
    match &cli.cmd {
        Cmd::Effort(a) => run_kind(Kind::Effort, a),
        Cmd::Wave(a) => run_kind(Kind::Wave, a),
        Cmd::Evolve(a) => run_kind(Kind::Evolve, a),
        Cmd::Eradicate(a) => run_kind(Kind::Eradicate, a),
        Cmd::Constrained(a) => run_kind(Kind::Constrained, a),
        Cmd::Verify(a) => run_kind(Kind::Verify, a),
        Cmd::Slice(a) => run_kind(Kind::Slice, a),
        Cmd::Validate(a) => run_validate(a),
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(&cli) {
        Ok(()) => 0,
        Err(AppError::Schema(e)) => {
            let mut obj = json!({"class": "schema", "message": e.message});
            if let Some(field) = e.field {
                obj["field"] = json!(field);
            }
            eprintln!("{}", json!({ "error": obj }));
            2
        }
        Err(AppError::Compute { message }) => {
            eprintln!("{}", json!({"error": {"class": "compute", "message": message}}));
            3
        }
    };
    std::process::exit(code);
}
