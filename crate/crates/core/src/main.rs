use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use deadcore::scenario::{run_scenario, ScenarioKind};

/// Numerical laboratory for nonlocal extremal operators, sublinear
/// absorption, and dead-core formation.
#[derive(Parser)]
#[command(name = "deadcore", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the sublinear problem and run the maximum-principle checks.
    Solve(RunArgs),
    /// Principal eigenpair by inverse power iteration.
    Eigen(RunArgs),
    /// Build the subsolution barrier and sample its defining system.
    Barriers(RunArgs),
    /// Solve and probe the boundary quotient u/d^s and the smallness
    /// condition for the negative tail.
    Hopf(RunArgs),
    /// Bisect the exterior distortion M to the first dead-core value.
    Threshold(RunArgs),
    /// Sweep the negative exterior amplitude and record verdicts.
    Sweep(RunArgs),
    /// Random-field bracketing and policy-consistency validation.
    #[command(name = "validate-operator")]
    ValidateOperator(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Scenario configuration file (TOML sections: domain, kernel, problem,
    /// solver, experiment).
    #[arg(long)]
    config: PathBuf,
    /// Output directory for solution.csv, summary.json and extra artifacts.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Solve(a) => (ScenarioKind::Solve, a),
        Command::Eigen(a) => (ScenarioKind::Eigen, a),
        Command::Barriers(a) => (ScenarioKind::Barriers, a),
        Command::Hopf(a) => (ScenarioKind::Hopf, a),
        Command::Threshold(a) => (ScenarioKind::Threshold, a),
        Command::Sweep(a) => (ScenarioKind::Sweep, a),
        Command::ValidateOperator(a) => (ScenarioKind::ValidateOperator, a),
    };
    match run_scenario(kind, &args.config, &args.out) {
        Ok(result) => {
            for c in &result.summary.checks {
                println!(
                    "{}: {} (margin {})",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    c.margin
                );
            }
            println!(
                "{}: wrote {} and {}",
                result.scenario,
                args.out.join("solution.csv").display(),
                args.out.join("summary.json").display()
            );
            if result.any_check_failed() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
