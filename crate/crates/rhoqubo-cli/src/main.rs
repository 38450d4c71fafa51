//! Command-line front end for the constrained-to-QUBO toolkit.
//!
//! Every command prints a one-line JSON summary on stdout and exits 0
//! on success; any failure prints a one-line JSON object with an
//! `error` field on stderr and exits nonzero.
//!
//! Instance inputs are sniffed: files starting with
//! `rhoqubo-instance` are read in the native format, anything else is
//! parsed as a classic knapsack benchmark file.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rhoqubo::harness::{
    deviation_stats, export_records_csv, export_stats_csv, export_trace_csv, export_wins_csv,
    prime_sweep_list, read_records_csv, rho_sweep, win_counts,
};
use rhoqubo::io::{
    attach_cardinality_constraint, generate_qkp, read_native, read_orlib_bqp, read_qkp,
    write_native, InstanceBundle, Provenance,
};
use rhoqubo::oracle::{brute_force_constrained, brute_force_qubo, verify_lemma};
use rhoqubo::solver::SolverParams;
use rhoqubo::transform::{transform, ConstrainedProblem, PenaltyWeight, TransformConfig};
use rhoqubo::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rhoqubo",
    version,
    about = "Embed linearly constrained binary quadratic programs into QUBO and solve them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Solver budget flags shared by `solve` and `sweep`.
#[derive(Args)]
struct BudgetArgs {
    /// Seed for all randomized behavior.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration budget per solver run.
    #[arg(long = "iter-limit", default_value_t = 100_000)]
    iter_limit: u64,
    /// Wall-clock budget per solver run, in seconds.
    #[arg(long = "time-limit")]
    time_limit: Option<f64>,
}

impl BudgetArgs {
    fn params(&self) -> Result<SolverParams> {
        let mut params = SolverParams {
            seed: self.seed,
            iteration_limit: self.iter_limit,
            ..SolverParams::default()
        };
        if let Some(seconds) = self.time_limit {
            if !seconds.is_finite() || seconds < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "time limit must be a nonnegative number of seconds, got {seconds}"
                )));
            }
            params.time_limit = Some(Duration::from_secs_f64(seconds));
        }
        Ok(params)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate instances.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Embed the constraints and write the augmented QUBO with a size
    /// report.
    Transform {
        /// Instance file (native or knapsack benchmark format).
        #[arg(long)]
        input: PathBuf,
        /// Divisor applied to each inequality before slack encoding.
        #[arg(long, default_value_t = 1)]
        rho: i64,
        /// Penalty weight: 'auto' or a positive integer.
        #[arg(long = "M", default_value = "auto")]
        penalty: String,
        /// Where the augmented instance goes (native format).
        #[arg(long)]
        out: PathBuf,
    },
    /// One solver run, reporting the best feasible objective.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        rho: i64,
        /// Penalty weight: 'auto' or a positive integer.
        #[arg(long = "M", default_value = "auto")]
        penalty: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Write the best-so-far trace CSV here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the solver over a (rho, M) grid and export CSV tables.
    Sweep {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated divisors, or 'primes' for 1 plus every prime
        /// up to the first inequality's bound.
        #[arg(long, default_value = "1")]
        rho: String,
        /// Comma-separated penalty weights; each is 'auto' or an integer.
        #[arg(long = "M", default_value = "auto")]
        penalty: String,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Worker threads for independent sweep cells.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Output directory for records.csv and per-cell traces.
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustive ground truth and the scaling verdict for small
    /// instances.
    Oracle {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        rho: i64,
    },
    /// Deviation and win tables from sweep records.
    Stats {
        /// records.csv produced by `sweep`.
        #[arg(long)]
        input: PathBuf,
        /// Where the deviation table goes; the win table lands beside
        /// it with a `-wins` suffix.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum GenKind {
    /// Random knapsack instance with profits and weights in [1, 100].
    Qkp {
        /// Variable count.
        #[arg(long)]
        n: usize,
        /// Probability (percent) of each quadratic profit being present.
        #[arg(long, default_value_t = 50)]
        density: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read one ORLIB sparse matrix and attach the cardinality
    /// constraint sum(x) <= floor(n * fraction / 100).
    Cardinality {
        /// ORLIB-format file.
        #[arg(long)]
        input: PathBuf,
        /// Zero-based index of the instance within the file.
        #[arg(long, default_value_t = 0)]
        instance: usize,
        /// Cardinality bound as a percentage of n, in (0, 100).
        #[arg(long)]
        fraction: u32,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn load_bundle(path: &Path) -> Result<InstanceBundle> {
    let text = read_text(path)?;
    let mut bundle = if text.trim_start().starts_with("rhoqubo-instance") {
        read_native(&text)?
    } else {
        read_qkp(&text)?
    };
    if let Provenance::FromFile { path: source } = &mut bundle.provenance {
        if source.is_empty() {
            *source = path.display().to_string();
        }
    }
    Ok(bundle)
}

fn parse_penalty(token: &str) -> Result<PenaltyWeight> {
    if token.eq_ignore_ascii_case("auto") {
        return Ok(PenaltyWeight::Auto);
    }
    token
        .parse::<i64>()
        .map(PenaltyWeight::Fixed)
        .map_err(|_| {
            Error::InvalidParameter(format!(
                "penalty weight must be 'auto' or an integer, got '{token}'"
            ))
        })
}

fn parse_penalty_list(arg: &str) -> Result<Vec<PenaltyWeight>> {
    arg.split(',').map(|t| parse_penalty(t.trim())).collect()
}

fn parse_rho_list(arg: &str, bundle: &InstanceBundle) -> Result<Vec<i64>> {
    if arg.eq_ignore_ascii_case("primes") {
        let bound = bundle
            .problem
            .inequalities()
            .first()
            .map(|ineq| ineq.bound())
            .ok_or_else(|| {
                Error::InvalidParameter(
                    "a prime sweep needs an inequality to bound the primes".to_string(),
                )
            })?;
        return Ok(prime_sweep_list(bound));
    }
    arg.split(',')
        .map(|t| {
            t.trim().parse::<i64>().map_err(|_| {
                Error::InvalidParameter(format!("rho must be an integer, got '{t}'"))
            })
        })
        .collect()
}

fn run_gen(kind: GenKind) -> Result<serde_json::Value> {
    match kind {
        GenKind::Qkp {
            n,
            density,
            seed,
            out,
        } => {
            let bundle = generate_qkp(n, density, seed)?;
            write_text(&out, &write_native(&bundle)?)?;
            Ok(json!({
                "command": "gen",
                "kind": "qkp",
                "name": bundle.name,
                "vars": n,
                "density_percent": density,
                "seed": seed,
                "capacity": bundle.problem.inequalities()[0].bound(),
                "out": out.display().to_string(),
            }))
        }
        GenKind::Cardinality {
            input,
            instance,
            fraction,
            out,
        } => {
            let mut matrices = read_orlib_bqp(&read_text(&input)?)?;
            if instance >= matrices.len() {
                return Err(Error::InvalidParameter(format!(
                    "instance index {instance} out of range, file holds {}",
                    matrices.len()
                )));
            }
            let q = matrices.swap_remove(instance);
            let n = q.dimension();
            let problem = attach_cardinality_constraint(q, fraction)?;
            let stem = input
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("orlib");
            let bundle = InstanceBundle {
                name: format!("{stem}-{instance}-card{fraction}"),
                provenance: Provenance::FromFile {
                    path: input.display().to_string(),
                },
                problem,
            };
            write_text(&out, &write_native(&bundle)?)?;
            Ok(json!({
                "command": "gen",
                "kind": "cardinality",
                "name": bundle.name,
                "vars": n,
                "bound": bundle.problem.inequalities()[0].bound(),
                "out": out.display().to_string(),
            }))
        }
    }
}

fn run_transform(input: &Path, rho: i64, penalty: &str, out: &Path) -> Result<serde_json::Value> {
    let bundle = load_bundle(input)?;
    let config = TransformConfig {
        rho,
        penalty: parse_penalty(penalty)?,
    };
    let augmented = transform(&bundle.problem, &config)?;
    let (weight, effective) = augmented
        .penalties()
        .first()
        .map(|p| (p.weight(), p.effective_weight()))
        .unwrap_or((0, 0));

    let out_bundle = InstanceBundle {
        name: format!("{}-rho{rho}", bundle.name),
        provenance: Provenance::Generated {
            seed: 0,
            params: format!("kind=augmented rho={rho} M={weight}"),
        },
        problem: ConstrainedProblem::unconstrained(augmented.matrix().clone())?,
    };
    write_text(out, &write_native(&out_bundle)?)?;
    Ok(json!({
        "command": "transform",
        "instance": bundle.name,
        "rho": rho,
        "penalty_weight": weight,
        "effective_weight": effective,
        "original_vars": bundle.problem.dimension(),
        "augmented_vars": augmented.matrix().dimension(),
        "slack_count": augmented.slack_dimension(),
        "original_entries": bundle.problem.objective().entry_count(),
        "augmented_entries": augmented.matrix().entry_count(),
        "out": out.display().to_string(),
    }))
}

fn run_solve(
    input: &Path,
    rho: i64,
    penalty: &str,
    budget: &BudgetArgs,
    out: Option<&Path>,
) -> Result<serde_json::Value> {
    let bundle = load_bundle(input)?;
    let params = budget.params()?;
    let records = rho_sweep(&bundle, &[rho], &[parse_penalty(penalty)?], &params, 1)?;
    let record = records.into_iter().next().expect("one cell requested");
    if !record.error.is_empty() {
        return Err(Error::InvalidParameter(record.error));
    }
    if let Some(path) = out {
        export_trace_csv(&record.trace, path)?;
    }
    Ok(json!({
        "command": "solve",
        "instance": record.instance,
        "sense": record.sense,
        "rho": record.rho,
        "penalty_weight": record.penalty_weight,
        "effective_weight": record.effective_weight,
        "augmented_vars": record.augmented_dimension,
        "best_objective": record.best_objective,
        "best_lhs": record.best_lhs,
        "feasible": record.feasible,
        "iterations": record.iterations,
        "restarts": record.restarts,
        "wall_seconds": record.wall_seconds,
        "trace": out.map(|p| p.display().to_string()),
    }))
}

fn run_sweep(
    input: &Path,
    rho: &str,
    penalty: &str,
    budget: &BudgetArgs,
    threads: usize,
    out: &Path,
) -> Result<serde_json::Value> {
    let bundle = load_bundle(input)?;
    let rhos = parse_rho_list(rho, &bundle)?;
    let penalties = parse_penalty_list(penalty)?;
    let params = budget.params()?;
    let records = rho_sweep(&bundle, &rhos, &penalties, &params, threads)?;

    std::fs::create_dir_all(out).map_err(|e| Error::Io {
        path: out.display().to_string(),
        source: e,
    })?;
    let records_path = out.join("records.csv");
    export_records_csv(&records, &records_path)?;
    for record in &records {
        if !record.trace_ref.is_empty() && !record.trace.is_empty() {
            export_trace_csv(&record.trace, out.join(&record.trace_ref))?;
        }
    }
    Ok(json!({
        "command": "sweep",
        "instance": bundle.name,
        "cells": records.len(),
        "feasible": records.iter().filter(|r| r.feasible).count(),
        "cell_errors": records.iter().filter(|r| !r.error.is_empty()).count(),
        "records": records_path.display().to_string(),
    }))
}

fn run_oracle(input: &Path, rho: i64) -> Result<serde_json::Value> {
    let bundle = load_bundle(input)?;
    let q = bundle.problem.objective();
    if bundle.problem.inequalities().is_empty() && bundle.problem.equalities().is_empty() {
        let result = brute_force_qubo(q)?;
        return Ok(json!({
            "command": "oracle",
            "instance": bundle.name,
            "mode": "unconstrained",
            "best_objective": q.to_user_sense(result.best_value),
            "optimum_count": result.optimum_count,
        }));
    }
    let base = brute_force_constrained(&bundle.problem)?;
    let report = verify_lemma(&bundle.problem, rho)?;
    Ok(json!({
        "command": "oracle",
        "instance": bundle.name,
        "mode": "constrained",
        "rho": rho,
        "base_objective": base.best.as_ref().map(|(v, _)| q.to_user_sense(*v)),
        "grid_objective": q.to_user_sense(report.grid_value),
        "augmented_objective": q.to_user_sense(report.augmented_value),
        "precondition": report.precondition,
        "matches": report.matches,
        "degradation": report.degradation,
        "feasible_count": base.feasible_count,
    }))
}

fn run_stats(input: &Path, out: &Path) -> Result<serde_json::Value> {
    let records = read_records_csv(input)?;
    let rows = deviation_stats(&records)?;
    let wins = win_counts(&records)?;
    export_stats_csv(&rows, out)?;
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("stats");
    let wins_path = out.with_file_name(format!("{stem}-wins.csv"));
    export_wins_csv(&wins, &wins_path)?;
    let instances: std::collections::BTreeSet<&str> =
        rows.iter().map(|r| r.instance.as_str()).collect();
    Ok(json!({
        "command": "stats",
        "records": records.len(),
        "rows": rows.len(),
        "instances": instances.len(),
        "wins": wins,
        "out": out.display().to_string(),
        "wins_out": wins_path.display().to_string(),
    }))
}

fn run(command: Command) -> Result<serde_json::Value> {
    match command {
        Command::Gen { kind } => run_gen(kind),
        Command::Transform {
            input,
            rho,
            penalty,
            out,
        } => run_transform(&input, rho, &penalty, &out),
        Command::Solve {
            input,
            rho,
            penalty,
            budget,
            out,
        } => run_solve(&input, rho, &penalty, &budget, out.as_deref()),
        Command::Sweep {
            input,
            rho,
            penalty,
            budget,
            threads,
            out,
        } => run_sweep(&input, &rho, &penalty, &budget, threads, &out),
        Command::Oracle { input, rho } => run_oracle(&input, rho),
        Command::Stats { input, out } => run_stats(&input, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let first = e
                .to_string()
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .to_string();
            eprintln!("{}", json!({ "error": first }));
            return ExitCode::FAILURE;
        }
    };
    match run(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}
