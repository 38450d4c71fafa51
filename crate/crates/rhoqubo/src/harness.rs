//! Experiment harness: (rho, penalty) parameter sweeps, deviation
//! statistics, win counts, and CSV import/export.
//!
//! A sweep runs the solver once per (rho, M) cell on the augmented
//! problem, maps the result back through [`AugmentedQubo::recover`],
//! and judges feasibility only against the original constraints.
//! Records therefore never present an infeasible assignment as a best:
//! when neither the incumbent nor any elite recovers to a feasible
//! point, the cell reports "no feasible found" (`best_objective` of
//! `None`).
//!
//! Each cell draws its solver seed from a stream fixed by the sweep
//! seed before any work is distributed, so results are identical for
//! any worker count.

use std::collections::BTreeMap;
use std::fs::File;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::InstanceBundle;
use crate::qubo::{BinaryAssignment, Sense};
use crate::rng::SplitMix64;
use crate::solver::{solve, SolverParams, TracePoint};
use crate::transform::{prime_rhos, transform, AugmentedQubo, PenaltyWeight, TransformConfig};

/// One sweep cell: the solver's outcome for a (rho, M) pair, reported
/// in the instance's own sense and judged against the original
/// constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub instance: String,
    /// "min" or "max"; objectives below are in this sense.
    pub sense: String,
    /// Original variable count.
    pub dimension: usize,
    /// Nominal quadratic density for generated instances, when known.
    pub density_percent: Option<u32>,
    pub rho: i64,
    /// Resolved penalty weight M of the first constraint (0 when the
    /// problem is unconstrained).
    pub penalty_weight: i64,
    /// rho^2 * M, the weight actually applied to the integer square.
    pub effective_weight: i64,
    /// Total slack variables introduced.
    pub slack_count: usize,
    pub augmented_dimension: usize,
    pub augmented_nonzeros: usize,
    /// Best feasible objective in the instance's sense, or `None` when
    /// no feasible assignment was recovered.
    pub best_objective: Option<i64>,
    /// First-inequality left-hand side at the reported assignment.
    pub best_lhs: Option<i64>,
    pub feasible: bool,
    pub iterations: u64,
    pub restarts: u64,
    pub wall_seconds: f64,
    /// Suggested file name for this cell's progression trace.
    pub trace_ref: String,
    /// Empty on success; otherwise the per-cell error message.
    pub error: String,
    /// Best-so-far progression, kept out of the CSV row.
    #[serde(skip)]
    pub trace: Vec<TracePoint>,
}

const RECORD_FIELDS: [&str; 18] = [
    "instance",
    "sense",
    "dimension",
    "density_percent",
    "rho",
    "penalty_weight",
    "effective_weight",
    "slack_count",
    "augmented_dimension",
    "augmented_nonzeros",
    "best_objective",
    "best_lhs",
    "feasible",
    "iterations",
    "restarts",
    "wall_seconds",
    "trace_ref",
    "error",
];

fn sense_label(sense: Sense) -> &'static str {
    match sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    }
}

fn sanitize_name(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn blank_record(bundle: &InstanceBundle, rho: i64) -> SweepRecord {
    let q = bundle.problem.objective();
    SweepRecord {
        instance: bundle.name.clone(),
        sense: sense_label(q.sense()).to_string(),
        dimension: bundle.problem.dimension(),
        density_percent: bundle
            .provenance
            .param("density")
            .and_then(|v| v.parse().ok()),
        rho,
        penalty_weight: 0,
        effective_weight: 0,
        slack_count: 0,
        augmented_dimension: 0,
        augmented_nonzeros: 0,
        best_objective: None,
        best_lhs: None,
        feasible: false,
        iterations: 0,
        restarts: 0,
        wall_seconds: 0.0,
        trace_ref: String::new(),
        error: String::new(),
        trace: Vec::new(),
    }
}

/// Pick the reported assignment: the incumbent if it recovers to a
/// feasible point, otherwise the best feasible recovery from the elite
/// pool, otherwise nothing.
fn report_best(
    bundle: &InstanceBundle,
    augmented: &AugmentedQubo,
    candidates: &[(i64, &BinaryAssignment)],
    record: &mut SweepRecord,
) -> Result<()> {
    for &(_, y) in candidates {
        let recovered = augmented.recover(y)?;
        if bundle.problem.check_feasible(&recovered.assignment)? {
            let value = bundle.problem.objective().evaluate(&recovered.assignment)?;
            record.best_objective = Some(bundle.problem.objective().to_user_sense(value));
            record.best_lhs = bundle
                .problem
                .inequalities()
                .first()
                .map(|ineq| ineq.lhs(&recovered.assignment))
                .transpose()?;
            record.feasible = true;
            return Ok(());
        }
    }
    Ok(())
}

fn run_cell_inner(
    bundle: &InstanceBundle,
    rho: i64,
    penalty: &PenaltyWeight,
    seed: u64,
    base: &SolverParams,
    record: &mut SweepRecord,
) -> Result<()> {
    let config = TransformConfig {
        rho,
        penalty: penalty.clone(),
    };
    let augmented = transform(&bundle.problem, &config)?;
    if let Some(p) = augmented.penalties().first() {
        record.penalty_weight = p.weight();
        record.effective_weight = p.effective_weight();
    }
    record.slack_count = augmented.slack_dimension();
    record.augmented_dimension = augmented.matrix().dimension();
    record.augmented_nonzeros = augmented.matrix().entry_count();
    record.trace_ref = format!(
        "{}-rho{}-M{}.trace.csv",
        sanitize_name(&bundle.name),
        rho,
        record.penalty_weight
    );

    let params = SolverParams {
        seed,
        ..base.clone()
    };
    let result = solve(augmented.matrix(), &params)?;
    record.iterations = result.iterations;
    record.restarts = result.restarts;
    record.trace = result.trace.clone();

    let mut candidates: Vec<(i64, &BinaryAssignment)> = vec![(result.best_value, &result.best)];
    for (v, x) in &result.elites {
        candidates.push((*v, x));
    }
    candidates.sort_by_key(|&(v, _)| v);
    report_best(bundle, &augmented, &candidates, record)
}

fn run_cell(
    bundle: &InstanceBundle,
    rho: i64,
    penalty: &PenaltyWeight,
    seed: u64,
    base: &SolverParams,
) -> SweepRecord {
    let start = Instant::now();
    let mut record = blank_record(bundle, rho);
    if let Err(e) = run_cell_inner(bundle, rho, penalty, seed, base, &mut record) {
        record.error = e.to_string();
        record.best_objective = None;
        record.best_lhs = None;
        record.feasible = false;
    }
    record.wall_seconds = start.elapsed().as_secs_f64();
    record
}

/// Run the solver over every (rho, M) pair and collect one record per
/// cell, in `rho_list` x `penalty_list` order. Per-cell failures are
/// recorded in the cell's `error` field without aborting the sweep.
pub fn rho_sweep(
    bundle: &InstanceBundle,
    rho_list: &[i64],
    penalty_list: &[PenaltyWeight],
    params: &SolverParams,
    worker_count: usize,
) -> Result<Vec<SweepRecord>> {
    if rho_list.is_empty() {
        return Err(Error::InvalidParameter(
            "rho list must not be empty".to_string(),
        ));
    }
    if let Some(&bad) = rho_list.iter().find(|&&r| r < 1) {
        return Err(Error::InvalidRho(bad));
    }
    if penalty_list.is_empty() {
        return Err(Error::InvalidParameter(
            "penalty list must not be empty".to_string(),
        ));
    }
    if worker_count == 0 {
        return Err(Error::InvalidParameter(
            "worker count must be positive".to_string(),
        ));
    }

    // Seeds are fixed per cell before any distribution so the records
    // do not depend on the worker count.
    let mut seeds = SplitMix64::new(params.seed);
    let mut cells = Vec::with_capacity(rho_list.len() * penalty_list.len());
    for &rho in rho_list {
        for penalty in penalty_list {
            cells.push((rho, penalty, seeds.next_u64()));
        }
    }

    let run = |cell: &(i64, &PenaltyWeight, u64)| run_cell(bundle, cell.0, cell.1, cell.2, params);
    let records = if worker_count == 1 {
        cells.iter().map(run).collect()
    } else {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(worker_count)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        pool.install(|| cells.par_iter().map(run).collect())
    };
    Ok(records)
}

/// The default rho list for prime sweeps: 1 followed by every prime up
/// to the constraint bound (beyond the bound the scaled range collapses
/// to a single admitted value).
pub fn prime_sweep_list(bound: i64) -> Vec<i64> {
    let mut list = vec![1];
    list.extend(prime_rhos(bound));
    list
}

/// One record's percent deviation from the best objective obtained for
/// the same instance anywhere in the record set, tagged with the keys
/// experiments group by.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub instance: String,
    pub dimension: usize,
    pub density_percent: Option<u32>,
    pub rho: i64,
    pub penalty_weight: i64,
    pub best_objective: i64,
    pub deviation_percent: f64,
}

const STATS_FIELDS: [&str; 7] = [
    "instance",
    "dimension",
    "density_percent",
    "rho",
    "penalty_weight",
    "best_objective",
    "deviation_percent",
];

/// Percent deviation of each feasible record from the best objective
/// found for its instance, in the records' own sense.
///
/// The best record of an instance deviates by exactly 0. Records
/// without a feasible objective are skipped. When an instance's best
/// objective is 0, any worse value reports an infinite deviation (the
/// percent scale has no reference). Errors when no record carries an
/// objective or when senses are mixed.
pub fn deviation_stats(records: &[SweepRecord]) -> Result<Vec<DeviationRow>> {
    let usable: Vec<&SweepRecord> = records
        .iter()
        .filter(|r| r.best_objective.is_some())
        .collect();
    if usable.is_empty() {
        return Err(Error::InvalidParameter(
            "no records with a feasible objective".to_string(),
        ));
    }
    let sense = usable[0].sense.as_str();
    if usable.iter().any(|r| r.sense != sense) {
        return Err(Error::InvalidParameter(
            "records mix minimization and maximization senses".to_string(),
        ));
    }
    let maximize = sense == "max";

    let mut best: BTreeMap<&str, i64> = BTreeMap::new();
    for r in &usable {
        let v = r.best_objective.unwrap();
        best.entry(r.instance.as_str())
            .and_modify(|b| {
                if (maximize && v > *b) || (!maximize && v < *b) {
                    *b = v;
                }
            })
            .or_insert(v);
    }

    Ok(usable
        .iter()
        .map(|r| {
            let v = r.best_objective.unwrap();
            let b = best[r.instance.as_str()];
            let diff = if maximize { b - v } else { v - b };
            let deviation_percent = if diff == 0 {
                0.0
            } else {
                100.0 * diff as f64 / (b as f64).abs()
            };
            DeviationRow {
                instance: r.instance.clone(),
                dimension: r.dimension,
                density_percent: r.density_percent,
                rho: r.rho,
                penalty_weight: r.penalty_weight,
                best_objective: v,
                deviation_percent,
            }
        })
        .collect())
}

/// How often a (rho, M) cell reached its instance's best objective.
/// Ties count as wins for every cell that achieves the best value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinCount {
    pub rho: i64,
    pub penalty_weight: i64,
    pub wins: usize,
    pub cells: usize,
}

const WINS_FIELDS: [&str; 4] = ["rho", "penalty_weight", "wins", "cells"];

/// Count, per (rho, M) pair, the records that matched their instance's
/// best objective.
pub fn win_counts(records: &[SweepRecord]) -> Result<Vec<WinCount>> {
    let rows = deviation_stats(records)?;
    let mut table: BTreeMap<(i64, i64), (usize, usize)> = BTreeMap::new();
    for row in &rows {
        let entry = table.entry((row.rho, row.penalty_weight)).or_insert((0, 0));
        entry.1 += 1;
        if row.deviation_percent == 0.0 {
            entry.0 += 1;
        }
    }
    Ok(table
        .into_iter()
        .map(|((rho, penalty_weight), (wins, cells))| WinCount {
            rho,
            penalty_weight,
            wins,
            cells,
        })
        .collect())
}

fn create_file(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn open_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn flush_writer<W: std::io::Write>(mut writer: csv::Writer<W>, path: &Path) -> Result<()> {
    writer.flush().map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Write sweep records as CSV with a header row; an empty list yields
/// a header-only file.
pub fn export_records_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create_file(path)?);
    writer.write_record(RECORD_FIELDS)?;
    for record in records {
        writer.serialize(record)?;
    }
    flush_writer(writer, path)
}

/// Read records written by [`export_records_csv`]. Traces are not
/// stored in the CSV and come back empty.
pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_reader(open_file(path)?);
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row?);
    }
    Ok(records)
}

/// Write deviation rows as CSV with a header row.
pub fn export_stats_csv(rows: &[DeviationRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create_file(path)?);
    writer.write_record(STATS_FIELDS)?;
    for row in rows {
        writer.serialize(row)?;
    }
    flush_writer(writer, path)
}

/// Write win counts as CSV with a header row.
pub fn export_wins_csv(rows: &[WinCount], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create_file(path)?);
    writer.write_record(WINS_FIELDS)?;
    for row in rows {
        writer.serialize(row)?;
    }
    flush_writer(writer, path)
}

/// Write a best-so-far trace as `(elapsed_seconds, best_objective)`
/// pairs: a trace of k points yields k+1 CSV lines including the
/// header.
pub fn export_trace_csv(trace: &[TracePoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(create_file(path)?);
    writer.write_record(["elapsed_seconds", "best_objective"])?;
    for point in trace {
        writer.write_record([point.elapsed_seconds.to_string(), point.value.to_string()])?;
    }
    flush_writer(writer, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{attach_cardinality_constraint, generate_qkp, Provenance};
    use crate::oracle::brute_force_constrained;
    use crate::qubo::QuboMatrix;
    use crate::transform::slack_count;

    fn quick_params(seed: u64, iterations: u64) -> SolverParams {
        SolverParams {
            seed,
            iteration_limit: iterations,
            restart_after: Some(300),
            ..SolverParams::default()
        }
    }

    /// Everything except wall-clock readings, for cross-run comparison.
    fn comparable(r: &SweepRecord) -> SweepRecord {
        let mut c = r.clone();
        c.wall_seconds = 0.0;
        for p in &mut c.trace {
            p.elapsed_seconds = 0.0;
        }
        c
    }

    #[test]
    fn unit_rho_sweep_matches_the_constrained_oracle() {
        let bundle = generate_qkp(8, 75, 3).unwrap();
        let params = quick_params(5, 60_000);
        let records =
            rho_sweep(&bundle, &[1], &[PenaltyWeight::Auto], &params, 1).unwrap();
        assert_eq!(records.len(), 1);
        let record = &records[0];
        assert!(record.error.is_empty(), "{}", record.error);
        assert!(record.feasible);

        let oracle = brute_force_constrained(&bundle.problem).unwrap();
        let (value, _) = oracle.best.unwrap();
        let q = bundle.problem.objective();
        assert_eq!(record.best_objective, Some(q.to_user_sense(value)));
        let bound = bundle.problem.inequalities()[0].bound();
        assert!(record.best_lhs.unwrap() <= bound);
    }

    #[test]
    fn cardinality_sweep_reports_reference_slack_counts() {
        let problem = attach_cardinality_constraint(QuboMatrix::zero(2500), 50).unwrap();
        let bundle = InstanceBundle {
            name: "cardinality-2500".to_string(),
            provenance: Provenance::Generated {
                seed: 0,
                params: "kind=cardinality".to_string(),
            },
            problem,
        };
        let params = quick_params(1, 32);
        let records = rho_sweep(&bundle, &[1, 10, 100], &[PenaltyWeight::Auto], &params, 1)
            .unwrap();
        let counts: Vec<usize> = records.iter().map(|r| r.slack_count).collect();
        assert_eq!(counts, vec![11, 7, 4]);
        for record in &records {
            assert!(record.error.is_empty(), "{}", record.error);
            assert_eq!(record.augmented_dimension, 2500 + record.slack_count);
        }
    }

    #[test]
    fn sweeps_are_invariant_to_worker_count() {
        let bundle = generate_qkp(12, 50, 7).unwrap();
        let params = quick_params(9, 2_000);
        let rhos = [1, 3, 5];
        let penalties = [PenaltyWeight::Auto, PenaltyWeight::Fixed(50_000)];
        let one = rho_sweep(&bundle, &rhos, &penalties, &params, 1).unwrap();
        let two = rho_sweep(&bundle, &rhos, &penalties, &params, 2).unwrap();
        let four = rho_sweep(&bundle, &rhos, &penalties, &params, 4).unwrap();
        let key = |records: &[SweepRecord]| records.iter().map(comparable).collect::<Vec<_>>();
        assert_eq!(key(&one), key(&two));
        assert_eq!(key(&one), key(&four));
        assert_eq!(one.len(), 6);
    }

    #[test]
    fn starved_sweeps_never_report_an_infeasible_best() {
        let bundle = generate_qkp(14, 75, 21).unwrap();
        let bound = bundle.problem.inequalities()[0].bound();
        for iterations in [0, 1, 16] {
            let params = quick_params(2, iterations);
            let records =
                rho_sweep(&bundle, &[1, 7, 50], &[PenaltyWeight::Auto], &params, 1).unwrap();
            for record in &records {
                assert_eq!(record.best_objective.is_some(), record.feasible);
                assert_eq!(record.best_lhs.is_some(), record.feasible);
                if let Some(lhs) = record.best_lhs {
                    assert!(lhs <= bound);
                }
            }
        }
    }

    #[test]
    fn per_cell_errors_do_not_abort_the_sweep() {
        let bundle = generate_qkp(6, 50, 4).unwrap();
        let params = quick_params(3, 500);
        // A fixed weight of zero is rejected by the transform in every
        // cell; the sweep still yields one record per cell.
        let records = rho_sweep(
            &bundle,
            &[1, 2],
            &[PenaltyWeight::Auto, PenaltyWeight::Fixed(0)],
            &params,
            1,
        )
        .unwrap();
        assert_eq!(records.len(), 4);
        for record in &records {
            match record.penalty_weight {
                0 => {
                    assert!(!record.error.is_empty());
                    assert!(!record.feasible);
                    assert_eq!(record.best_objective, None);
                }
                _ => assert!(record.error.is_empty(), "{}", record.error),
            }
        }
    }

    #[test]
    fn sweep_rejects_bad_arguments() {
        let bundle = generate_qkp(4, 50, 1).unwrap();
        let params = quick_params(1, 10);
        assert!(rho_sweep(&bundle, &[], &[PenaltyWeight::Auto], &params, 1).is_err());
        assert!(rho_sweep(&bundle, &[0], &[PenaltyWeight::Auto], &params, 1).is_err());
        assert!(rho_sweep(&bundle, &[1], &[], &params, 1).is_err());
        assert!(rho_sweep(&bundle, &[1], &[PenaltyWeight::Auto], &params, 0).is_err());
    }

    #[test]
    fn prime_sweep_list_reference_values() {
        assert_eq!(prime_sweep_list(10), vec![1, 2, 3, 5, 7]);
        assert_eq!(prime_sweep_list(2), vec![1, 2]);
        assert_eq!(prime_sweep_list(1), vec![1]);
        assert_eq!(prime_sweep_list(0), vec![1]);
    }

    #[test]
    fn prime_sweep_recovers_the_base_optimum() {
        let bundle = generate_qkp(6, 75, 11).unwrap();
        let bound = bundle.problem.inequalities()[0].bound();
        let rhos = prime_sweep_list(bound);
        assert!(rhos.len() > 3);
        let params = quick_params(17, 4_000);
        let records = rho_sweep(&bundle, &rhos, &[PenaltyWeight::Auto], &params, 1).unwrap();

        let oracle = brute_force_constrained(&bundle.problem).unwrap();
        let (value, _) = oracle.best.unwrap();
        let target = bundle.problem.objective().to_user_sense(value);
        let best_over_sweep = records
            .iter()
            .filter_map(|r| r.best_objective)
            .max()
            .unwrap();
        assert_eq!(best_over_sweep, target);
    }

    #[test]
    fn size_accounting_matches_the_penalty_structure() {
        let bundle = generate_qkp(9, 100, 13).unwrap();
        let n = bundle.problem.dimension();
        let bound = bundle.problem.inequalities()[0].bound();
        let params = quick_params(1, 64);
        for &rho in &[1i64, 3, 10] {
            let records =
                rho_sweep(&bundle, &[rho], &[PenaltyWeight::Auto], &params, 1).unwrap();
            let record = &records[0];
            let m = record.slack_count;
            assert_eq!(m as u32, slack_count(bound, rho).unwrap());

            let config = TransformConfig::with_rho(rho);
            let augmented = transform(&bundle.problem, &config).unwrap();
            let encoding = augmented.penalties()[0].encoding().unwrap();
            let pad_cancel =
                usize::from(encoding.pad > 0 && encoding.pad.count_ones() == 1);
            let new_linear = augmented
                .matrix()
                .entries()
                .filter(|&(i, j, _)| i == j && i >= n)
                .count();
            let new_offdiag = augmented
                .matrix()
                .entries()
                .filter(|&(i, j, _)| i != j && j >= n)
                .count();
            // All weights are nonzero here, so the cross-term count is
            // tight; one slack diagonal drops exactly when the doubled
            // pad equals one of the powers of two.
            assert_eq!(new_linear, m - pad_cancel, "rho={rho}");
            assert_eq!(new_offdiag, n * m + m * (m - 1) / 2, "rho={rho}");
            assert_eq!(
                record.augmented_nonzeros,
                augmented.matrix().entry_count()
            );
        }
    }

    fn stub_record(instance: &str, sense: &str, rho: i64, objective: Option<i64>) -> SweepRecord {
        SweepRecord {
            instance: instance.to_string(),
            sense: sense.to_string(),
            dimension: 4,
            density_percent: Some(50),
            rho,
            penalty_weight: 10,
            effective_weight: 10 * rho * rho,
            slack_count: 2,
            augmented_dimension: 6,
            augmented_nonzeros: 12,
            best_objective: objective,
            best_lhs: objective.map(|_| 3),
            feasible: objective.is_some(),
            iterations: 100,
            restarts: 1,
            wall_seconds: 0.5,
            trace_ref: format!("{instance}-rho{rho}-M10.trace.csv"),
            error: String::new(),
            trace: Vec::new(),
        }
    }

    #[test]
    fn deviation_reference_values() {
        let records = vec![
            stub_record("a", "max", 1, Some(100)),
            stub_record("a", "max", 10, Some(98)),
        ];
        let rows = deviation_stats(&records).unwrap();
        let deviations: Vec<f64> = rows.iter().map(|r| r.deviation_percent).collect();
        assert_eq!(deviations, vec![0.0, 2.0]);

        let single = deviation_stats(&records[..1]).unwrap();
        assert_eq!(single[0].deviation_percent, 0.0);

        let equal = vec![
            stub_record("a", "max", 1, Some(55)),
            stub_record("a", "max", 10, Some(55)),
            stub_record("a", "max", 100, Some(55)),
        ];
        assert!(deviation_stats(&equal)
            .unwrap()
            .iter()
            .all(|r| r.deviation_percent == 0.0));
    }

    #[test]
    fn deviation_handles_minimization_and_skips_infeasible_cells() {
        let records = vec![
            stub_record("a", "min", 1, Some(50)),
            stub_record("a", "min", 10, Some(55)),
            stub_record("a", "min", 100, None),
        ];
        let rows = deviation_stats(&records).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].deviation_percent, 0.0);
        assert_eq!(rows[1].deviation_percent, 10.0);
    }

    #[test]
    fn deviation_rejects_empty_and_mixed_input() {
        assert!(deviation_stats(&[]).is_err());
        let infeasible = vec![stub_record("a", "max", 1, None)];
        assert!(deviation_stats(&infeasible).is_err());
        let mixed = vec![
            stub_record("a", "max", 1, Some(5)),
            stub_record("b", "min", 1, Some(5)),
        ];
        assert!(deviation_stats(&mixed).is_err());
    }

    #[test]
    fn deviation_groups_per_instance() {
        let records = vec![
            stub_record("a", "max", 1, Some(200)),
            stub_record("a", "max", 10, Some(150)),
            stub_record("b", "max", 1, Some(40)),
            stub_record("b", "max", 10, Some(50)),
        ];
        let rows = deviation_stats(&records).unwrap();
        assert_eq!(rows[0].deviation_percent, 0.0);
        assert_eq!(rows[1].deviation_percent, 25.0);
        assert_eq!(rows[2].deviation_percent, 20.0);
        assert_eq!(rows[3].deviation_percent, 0.0);
    }

    #[test]
    fn win_counts_count_ties_for_every_winner() {
        let records = vec![
            stub_record("a", "max", 1, Some(100)),
            stub_record("a", "max", 10, Some(98)),
            stub_record("b", "max", 1, Some(70)),
            stub_record("b", "max", 10, Some(70)),
        ];
        let wins = win_counts(&records).unwrap();
        assert_eq!(wins.len(), 2);
        assert_eq!((wins[0].rho, wins[0].wins, wins[0].cells), (1, 2, 2));
        assert_eq!((wins[1].rho, wins[1].wins, wins[1].cells), (10, 1, 2));
    }

    #[test]
    fn records_csv_round_trips() {
        let bundle = generate_qkp(7, 50, 2).unwrap();
        let params = quick_params(4, 800);
        let records =
            rho_sweep(&bundle, &[1, 4], &[PenaltyWeight::Auto], &params, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.csv");
        export_records_csv(&records, &path).unwrap();
        let back = read_records_csv(&path).unwrap();
        let strip = |rs: &[SweepRecord]| {
            rs.iter()
                .cloned()
                .map(|mut r| {
                    r.trace = Vec::new();
                    r
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(back, strip(&records));
    }

    #[test]
    fn empty_record_export_writes_only_the_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        export_records_csv(&[], &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("instance,sense,dimension"));
        assert!(read_records_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn trace_csv_has_one_line_per_point_plus_header() {
        let trace: Vec<TracePoint> = (0..5)
            .map(|k| TracePoint {
                iteration: k,
                elapsed_seconds: k as f64 * 0.25,
                value: 10 - k as i64,
            })
            .collect();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("trace.csv");
        export_trace_csv(&trace, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert_eq!(text.lines().next().unwrap(), "elapsed_seconds,best_objective");
    }

    #[test]
    fn stats_and_wins_csv_round_trip() {
        let records = vec![
            stub_record("a", "max", 1, Some(100)),
            stub_record("a", "max", 10, Some(98)),
        ];
        let rows = deviation_stats(&records).unwrap();
        let wins = win_counts(&records).unwrap();
        let dir = tempfile::tempdir().unwrap();

        let stats_path = dir.path().join("stats.csv");
        export_stats_csv(&rows, &stats_path).unwrap();
        let mut reader = csv::Reader::from_path(&stats_path).unwrap();
        let back: Vec<DeviationRow> = reader.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(back, rows);

        let wins_path = dir.path().join("wins.csv");
        export_wins_csv(&wins, &wins_path).unwrap();
        let mut reader = csv::Reader::from_path(&wins_path).unwrap();
        let back: Vec<WinCount> = reader.deserialize().map(|r| r.unwrap()).collect();
        assert_eq!(back, wins);
    }

    #[test]
    fn sweep_traces_are_monotone_and_referenced() {
        let bundle = generate_qkp(10, 50, 6).unwrap();
        let params = quick_params(8, 3_000);
        let records =
            rho_sweep(&bundle, &[1, 10], &[PenaltyWeight::Auto], &params, 1).unwrap();
        for record in &records {
            assert!(!record.trace.is_empty());
            assert!(record
                .trace
                .windows(2)
                .all(|w| w[1].value < w[0].value && w[1].iteration > w[0].iteration));
            assert!(record.trace_ref.ends_with(".trace.csv"));
            assert!(record.trace_ref.contains(&format!("rho{}", record.rho)));
        }
    }
}
