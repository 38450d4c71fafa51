//! Penalty embedding of linearly constrained binary quadratic programs
//! into unconstrained QUBO form.
//!
//! The pipeline this crate implements:
//!
//! 1. Start from `min x' Q x` subject to linear inequalities `a.x <= b`
//!    (and optionally equalities) over binary `x` ([`ConstrainedProblem`]).
//! 2. Normalize each inequality to nonnegative coefficients by
//!    complementing variables, pick a scale divisor `rho`, and encode the
//!    slack range with binary expansion ([`mod@transform`] module). The result
//!    is a single unconstrained matrix whose penalty blocks vanish exactly
//!    on the encoded feasible set.
//! 3. Minimize the augmented matrix with a tabu-search heuristic built on
//!    incremental one-flip evaluation ([`solver`] module), or exhaustively
//!    with the brute-force [`oracle`] on small instances.
//! 4. Map the augmented optimum back to original variables and check
//!    feasibility ([`AugmentedQubo::recover`](transform::AugmentedQubo::recover)).
//!
//! Scaling by `rho > 1` shrinks the slack register from
//! `ceil(log2(b + 1))` bits to `ceil(log2(floor(b / rho) + 1))` bits at
//! the cost of coarsening the zero-penalty set to multiples of `rho`;
//! the penalty weight is rescaled by `rho^2` so all coefficients stay
//! integral. The [`harness`] module sweeps `rho` over instance batches
//! and tabulates the quality/size trade.
//!
//! All arithmetic is exact `i64` with headroom enforced at construction,
//! and all randomness flows from an explicitly seeded [`rng::SplitMix64`],
//! so every result in this crate is bit-reproducible across platforms.

pub mod book;
pub mod error;
pub mod harness;
pub mod io;
pub mod oracle;
pub mod qubo;
pub mod rng;
pub mod solver;
pub mod transform;

pub use error::{Error, Result};
pub use harness::{
    deviation_stats, export_records_csv, export_stats_csv, export_trace_csv, export_wins_csv,
    prime_sweep_list, read_records_csv, rho_sweep, win_counts, DeviationRow, SweepRecord,
    WinCount,
};
pub use io::{
    attach_cardinality_constraint, generate_qkp, read_native, read_orlib_bqp, read_qkp,
    write_native, InstanceBundle, Provenance,
};
pub use oracle::{brute_force_constrained, brute_force_qubo, verify_lemma, OracleReport};
pub use qubo::{BinaryAssignment, GainCache, QuboBuilder, QuboMatrix, Sense};
pub use rng::SplitMix64;
pub use solver::{path_relink, solve, solve_many, SolveResult, SolverParams, TracePoint};
pub use transform::{
    transform, AugmentedQubo, ConstrainedProblem, LinearEquality, LinearInequality,
    PenaltyWeight, SlackEncoding, TransformConfig, VariableMap, VariableRole,
};
