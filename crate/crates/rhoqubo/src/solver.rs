//! Tabu search over binary quadratic forms.
//!
//! One iteration flips the admissible variable with the best gain, taken
//! from the incrementally maintained [`GainCache`](crate::qubo::GainCache), so a move costs
//! `O(n)` for selection plus `O(degree)` for the update. Recently
//! flipped variables are tabu for `tenure` iterations unless flipping
//! them would beat the global best (aspiration). Ties between equally
//! good moves break by seeded reservoir sampling, which keeps runs
//! bit-reproducible.
//!
//! When `restart_after` consecutive moves fail to improve the best
//! (by default a small multiple of the dimension), the search
//! restarts: either from the best point on a greedy path between
//! two random elite solutions, or from a fresh random assignment. Path
//! relinking is skipped while its last attempt failed to improve, so
//! stalled pools fall back to random diversification automatically. A
//! restart consumes one iteration from the budget.
//!
//! Setting `tenure` to zero degenerates the search into steepest
//! descent: only strictly improving flips are admissible and every
//! local optimum forces a restart.
//!
//! The wall clock is sampled once every 256 iterations, so time limits
//! and trace timestamps are coarse by up to that many moves.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qubo::{BinaryAssignment, QuboMatrix};
use crate::rng::SplitMix64;

/// Interval between full re-evaluations of the incremental objective,
/// applied in all build profiles.
const SPOT_CHECK_MASK: u64 = (1 << 14) - 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverParams {
    pub seed: u64,
    pub iteration_limit: u64,
    pub time_limit: Option<Duration>,
    /// Iterations a flipped variable stays tabu; `None` picks
    /// `max(10, n / 20)`. Zero selects steepest descent.
    pub tenure: Option<u64>,
    /// Consecutive non-improving moves before a restart; `None` picks
    /// `max(100, 5 * n)`, zero disables restarts. Penalty-embedded
    /// matrices have deep, narrow valleys that reward frequent
    /// diversification, so the default scales with the dimension rather
    /// than staying fixed.
    pub restart_after: Option<u64>,
    pub elite_capacity: usize,
    /// Minimum Hamming distance between elite solutions; `None` picks
    /// `max(1, n / 10)`.
    pub elite_min_distance: Option<usize>,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            seed: 0,
            iteration_limit: 100_000,
            time_limit: None,
            tenure: None,
            restart_after: None,
            elite_capacity: 8,
            elite_min_distance: None,
        }
    }
}

/// One point on the improvement trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: u64,
    pub elapsed_seconds: f64,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best: BinaryAssignment,
    /// Internal (minimization) objective of `best`.
    pub best_value: i64,
    pub iterations: u64,
    pub restarts: u64,
    pub relinks: u64,
    /// Global-best improvements in order; values strictly decrease.
    pub trace: Vec<TracePoint>,
    pub elapsed_seconds: f64,
    /// Final elite pool, best first.
    pub elites: Vec<(i64, BinaryAssignment)>,
}

impl SolveResult {
    /// Objective of `best` in the user's optimization sense.
    pub fn user_value(&self, q: &QuboMatrix) -> i64 {
        q.to_user_sense(self.best_value)
    }
}

/// Offer a candidate to the elite pool, keeping members sorted by value
/// and pairwise at least `min_distance` apart. A close member is
/// replaced when the candidate beats it; otherwise the candidate is
/// dropped regardless of value, trading a little quality for diversity.
fn offer_elite(
    pool: &mut Vec<(i64, BinaryAssignment)>,
    capacity: usize,
    min_distance: usize,
    value: i64,
    x: &BinaryAssignment,
) {
    if capacity == 0 {
        return;
    }
    for entry in pool.iter_mut() {
        if entry.1.hamming_distance(x) < min_distance {
            if value < entry.0 {
                *entry = (value, x.clone());
                pool.sort_by_key(|e| e.0);
            }
            return;
        }
    }
    if pool.len() < capacity {
        pool.push((value, x.clone()));
    } else if value < pool.last().map_or(i64::MAX, |e| e.0) {
        *pool.last_mut().unwrap() = (value, x.clone());
    } else {
        return;
    }
    pool.sort_by_key(|e| e.0);
}

/// Greedy walk from `from` to `to`: repeatedly flip the differing
/// variable with the best gain (ties broken by `rng`) until the guide is
/// reached, returning the best assignment seen including both endpoints.
pub fn path_relink(
    q: &QuboMatrix,
    from: &BinaryAssignment,
    to: &BinaryAssignment,
    rng: &mut SplitMix64,
) -> Result<(i64, BinaryAssignment)> {
    if from.len() != q.dimension() || to.len() != q.dimension() {
        return Err(Error::DimensionMismatch {
            expected: q.dimension(),
            found: if from.len() != q.dimension() {
                from.len()
            } else {
                to.len()
            },
        });
    }
    let mut x = from.clone();
    let mut cache = q.init_gains(&x)?;
    let mut diff: Vec<usize> = (0..q.dimension()).filter(|&i| from.get(i) != to.get(i)).collect();
    let mut best_value = cache.objective();
    let mut best = x.clone();
    while !diff.is_empty() {
        let mut best_gain = i64::MAX;
        let mut ties: u64 = 0;
        let mut chosen = 0usize;
        for (pos, &i) in diff.iter().enumerate() {
            let g = cache.gain(i);
            if g < best_gain {
                best_gain = g;
                ties = 1;
                chosen = pos;
            } else if g == best_gain {
                ties += 1;
                if rng.bounded(ties) == 0 {
                    chosen = pos;
                }
            }
        }
        let i = diff.swap_remove(chosen);
        q.apply_flip(&mut x, i, &mut cache)?;
        if cache.objective() < best_value {
            best_value = cache.objective();
            best = x.clone();
        }
    }
    debug_assert_eq!(&x, to);
    Ok((best_value, best))
}

/// Minimize `q` by tabu search under the given parameters.
pub fn solve(q: &QuboMatrix, params: &SolverParams) -> Result<SolveResult> {
    let n = q.dimension();
    let start = Instant::now();
    if n == 0 {
        let value = q.offset();
        return Ok(SolveResult {
            best: BinaryAssignment::zeros(0),
            best_value: value,
            iterations: 0,
            restarts: 0,
            relinks: 0,
            trace: vec![TracePoint {
                iteration: 0,
                elapsed_seconds: 0.0,
                value,
            }],
            elapsed_seconds: start.elapsed().as_secs_f64(),
            elites: Vec::new(),
        });
    }

    let tenure = params.tenure.unwrap_or_else(|| (n as u64 / 20).max(10));
    let restart_after = params
        .restart_after
        .unwrap_or_else(|| (5 * n as u64).max(100));
    let min_distance = params.elite_min_distance.unwrap_or_else(|| (n / 10).max(1));
    let time_limit = params.time_limit.map(|d| d.as_secs_f64());

    let mut rng = SplitMix64::new(params.seed);
    let mut x = BinaryAssignment::random(n, &mut rng);
    let mut cache = q.init_gains(&x)?;

    let mut best = x.clone();
    let mut best_value = cache.objective();
    let mut best_since_restart = (best_value, x.clone());
    let mut trace = vec![TracePoint {
        iteration: 0,
        elapsed_seconds: 0.0,
        value: best_value,
    }];

    let mut tabu_until = vec![0u64; n];
    let mut pool: Vec<(i64, BinaryAssignment)> = Vec::new();
    offer_elite(&mut pool, params.elite_capacity, min_distance, best_value, &x);

    let mut iter: u64 = 0;
    let mut elapsed = 0.0f64;
    let mut non_improving: u64 = 0;
    let mut accepted: u64 = 0;
    let mut restarts: u64 = 0;
    let mut relinks: u64 = 0;
    let mut relink_cooldown = false;

    'search: while iter < params.iteration_limit {
        if iter & 0xFF == 0 {
            elapsed = start.elapsed().as_secs_f64();
            if let Some(limit) = time_limit {
                if elapsed >= limit {
                    break 'search;
                }
            }
        }

        let stalled = restart_after > 0 && non_improving >= restart_after;

        let mut chosen: Option<usize> = None;
        let mut chosen_tabu = false;
        if !stalled {
            let value = cache.objective();
            let mut best_gain = i64::MAX;
            let mut ties: u64 = 0;
            for (i, &until) in tabu_until.iter().enumerate() {
                let g = cache.gain(i);
                let is_tabu = until > iter;
                let admissible = if tenure == 0 {
                    g < 0
                } else {
                    !is_tabu || value + g < best_value
                };
                if !admissible {
                    continue;
                }
                if g < best_gain {
                    best_gain = g;
                    ties = 1;
                    chosen = Some(i);
                    chosen_tabu = is_tabu;
                } else if g == best_gain {
                    ties += 1;
                    if rng.bounded(ties) == 0 {
                        chosen = Some(i);
                        chosen_tabu = is_tabu;
                    }
                }
            }
        }

        match chosen {
            Some(i) => {
                q.apply_flip(&mut x, i, &mut cache)?;
                accepted += 1;
                if tenure > 0 {
                    tabu_until[i] = iter.saturating_add(tenure);
                }
                let value = cache.objective();
                #[cfg(debug_assertions)]
                if n <= 64 {
                    assert_eq!(value, q.evaluate(&x)?, "incremental objective drifted");
                }
                if accepted & SPOT_CHECK_MASK == 0 {
                    assert_eq!(value, q.evaluate(&x)?, "incremental objective drifted");
                }
                if chosen_tabu {
                    debug_assert!(value < best_value, "tabu move accepted without aspiration");
                }
                if value < best_since_restart.0 {
                    best_since_restart = (value, x.clone());
                }
                if value < best_value {
                    best_value = value;
                    best = x.clone();
                    non_improving = 0;
                    trace.push(TracePoint {
                        iteration: iter + 1,
                        elapsed_seconds: elapsed,
                        value,
                    });
                    offer_elite(&mut pool, params.elite_capacity, min_distance, value, &x);
                } else {
                    non_improving += 1;
                }
            }
            None => {
                // Restart: either no admissible move remains or the
                // improvement counter ran out.
                restarts += 1;
                offer_elite(
                    &mut pool,
                    params.elite_capacity,
                    min_distance,
                    best_since_restart.0,
                    &best_since_restart.1,
                );
                tabu_until.fill(0);
                non_improving = 0;

                if !relink_cooldown && pool.len() >= 2 {
                    relinks += 1;
                    let a = rng.bounded(pool.len() as u64) as usize;
                    let mut b = rng.bounded(pool.len() as u64 - 1) as usize;
                    if b >= a {
                        b += 1;
                    }
                    let (value, relinked) = path_relink(q, &pool[a].1, &pool[b].1, &mut rng)?;
                    relink_cooldown = value >= best_value;
                    x = relinked;
                } else {
                    relink_cooldown = false;
                    x = BinaryAssignment::random(n, &mut rng);
                }
                cache = q.init_gains(&x)?;
                let value = cache.objective();
                best_since_restart = (value, x.clone());
                if value < best_value {
                    best_value = value;
                    best = x.clone();
                    trace.push(TracePoint {
                        iteration: iter + 1,
                        elapsed_seconds: elapsed,
                        value,
                    });
                    offer_elite(&mut pool, params.elite_capacity, min_distance, value, &x);
                }
            }
        }
        iter += 1;
    }

    offer_elite(
        &mut pool,
        params.elite_capacity,
        min_distance,
        best_since_restart.0,
        &best_since_restart.1,
    );
    assert_eq!(best_value, q.evaluate(&best)?, "best solution failed re-evaluation");

    Ok(SolveResult {
        best,
        best_value,
        iterations: iter,
        restarts,
        relinks,
        trace,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        elites: pool,
    })
}

/// Run independent replicas with seeds drawn from one root stream,
/// optionally in parallel. Results come back in replica order and do not
/// depend on the thread count.
pub fn solve_many(
    q: &QuboMatrix,
    params: &SolverParams,
    replicas: usize,
    threads: usize,
) -> Result<Vec<SolveResult>> {
    let mut seeder = SplitMix64::new(params.seed);
    let seeds: Vec<u64> = (0..replicas).map(|_| seeder.next_u64()).collect();
    let run = |seed: u64| {
        solve(
            q,
            &SolverParams {
                seed,
                ..params.clone()
            },
        )
    };
    if threads == 1 {
        seeds.into_iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        pool.install(|| seeds.into_par_iter().map(run).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_force_qubo;
    use crate::qubo::QuboBuilder;

    fn random_matrix(n: usize, rng: &mut SplitMix64) -> QuboMatrix {
        let mut b = QuboBuilder::new(n);
        for i in 0..n {
            b.add(i, i, rng.range_i64(-30, 30));
            for j in i + 1..n {
                if rng.bounded(100) < 50 {
                    b.add(i, j, rng.range_i64(-20, 20));
                }
            }
        }
        b.build().unwrap()
    }

    #[test]
    fn descends_to_the_all_ones_corner() {
        let q = QuboMatrix::from_diagonal(vec![-1, -1, -1]).unwrap();
        let params = SolverParams {
            seed: 1,
            iteration_limit: 16,
            ..SolverParams::default()
        };
        let result = solve(&q, &params).unwrap();
        assert_eq!(result.best_value, -3);
        assert_eq!(result.best.count_ones(), 3);
        assert!(result.iterations <= 16);
    }

    #[test]
    fn matches_the_oracle_on_small_instances() {
        let mut rng = SplitMix64::new(31337);
        let mut hits = 0;
        for round in 0..40 {
            let n = 4 + rng.bounded(7) as usize;
            let q = random_matrix(n, &mut rng);
            let oracle = brute_force_qubo(&q).unwrap();
            let params = SolverParams {
                seed: rng.next_u64(),
                iteration_limit: 3_000,
                restart_after: Some(200),
                ..SolverParams::default()
            };
            let got = solve(&q, &params).unwrap();
            assert!(got.best_value >= oracle.best_value, "round {round}");
            if got.best_value == oracle.best_value {
                hits += 1;
            }
        }
        assert!(hits >= 38, "only {hits}/40 runs reached the exact optimum");
    }

    #[test]
    fn identical_seeds_give_identical_runs() {
        let mut rng = SplitMix64::new(8);
        let q = random_matrix(24, &mut rng);
        let params = SolverParams {
            seed: 777,
            iteration_limit: 20_000,
            restart_after: Some(500),
            ..SolverParams::default()
        };
        let a = solve(&q, &params).unwrap();
        let b = solve(&q, &params).unwrap();
        assert_eq!(a.best, b.best);
        assert_eq!(a.best_value, b.best_value);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.restarts, b.restarts);
        assert_eq!(a.relinks, b.relinks);
        assert_eq!(a.elites, b.elites);
        let a_points: Vec<(u64, i64)> = a.trace.iter().map(|p| (p.iteration, p.value)).collect();
        let b_points: Vec<(u64, i64)> = b.trace.iter().map(|p| (p.iteration, p.value)).collect();
        assert_eq!(a_points, b_points);
    }

    #[test]
    fn trace_is_strictly_improving() {
        let mut rng = SplitMix64::new(5150);
        let q = random_matrix(32, &mut rng);
        let params = SolverParams {
            seed: 12,
            iteration_limit: 30_000,
            restart_after: Some(400),
            ..SolverParams::default()
        };
        let result = solve(&q, &params).unwrap();
        assert!(result.trace.len() >= 2);
        for pair in result.trace.windows(2) {
            assert!(pair[1].value < pair[0].value);
            assert!(pair[1].iteration > pair[0].iteration);
        }
        assert_eq!(result.trace.last().unwrap().value, result.best_value);
    }

    #[test]
    fn zero_tenure_ends_at_a_one_flip_optimum() {
        let mut rng = SplitMix64::new(404);
        let q = random_matrix(12, &mut rng);
        let params = SolverParams {
            seed: 9,
            iteration_limit: 3_000,
            tenure: Some(0),
            restart_after: Some(0),
            ..SolverParams::default()
        };
        let result = solve(&q, &params).unwrap();
        for i in 0..12 {
            assert!(
                q.flip_delta(&result.best, i).unwrap() >= 0,
                "bit {i} still improves the reported best"
            );
        }
        // Steepest descent on a flat start must have restarted at least
        // once to keep consuming its budget.
        assert!(result.restarts > 0);
        assert_eq!(result.iterations, 3_000);
    }

    #[test]
    fn restarts_consume_iterations_on_flat_landscapes() {
        let q = QuboMatrix::zero(8);
        let params = SolverParams {
            seed: 2,
            iteration_limit: 100,
            tenure: Some(0),
            restart_after: Some(0),
            ..SolverParams::default()
        };
        let result = solve(&q, &params).unwrap();
        assert_eq!(result.iterations, 100);
        assert!(result.restarts > 10);
        assert_eq!(result.best_value, 0);
    }

    #[test]
    fn zero_time_limit_stops_immediately() {
        let q = QuboMatrix::from_diagonal(vec![-1; 16]).unwrap();
        let params = SolverParams {
            seed: 3,
            iteration_limit: 1_000_000,
            time_limit: Some(Duration::ZERO),
            ..SolverParams::default()
        };
        let result = solve(&q, &params).unwrap();
        assert_eq!(result.iterations, 0);
        assert_eq!(result.best_value, q.evaluate(&result.best).unwrap());
    }

    #[test]
    fn relink_returns_the_best_point_on_the_path() {
        let mut rng = SplitMix64::new(606);
        let q = random_matrix(14, &mut rng);
        for _ in 0..20 {
            let from = BinaryAssignment::random(14, &mut rng);
            let to = BinaryAssignment::random(14, &mut rng);
            let (value, best) = path_relink(&q, &from, &to, &mut rng).unwrap();
            assert_eq!(value, q.evaluate(&best).unwrap());
            assert!(value <= q.evaluate(&from).unwrap());
            assert!(value <= q.evaluate(&to).unwrap());
        }
    }

    #[test]
    fn relink_between_adjacent_points_considers_both() {
        let q = QuboMatrix::from_diagonal(vec![5]).unwrap();
        let mut rng = SplitMix64::new(1);
        let zero = BinaryAssignment::zeros(1);
        let one = BinaryAssignment::from_u01(&[1]).unwrap();
        let (value, best) = path_relink(&q, &one, &zero, &mut rng).unwrap();
        assert_eq!(value, 0);
        assert_eq!(best, zero);
    }

    #[test]
    fn solve_many_is_ordered_and_reproducible() {
        let mut rng = SplitMix64::new(2u64.pow(20));
        let q = random_matrix(20, &mut rng);
        let params = SolverParams {
            seed: 44,
            iteration_limit: 5_000,
            restart_after: Some(300),
            ..SolverParams::default()
        };
        let sequential = solve_many(&q, &params, 4, 1).unwrap();
        let parallel = solve_many(&q, &params, 4, 2).unwrap();
        assert_eq!(sequential.len(), 4);
        for (a, b) in sequential.iter().zip(&parallel) {
            assert_eq!(a.best, b.best);
            assert_eq!(a.best_value, b.best_value);
            assert_eq!(a.iterations, b.iterations);
        }
        // Replica seeds differ, so the search paths must too, even when
        // every run lands on the same optimum.
        let traces: Vec<Vec<(u64, i64)>> = sequential
            .iter()
            .map(|r| r.trace.iter().map(|p| (p.iteration, p.value)).collect())
            .collect();
        assert!(traces.iter().any(|t| t != &traces[0]));
    }

    #[test]
    fn penalty_embedded_knapsack_is_solved_at_default_cadence() {
        // Penalty embeddings put the feasible set in isolated valleys
        // separated by walls proportional to the squared slack weights,
        // so a restart cadence fixed far above the dimension strands the
        // search in its first few basins. The default cadence scales
        // with the dimension; this pins that it reaches the exact
        // optimum on a 21-variable embedding (12 original + 9 slack).
        let bundle = crate::io::generate_qkp(12, 50, 3).unwrap();
        let config = crate::transform::TransformConfig {
            rho: 1,
            penalty: crate::transform::PenaltyWeight::Auto,
        };
        let augmented = crate::transform::transform(&bundle.problem, &config).unwrap();
        let exact = brute_force_qubo(augmented.matrix()).unwrap().best_value;
        let params = SolverParams {
            seed: 0,
            iteration_limit: 100_000,
            ..SolverParams::default()
        };
        let result = solve(augmented.matrix(), &params).unwrap();
        assert_eq!(result.best_value, exact);
    }

    #[test]
    fn elite_pool_respects_capacity_and_distance() {
        let mut pool: Vec<(i64, BinaryAssignment)> = Vec::new();
        let a = BinaryAssignment::from_u01(&[0, 0, 0, 0]).unwrap();
        let b = BinaryAssignment::from_u01(&[1, 1, 1, 1]).unwrap();
        let near_a = BinaryAssignment::from_u01(&[1, 0, 0, 0]).unwrap();
        offer_elite(&mut pool, 2, 2, 10, &a);
        offer_elite(&mut pool, 2, 2, 5, &b);
        assert_eq!(pool.len(), 2);
        assert_eq!(pool[0].0, 5);
        // Too close to `a` and worse: dropped.
        offer_elite(&mut pool, 2, 2, 20, &near_a);
        assert_eq!(pool.len(), 2);
        assert!(pool.iter().all(|e| e.1 != near_a));
        // Too close to `a` but better: replaces it.
        offer_elite(&mut pool, 2, 2, 1, &near_a);
        assert_eq!(pool.len(), 2);
        assert_eq!(pool[0], (1, near_a));
    }
}
