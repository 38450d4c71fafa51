//! Exhaustive reference solvers for small instances.
//!
//! Enumeration walks assignments in Gray-code order, so consecutive
//! states differ in one bit and each step costs one flip delta. Besides
//! speed this doubles as a standing cross-check of the incremental
//! machinery: the running value is asserted against full re-evaluation
//! at the end of every walk (and throughout under `debug_assertions`).

use crate::error::{Error, Result};
use crate::qubo::{BinaryAssignment, QuboMatrix};
use crate::transform::{transform, ConstrainedProblem, PenaltyWeight, TransformConfig};

/// Largest dimension the exhaustive solvers accept.
pub const ENUMERATION_CAP: usize = 26;

/// Most optima retained in [`BruteForceResult::optima`]; the count is
/// always exact.
pub const OPTIMA_CAP: usize = 32;

/// Exact minimum of an unconstrained matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForceResult {
    pub best_value: i64,
    /// Optimal assignment with the smallest mask (bit `i` weighted
    /// `2^i`), so ties break deterministically.
    pub best: BinaryAssignment,
    pub optimum_count: u64,
    /// Up to [`OPTIMA_CAP`] optimal assignments in ascending mask order.
    pub optima: Vec<BinaryAssignment>,
}

fn mask_to_assignment(n: usize, mask: u64) -> BinaryAssignment {
    BinaryAssignment::from_bools((0..n).map(|i| mask >> i & 1 == 1).collect())
}

fn check_cap(n: usize) -> Result<()> {
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            dimension: n,
            cap: ENUMERATION_CAP,
        });
    }
    Ok(())
}

/// Keeps the smallest `OPTIMA_CAP` masks seen, in order.
fn record_mask(masks: &mut Vec<u64>, mask: u64) {
    if let Err(pos) = masks.binary_search(&mask) {
        if pos < OPTIMA_CAP {
            masks.insert(pos, mask);
            masks.truncate(OPTIMA_CAP);
        }
    }
}

/// Exhaustive minimum of `q` over all `2^n` assignments.
pub fn brute_force_qubo(q: &QuboMatrix) -> Result<BruteForceResult> {
    let n = q.dimension();
    check_cap(n)?;
    let mut bits = vec![false; n];
    let mut value = q.evaluate_raw(&bits);
    let mut mask: u64 = 0;

    let mut best_value = value;
    let mut optimum_count: u64 = 1;
    let mut masks = vec![0u64];

    for k in 1..1u64 << n {
        let bit = k.trailing_zeros() as usize;
        value += q.flip_delta_raw(&bits, bit);
        bits[bit] = !bits[bit];
        mask ^= 1 << bit;
        if value < best_value {
            best_value = value;
            optimum_count = 1;
            masks.clear();
            masks.push(mask);
        } else if value == best_value {
            optimum_count += 1;
            record_mask(&mut masks, mask);
        }
    }
    debug_assert_eq!(value, q.evaluate_raw(&bits));

    Ok(BruteForceResult {
        best_value,
        best: mask_to_assignment(n, masks[0]),
        optimum_count,
        optima: masks.into_iter().map(|m| mask_to_assignment(n, m)).collect(),
    })
}

/// Exact feasible minimum of a constrained problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedBruteForce {
    /// Smallest objective over feasible assignments, with the smallest
    /// optimal mask; `None` when nothing is feasible.
    pub best: Option<(i64, BinaryAssignment)>,
    pub feasible_count: u64,
    pub optimum_count: u64,
}

/// Enumerate all assignments, tracking every constraint's left side
/// incrementally alongside the objective.
pub fn brute_force_constrained(problem: &ConstrainedProblem) -> Result<ConstrainedBruteForce> {
    let n = problem.dimension();
    check_cap(n)?;
    let q = problem.objective();
    let ineqs = problem.inequalities();
    let eqs = problem.equalities();

    let mut bits = vec![false; n];
    let mut value = q.evaluate_raw(&bits);
    let mut mask: u64 = 0;
    let mut ineq_lhs = vec![0i64; ineqs.len()];
    let mut eq_lhs = vec![0i64; eqs.len()];

    let mut best_value = i64::MAX;
    let mut best_mask = 0u64;
    let mut feasible_count: u64 = 0;
    let mut optimum_count: u64 = 0;

    let consider = |value: i64,
                        mask: u64,
                        ineq_lhs: &[i64],
                        eq_lhs: &[i64],
                        best_value: &mut i64,
                        best_mask: &mut u64,
                        feasible_count: &mut u64,
                        optimum_count: &mut u64| {
        let feasible = ineq_lhs
            .iter()
            .zip(ineqs)
            .all(|(&lhs, ineq)| lhs <= ineq.bound())
            && eq_lhs.iter().zip(eqs).all(|(&lhs, eq)| lhs == eq.rhs());
        if !feasible {
            return;
        }
        *feasible_count += 1;
        if value < *best_value {
            *best_value = value;
            *best_mask = mask;
            *optimum_count = 1;
        } else if value == *best_value {
            *optimum_count += 1;
            *best_mask = (*best_mask).min(mask);
        }
    };

    consider(
        value,
        mask,
        &ineq_lhs,
        &eq_lhs,
        &mut best_value,
        &mut best_mask,
        &mut feasible_count,
        &mut optimum_count,
    );
    for k in 1..1u64 << n {
        let bit = k.trailing_zeros() as usize;
        value += q.flip_delta_raw(&bits, bit);
        bits[bit] = !bits[bit];
        mask ^= 1 << bit;
        let sign = if bits[bit] { 1 } else { -1 };
        for (lhs, ineq) in ineq_lhs.iter_mut().zip(ineqs) {
            *lhs += sign * ineq.coeffs()[bit];
        }
        for (lhs, eq) in eq_lhs.iter_mut().zip(eqs) {
            *lhs += sign * eq.coeffs()[bit];
        }
        consider(
            value,
            mask,
            &ineq_lhs,
            &eq_lhs,
            &mut best_value,
            &mut best_mask,
            &mut feasible_count,
            &mut optimum_count,
        );
    }
    debug_assert_eq!(value, q.evaluate_raw(&bits));

    Ok(ConstrainedBruteForce {
        best: (feasible_count > 0).then(|| (best_value, mask_to_assignment(n, best_mask))),
        feasible_count,
        optimum_count,
    })
}

/// Exact outcome of scaling one problem by `rho`, computed two ways.
///
/// The grid route filters original assignments by admissibility of every
/// left side; the augmented route enumerates the expanded penalty matrix
/// and recovers. Both must land on the same value, and the scaled optimum
/// equals the true optimum exactly when the precondition holds: some
/// feasible optimum already sits on the `rho` grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleReport {
    pub rho: i64,
    /// Exact constrained optimum.
    pub base_value: i64,
    /// Exact optimum over assignments whose left sides the scaled
    /// encodings admit.
    pub grid_value: i64,
    /// Exact minimum of the augmented penalty matrix.
    pub augmented_value: i64,
    /// Some constrained optimum lies on the grid.
    pub precondition: bool,
    /// The augmented optimum recovers to a feasible assignment achieving
    /// `base_value`.
    pub matches: bool,
    /// `grid_value - base_value`; zero exactly under the precondition.
    pub degradation: i64,
    /// Recovered original-variable argmin of the augmented matrix.
    pub recovered: BinaryAssignment,
}

/// Compare the exact optimum of `problem` against its `rho`-scaled
/// embedding (with the automatic dominating weight), by exhaustive
/// enumeration on both sides.
pub fn verify_lemma(problem: &ConstrainedProblem, rho: i64) -> Result<OracleReport> {
    let n = problem.dimension();
    check_cap(n)?;
    let base = brute_force_constrained(problem)?;
    let (base_value, _) = base.best.ok_or_else(|| {
        Error::InvalidParameter("problem has no feasible assignment".to_string())
    })?;

    let config = TransformConfig {
        rho,
        penalty: PenaltyWeight::Auto,
    };
    let aug = transform(problem, &config)?;

    // Grid route: walk original assignments, map into embedded
    // coordinates, and keep those admitted by every encoding.
    let map = aug.variable_map();
    let mut grid_value = i64::MAX;
    let mut grid_hits_base = false;
    for mask in 0..1u64 << n {
        let x = mask_to_assignment(n, mask);
        let mut on_grid = true;
        for record in aug.penalties() {
            match record.encoding() {
                Some(enc) => {
                    let lhs: i64 = record
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| {
                            let bit = x.get(i) ^ map.is_complemented(i);
                            if bit {
                                c
                            } else {
                                0
                            }
                        })
                        .sum();
                    if !enc.admits(lhs) {
                        on_grid = false;
                        break;
                    }
                }
                None => {
                    // Equalities stay exact at every scale.
                    let lhs: i64 = record
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(i, &c)| if x.get(i) { c } else { 0 })
                        .sum();
                    if lhs + record.constant() != 0 {
                        on_grid = false;
                        break;
                    }
                }
            }
        }
        if !on_grid {
            continue;
        }
        let value = problem.objective().evaluate(&x)?;
        grid_value = grid_value.min(value);
        if value == base_value {
            grid_hits_base = true;
        }
    }

    let bf = brute_force_qubo(aug.matrix())?;
    let recovered = aug.recover(&bf.best)?.assignment;
    let matches = bf.best_value == base_value
        && problem.check_feasible(&recovered)?
        && problem.objective().evaluate(&recovered)? == base_value;

    Ok(OracleReport {
        rho,
        base_value,
        grid_value,
        augmented_value: bf.best_value,
        precondition: grid_hits_base,
        matches,
        degradation: grid_value - base_value,
        recovered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::QuboBuilder;
    use crate::rng::SplitMix64;
    use crate::transform::LinearInequality;
    use proptest::prelude::*;

    fn naive_min(q: &QuboMatrix) -> (i64, u64, u64) {
        let n = q.dimension();
        let mut best = i64::MAX;
        let mut count = 0u64;
        let mut best_mask = 0u64;
        for mask in 0..1u64 << n {
            let v = q.evaluate(&mask_to_assignment(n, mask)).unwrap();
            if v < best {
                best = v;
                count = 1;
                best_mask = mask;
            } else if v == best {
                count += 1;
            }
        }
        (best, count, best_mask)
    }

    fn random_matrix(n: usize, rng: &mut SplitMix64) -> QuboMatrix {
        let mut b = QuboBuilder::new(n);
        for i in 0..n {
            b.add(i, i, rng.range_i64(-20, 20));
            for j in i + 1..n {
                if rng.bounded(100) < 40 {
                    b.add(i, j, rng.range_i64(-15, 15));
                }
            }
        }
        b.add_offset(rng.range_i64(-10, 10));
        b.build().unwrap()
    }

    #[test]
    fn gray_walk_agrees_with_naive_enumeration() {
        let mut rng = SplitMix64::new(2024);
        for round in 0..30 {
            let n = 1 + rng.bounded(9) as usize;
            let q = random_matrix(n, &mut rng);
            let got = brute_force_qubo(&q).unwrap();
            let (best, count, best_mask) = naive_min(&q);
            assert_eq!(got.best_value, best, "round {round}");
            assert_eq!(got.optimum_count, count, "round {round}");
            assert_eq!(got.best, mask_to_assignment(n, best_mask), "round {round}");
            assert_eq!(q.evaluate(&got.best).unwrap(), best);
        }
    }

    #[test]
    fn degenerate_matrix_counts_every_optimum() {
        let got = brute_force_qubo(&QuboMatrix::zero(6)).unwrap();
        assert_eq!(got.best_value, 0);
        assert_eq!(got.optimum_count, 64);
        assert_eq!(got.optima.len(), OPTIMA_CAP);
        assert_eq!(got.best, BinaryAssignment::zeros(6));
    }

    #[test]
    fn optima_list_is_sorted_by_mask() {
        let q = QuboMatrix::from_diagonal(vec![0, 0, 1]).unwrap();
        let got = brute_force_qubo(&q).unwrap();
        assert_eq!(got.best_value, 0);
        assert_eq!(got.optimum_count, 4);
        let masks: Vec<u64> = got
            .optima
            .iter()
            .map(|x| x.iter().enumerate().map(|(i, b)| (b as u64) << i).sum())
            .collect();
        assert_eq!(masks, vec![0, 1, 2, 3]);
    }

    #[test]
    fn dimension_above_cap_is_rejected() {
        let q = QuboMatrix::zero(ENUMERATION_CAP + 1);
        assert!(matches!(
            brute_force_qubo(&q),
            Err(Error::EnumerationCap { dimension: 27, cap: 26 })
        ));
    }

    #[test]
    fn constrained_walk_agrees_with_filtered_enumeration() {
        let mut rng = SplitMix64::new(77);
        for round in 0..25 {
            let n = 1 + rng.bounded(8) as usize;
            let q = random_matrix(n, &mut rng);
            let coeffs: Vec<i64> = (0..n).map(|_| rng.range_i64(-6, 9)).collect();
            let bound = rng.range_i64(-2, 12);
            let problem = ConstrainedProblem::new(
                q.clone(),
                vec![LinearInequality::new(coeffs.clone(), bound).unwrap()],
                vec![],
            )
            .unwrap();
            let got = brute_force_constrained(&problem).unwrap();

            let mut best: Option<i64> = None;
            let mut feasible = 0u64;
            for mask in 0..1u64 << n {
                let x = mask_to_assignment(n, mask);
                if problem.check_feasible(&x).unwrap() {
                    feasible += 1;
                    let v = q.evaluate(&x).unwrap();
                    best = Some(best.map_or(v, |b: i64| b.min(v)));
                }
            }
            assert_eq!(got.feasible_count, feasible, "round {round}");
            assert_eq!(got.best.as_ref().map(|&(v, _)| v), best, "round {round}");
            if let Some((v, ref x)) = got.best {
                assert!(problem.check_feasible(x).unwrap());
                assert_eq!(q.evaluate(x).unwrap(), v);
            }
        }
    }

    #[test]
    fn infeasible_problem_reports_no_best() {
        let problem = ConstrainedProblem::new(
            QuboMatrix::zero(2),
            vec![],
            vec![crate::transform::LinearEquality::new(vec![1, 1], 5).unwrap()],
        )
        .unwrap();
        let got = brute_force_constrained(&problem).unwrap();
        assert_eq!(got.best, None);
        assert_eq!(got.feasible_count, 0);
        assert!(verify_lemma(&problem, 1).is_err());
    }

    #[test]
    fn lemma_report_distinguishes_grid_hits_from_misses() {
        // Optimum (1, 0, 1) has left side 7: on the grid at rho 7,
        // off it at rho 2 where only {0, 2, 4, 6} survive.
        let problem = ConstrainedProblem::new(
            QuboMatrix::from_diagonal(vec![-3, -2, -4]).unwrap(),
            vec![LinearInequality::new(vec![3, 5, 4], 7).unwrap()],
            vec![],
        )
        .unwrap();

        let hit = verify_lemma(&problem, 7).unwrap();
        assert_eq!(hit.base_value, -7);
        assert!(hit.precondition);
        assert!(hit.matches);
        assert_eq!(hit.degradation, 0);
        assert_eq!(hit.augmented_value, -7);

        let miss = verify_lemma(&problem, 2).unwrap();
        assert_eq!(miss.base_value, -7);
        assert!(!miss.precondition);
        assert!(!miss.matches);
        assert_eq!(miss.grid_value, -4);
        assert_eq!(miss.degradation, 3);
        assert_eq!(miss.augmented_value, -4);

        let exact = verify_lemma(&problem, 1).unwrap();
        assert!(exact.precondition);
        assert!(exact.matches);
        assert_eq!(exact.augmented_value, -7);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn prop_lemma_routes_agree(
            seed in 0u64..5000,
            rho in 1i64..=9,
        ) {
            let mut rng = SplitMix64::new(seed);
            let n = 2 + rng.bounded(4) as usize;
            let q = random_matrix(n, &mut rng);
            let coeffs: Vec<i64> = (0..n).map(|_| rng.range_i64(0, 7)).collect();
            let bound = rng.range_i64(0, 15);
            let problem = ConstrainedProblem::new(
                q,
                vec![LinearInequality::new(coeffs, bound).unwrap()],
                vec![],
            )
            .unwrap();
            let report = verify_lemma(&problem, rho).unwrap();
            // Expansion and filter routes always coincide under the
            // automatic dominating weight.
            prop_assert_eq!(report.augmented_value, report.grid_value);
            prop_assert_eq!(report.precondition, report.degradation == 0);
            prop_assert_eq!(report.matches, report.precondition);
            prop_assert!(report.degradation >= 0);
            if rho == 1 {
                prop_assert!(report.precondition && report.matches);
            }
        }
    }
}
