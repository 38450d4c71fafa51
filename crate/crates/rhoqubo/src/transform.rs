//! Constraint normalization, slack encoding, and penalty embedding.
//!
//! An inequality `a.x <= b` over binary variables is folded into the
//! objective in three steps:
//!
//! 1. **Normalize.** Variables with negative coefficients are complemented
//!    (`x_i -> 1 - x_i`), which makes every coefficient nonnegative and
//!    raises the bound by the absolute values absorbed. The left side now
//!    ranges over `[0, sum a_i]`.
//! 2. **Encode the slack.** Pick a scale divisor `rho >= 1` and let
//!    `B = floor(b / rho)`. A register of `m = ceil(log2(B + 1))` binary
//!    slacks with weights `1, 2, 4, ..., 2^(m-1)` spans `[0, 2^m - 1]`;
//!    the pad constant `c = (2^m - 1) - B` shifts that window so its top
//!    end lands exactly on `B`.
//! 3. **Penalize.** Add `M (a.x + rho c - rho D.s)^2` to the objective.
//!    Keeping the residual in original units (rather than dividing `a`
//!    by `rho`) clears all denominators, so coefficients stay integral;
//!    the factored-out scale appears as an effective weight `rho^2 M`.
//!    The penalty vanishes exactly when `a.x` is one of
//!    `0, rho, 2 rho, ..., rho B`.
//!
//! At `rho = 1` the zero-penalty set is exactly the feasible set, so the
//! embedding is an exact reformulation whenever `M` exceeds the objective
//! range. Larger `rho` trades slack variables for a coarser zero-penalty
//! grid; [`SlackEncoding::admits`] spells out which left-side values
//! survive.

use crate::error::{Error, Result};
use crate::qubo::{BinaryAssignment, QuboMatrix, MAX_ABS_SUM};

/// `coeffs . x <= bound` over binary `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearInequality {
    coeffs: Vec<i64>,
    bound: i64,
}

fn check_linear_headroom(coeffs: &[i64], constant: i64) -> Result<()> {
    let total: i128 = coeffs
        .iter()
        .map(|&c| (c as i128).abs())
        .sum::<i128>()
        + (constant as i128).abs();
    if total > MAX_ABS_SUM as i128 {
        return Err(Error::Overflow("constraint coefficients"));
    }
    Ok(())
}

impl LinearInequality {
    pub fn new(coeffs: Vec<i64>, bound: i64) -> Result<Self> {
        check_linear_headroom(&coeffs, bound)?;
        Ok(LinearInequality { coeffs, bound })
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn lhs(&self, x: &BinaryAssignment) -> Result<i64> {
        if x.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                found: x.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(x.iter())
            .map(|(&c, b)| if b { c } else { 0 })
            .sum())
    }

    pub fn is_satisfied(&self, x: &BinaryAssignment) -> Result<bool> {
        Ok(self.lhs(x)? <= self.bound)
    }
}

/// `coeffs . x == rhs` over binary `x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearEquality {
    coeffs: Vec<i64>,
    rhs: i64,
}

impl LinearEquality {
    pub fn new(coeffs: Vec<i64>, rhs: i64) -> Result<Self> {
        check_linear_headroom(&coeffs, rhs)?;
        Ok(LinearEquality { coeffs, rhs })
    }

    pub fn dimension(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn rhs(&self) -> i64 {
        self.rhs
    }

    pub fn lhs(&self, x: &BinaryAssignment) -> Result<i64> {
        if x.len() != self.coeffs.len() {
            return Err(Error::DimensionMismatch {
                expected: self.coeffs.len(),
                found: x.len(),
            });
        }
        Ok(self
            .coeffs
            .iter()
            .zip(x.iter())
            .map(|(&c, b)| if b { c } else { 0 })
            .sum())
    }

    pub fn is_satisfied(&self, x: &BinaryAssignment) -> Result<bool> {
        Ok(self.lhs(x)? == self.rhs)
    }
}

/// Sign normalization of one inequality: every coefficient nonnegative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedInequality {
    pub inequality: LinearInequality,
    /// Indices complemented (`x_i -> 1 - x_i`), ascending.
    pub complemented: Vec<usize>,
}

/// Complement every variable with a negative coefficient. The bound grows
/// by the absolute values absorbed; if it is still negative afterwards no
/// binary point satisfies the constraint.
pub fn normalize_inequality(ineq: &LinearInequality) -> Result<NormalizedInequality> {
    let mut coeffs = ineq.coeffs.clone();
    let mut bound = ineq.bound;
    let mut complemented = Vec::new();
    for (i, c) in coeffs.iter_mut().enumerate() {
        if *c < 0 {
            bound -= *c;
            *c = -*c;
            complemented.push(i);
        }
    }
    if bound < 0 {
        return Err(Error::InfeasibleConstraint { bound });
    }
    Ok(NormalizedInequality {
        inequality: LinearInequality { coeffs, bound },
        complemented,
    })
}

/// Slack variables needed for a normalized bound at scale `rho`:
/// `ceil(log2(floor(bound / rho) + 1))`.
pub fn slack_count(bound: i64, rho: i64) -> Result<u32> {
    if rho < 1 {
        return Err(Error::InvalidRho(rho));
    }
    if bound < 0 {
        return Err(Error::InfeasibleConstraint { bound });
    }
    let scaled = (bound / rho) as u64;
    Ok(if scaled == 0 {
        0
    } else {
        64 - scaled.leading_zeros()
    })
}

/// Binary slack register for one normalized inequality at scale `rho`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackEncoding {
    pub rho: i64,
    /// Normalized right side in original units.
    pub bound: i64,
    /// `floor(bound / rho)`.
    pub scaled_bound: i64,
    /// Binary expansion weights `1, 2, 4, ...`; the register value
    /// `D.s` spans `[0, 2^m - 1]`.
    pub weights: Vec<i64>,
    /// `(2^m - 1) - scaled_bound`: offset that aligns the top of the
    /// register range with the scaled bound.
    pub pad: i64,
}

impl SlackEncoding {
    pub fn slack_count(&self) -> usize {
        self.weights.len()
    }

    /// Register value `D.s` of a slack sub-assignment.
    pub fn value(&self, bits: &[bool]) -> i64 {
        self.weights
            .iter()
            .zip(bits)
            .map(|(&w, &b)| if b { w } else { 0 })
            .sum()
    }

    pub fn max_value(&self) -> i64 {
        self.scaled_bound + self.pad
    }

    /// Whether a left-side value incurs zero penalty: it must be a
    /// multiple of `rho` no greater than `rho * scaled_bound`.
    pub fn admits(&self, lhs: i64) -> bool {
        lhs >= 0 && lhs % self.rho == 0 && lhs / self.rho <= self.scaled_bound
    }
}

pub fn build_slack_encoding(bound: i64, rho: i64) -> Result<SlackEncoding> {
    let m = slack_count(bound, rho)?;
    if m > 62 {
        return Err(Error::Overflow("slack register weights"));
    }
    let scaled_bound = bound / rho;
    let weights: Vec<i64> = (0..m).map(|j| 1i64 << j).collect();
    let pad = if m == 0 { 0 } else { (1i64 << m) - 1 - scaled_bound };
    Ok(SlackEncoding {
        rho,
        bound,
        scaled_bound,
        weights,
        pad,
    })
}

/// How each penalty weight is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum PenaltyWeight {
    /// One more than the sum of absolute objective coefficients, so a
    /// single violated constraint always outweighs the whole objective
    /// range and the embedding is exact at `rho = 1`.
    #[default]
    Auto,
    /// The same weight for every constraint; must be positive.
    Fixed(i64),
    /// One positive weight per constraint, inequalities first, then
    /// equalities.
    PerConstraint(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformConfig {
    pub rho: i64,
    pub penalty: PenaltyWeight,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            rho: 1,
            penalty: PenaltyWeight::Auto,
        }
    }
}

impl TransformConfig {
    pub fn with_rho(rho: i64) -> Self {
        TransformConfig {
            rho,
            ..TransformConfig::default()
        }
    }
}

/// What an augmented variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariableRole {
    Original { index: usize, complemented: bool },
    Slack { constraint: usize, bit: u32 },
}

/// Augmented-to-original variable bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableMap {
    roles: Vec<VariableRole>,
    original: usize,
    slack_offsets: Vec<usize>,
}

impl VariableMap {
    pub fn augmented_dimension(&self) -> usize {
        self.roles.len()
    }

    pub fn original_dimension(&self) -> usize {
        self.original
    }

    pub fn role(&self, i: usize) -> VariableRole {
        self.roles[i]
    }

    pub fn roles(&self) -> &[VariableRole] {
        &self.roles
    }

    pub fn is_complemented(&self, i: usize) -> bool {
        matches!(
            self.roles[i],
            VariableRole::Original {
                complemented: true,
                ..
            }
        )
    }

    /// Index of the first slack bit of one inequality.
    pub fn slack_offset(&self, constraint: usize) -> usize {
        self.slack_offsets[constraint]
    }
}

/// One embedded penalty term `weight * residual^2`, kept in closed form
/// so penalties can be recomputed without touching matrix entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PenaltyRecord {
    /// Normalized coefficients over the embedded original variables.
    coeffs: Vec<i64>,
    /// Constant part of the residual: `rho * pad` for inequalities,
    /// `-rhs` for equalities.
    constant: i64,
    weight: i64,
    effective_weight: i64,
    slack: Option<(usize, SlackEncoding)>,
}

impl PenaltyRecord {
    pub fn weight(&self) -> i64 {
        self.weight
    }

    /// `rho^2 * weight` for inequalities (the factor picked up by keeping
    /// the residual in original units); equal to `weight` for equalities.
    pub fn effective_weight(&self) -> i64 {
        self.effective_weight
    }

    pub fn encoding(&self) -> Option<&SlackEncoding> {
        self.slack.as_ref().map(|(_, e)| e)
    }

    pub fn slack_offset(&self) -> Option<usize> {
        self.slack.as_ref().map(|&(off, _)| off)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn constant(&self) -> i64 {
        self.constant
    }

    /// Penalty contribution at an augmented assignment, recomputed from
    /// the residual definition rather than from expanded matrix entries.
    pub fn penalty_at(&self, y: &BinaryAssignment) -> Result<i64> {
        let mut residual: i128 = self.constant as i128;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if y.get(i) {
                residual += c as i128;
            }
        }
        if let Some((offset, enc)) = &self.slack {
            for (j, &w) in enc.weights.iter().enumerate() {
                if y.get(offset + j) {
                    residual -= (enc.rho * w) as i128;
                }
            }
        }
        let penalty = self.weight as i128 * residual * residual;
        i64::try_from(penalty).map_err(|_| Error::Overflow("penalty evaluation"))
    }
}

/// A quadratic objective plus linear constraints over the same binary
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstrainedProblem {
    objective: QuboMatrix,
    inequalities: Vec<LinearInequality>,
    equalities: Vec<LinearEquality>,
}

impl ConstrainedProblem {
    pub fn new(
        objective: QuboMatrix,
        inequalities: Vec<LinearInequality>,
        equalities: Vec<LinearEquality>,
    ) -> Result<Self> {
        let n = objective.dimension();
        if n == 0 {
            return Err(Error::EmptyProblem);
        }
        for ineq in &inequalities {
            if ineq.dimension() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: ineq.dimension(),
                });
            }
        }
        for eq in &equalities {
            if eq.dimension() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: eq.dimension(),
                });
            }
        }
        Ok(ConstrainedProblem {
            objective,
            inequalities,
            equalities,
        })
    }

    pub fn unconstrained(objective: QuboMatrix) -> Result<Self> {
        ConstrainedProblem::new(objective, Vec::new(), Vec::new())
    }

    pub fn objective(&self) -> &QuboMatrix {
        &self.objective
    }

    pub fn inequalities(&self) -> &[LinearInequality] {
        &self.inequalities
    }

    pub fn equalities(&self) -> &[LinearEquality] {
        &self.equalities
    }

    pub fn dimension(&self) -> usize {
        self.objective.dimension()
    }

    /// Satisfaction of every original constraint at an original-variable
    /// assignment.
    pub fn check_feasible(&self, x: &BinaryAssignment) -> Result<bool> {
        for ineq in &self.inequalities {
            if !ineq.is_satisfied(x)? {
                return Ok(false);
            }
        }
        for eq in &self.equalities {
            if !eq.is_satisfied(x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Unconstrained reformulation produced by [`transform`].
#[derive(Debug, Clone)]
pub struct AugmentedQubo {
    matrix: QuboMatrix,
    objective: QuboMatrix,
    map: VariableMap,
    penalties: Vec<PenaltyRecord>,
    rho: i64,
}

impl AugmentedQubo {
    /// The full penalized matrix over original-plus-slack variables.
    pub fn matrix(&self) -> &QuboMatrix {
        &self.matrix
    }

    /// The embedded (complemented) objective over the first
    /// `original_dimension` variables.
    pub fn objective(&self) -> &QuboMatrix {
        &self.objective
    }

    pub fn variable_map(&self) -> &VariableMap {
        &self.map
    }

    pub fn penalties(&self) -> &[PenaltyRecord] {
        &self.penalties
    }

    pub fn rho(&self) -> i64 {
        self.rho
    }

    pub fn slack_dimension(&self) -> usize {
        self.map.augmented_dimension() - self.map.original_dimension()
    }

    fn check_augmented(&self, y: &BinaryAssignment) -> Result<()> {
        if y.len() != self.map.augmented_dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.map.augmented_dimension(),
                found: y.len(),
            });
        }
        Ok(())
    }

    /// Sum of all penalty terms at an augmented assignment, computed from
    /// residuals. `objective_part + penalty_at == matrix.evaluate` always.
    pub fn penalty_at(&self, y: &BinaryAssignment) -> Result<i64> {
        self.check_augmented(y)?;
        let mut total: i64 = 0;
        for record in &self.penalties {
            total = total
                .checked_add(record.penalty_at(y)?)
                .ok_or(Error::Overflow("penalty evaluation"))?;
        }
        Ok(total)
    }

    /// Embedded objective value at an augmented assignment (slack bits
    /// do not contribute).
    pub fn objective_part(&self, y: &BinaryAssignment) -> Result<i64> {
        self.check_augmented(y)?;
        Ok(self.objective.evaluate_raw(y.bits()))
    }

    /// Map an augmented assignment back to original variables, undoing
    /// complementation, and report each inequality's slack register value.
    pub fn recover(&self, y: &BinaryAssignment) -> Result<RecoveredSolution> {
        self.check_augmented(y)?;
        let n = self.map.original_dimension();
        let mut bits = Vec::with_capacity(n);
        for i in 0..n {
            bits.push(y.get(i) ^ self.map.is_complemented(i));
        }
        let mut slack_values = Vec::with_capacity(self.penalties.len());
        for record in &self.penalties {
            if let Some((offset, enc)) = &record.slack {
                let m = enc.weights.len();
                slack_values.push(enc.value(&y.bits()[*offset..offset + m]));
            }
        }
        Ok(RecoveredSolution {
            assignment: BinaryAssignment::from_bools(bits),
            slack_values,
        })
    }
}

/// Original-variable view of an augmented assignment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveredSolution {
    pub assignment: BinaryAssignment,
    /// Slack register values `D.s`, one per inequality, in scaled units.
    pub slack_values: Vec<i64>,
}

/// Add `weight * (coeffs.x - rhs)^2` for an equality whose variables are
/// a prefix of the matrix dimension.
pub fn embed_equality(q: &QuboMatrix, eq: &LinearEquality, weight: i64) -> Result<QuboMatrix> {
    if eq.dimension() > q.dimension() {
        return Err(Error::DimensionMismatch {
            expected: q.dimension(),
            found: eq.dimension(),
        });
    }
    let mut linear = eq.coeffs.clone();
    linear.resize(q.dimension(), 0);
    q.add_penalty_square(&linear, -eq.rhs, weight)
}

/// Primes up to `bound`, ascending. Scale divisors are usually swept over
/// primes: composite divisors admit a superset of the residues their
/// factors admit, so primes cover the distinct zero-penalty grids.
pub fn prime_rhos(bound: i64) -> Vec<i64> {
    if bound < 2 {
        return Vec::new();
    }
    let n = bound as usize;
    let mut is_prime = vec![true; n + 1];
    is_prime[0] = false;
    is_prime[1] = false;
    let mut p = 2usize;
    while p * p <= n {
        if is_prime[p] {
            let mut q = p * p;
            while q <= n {
                is_prime[q] = false;
                q += p;
            }
        }
        p += 1;
    }
    (2..=n).filter(|&k| is_prime[k]).map(|k| k as i64).collect()
}

/// Embed every constraint of `problem` as a squared penalty at scale
/// `config.rho`, producing one unconstrained matrix over the original
/// variables (complemented where normalization demands it) followed by
/// the slack registers of each inequality in order.
pub fn transform(problem: &ConstrainedProblem, config: &TransformConfig) -> Result<AugmentedQubo> {
    if config.rho < 1 {
        return Err(Error::InvalidRho(config.rho));
    }
    let n = problem.dimension();

    // One complement set must serve every inequality at once; a variable
    // pulled both ways has genuinely mixed signs and there is no single
    // substitution that normalizes all rows.
    let mut sign = vec![0i8; n];
    for ineq in problem.inequalities() {
        for (i, &c) in ineq.coeffs().iter().enumerate() {
            let s = c.signum() as i8;
            if s == 0 {
                continue;
            }
            if sign[i] == 0 {
                sign[i] = s;
            } else if sign[i] != s {
                return Err(Error::MixedSigns { variable: i });
            }
        }
    }
    let complemented: Vec<bool> = sign.iter().map(|&s| s < 0).collect();

    let mut objective = problem.objective().clone();
    for (i, &flip) in complemented.iter().enumerate() {
        if flip {
            objective = objective.complement_variable(i)?;
        }
    }

    let constraint_count = problem.inequalities().len() + problem.equalities().len();
    let weights: Vec<i64> = match &config.penalty {
        PenaltyWeight::Auto => {
            let spread: i64 = objective.entries().map(|(_, _, c)| c.abs()).sum();
            vec![spread + 1; constraint_count]
        }
        PenaltyWeight::Fixed(w) => {
            if *w <= 0 {
                return Err(Error::NonPositiveWeight(*w));
            }
            vec![*w; constraint_count]
        }
        PenaltyWeight::PerConstraint(v) => {
            if v.len() != constraint_count {
                return Err(Error::InvalidParameter(format!(
                    "expected {} per-constraint weights, got {}",
                    constraint_count,
                    v.len()
                )));
            }
            if let Some(&w) = v.iter().find(|&&w| w <= 0) {
                return Err(Error::NonPositiveWeight(w));
            }
            v.clone()
        }
    };

    // Rewrite each inequality under the joint complement set.
    let mut normalized = Vec::with_capacity(problem.inequalities().len());
    for ineq in problem.inequalities() {
        let mut coeffs = ineq.coeffs().to_vec();
        let mut bound = ineq.bound();
        for (i, c) in coeffs.iter_mut().enumerate() {
            if complemented[i] && *c != 0 {
                bound -= *c;
                *c = -*c;
            }
        }
        if bound < 0 {
            return Err(Error::InfeasibleConstraint { bound });
        }
        normalized.push((coeffs, bound));
    }

    let mut encodings = Vec::with_capacity(normalized.len());
    let mut slack_offsets = Vec::with_capacity(normalized.len());
    let mut next = n;
    for (_, bound) in &normalized {
        let enc = build_slack_encoding(*bound, config.rho)?;
        slack_offsets.push(next);
        next += enc.slack_count();
        encodings.push(enc);
    }
    let augmented_dimension = next;

    let mut roles = Vec::with_capacity(augmented_dimension);
    for (i, &flip) in complemented.iter().enumerate() {
        roles.push(VariableRole::Original {
            index: i,
            complemented: flip,
        });
    }
    for (k, enc) in encodings.iter().enumerate() {
        for bit in 0..enc.slack_count() as u32 {
            roles.push(VariableRole::Slack {
                constraint: k,
                bit,
            });
        }
    }

    let mut matrix = objective.extend(augmented_dimension - n);
    let mut penalties = Vec::with_capacity(constraint_count);

    for (k, ((coeffs, _bound), enc)) in normalized.iter().zip(&encodings).enumerate() {
        let weight = weights[k];
        if weight <= 0 {
            return Err(Error::NonPositiveWeight(weight));
        }
        let effective = weight as i128 * config.rho as i128 * config.rho as i128;
        let effective_weight =
            i64::try_from(effective).map_err(|_| Error::Overflow("penalty rescaling"))?;
        let mut linear = vec![0i64; augmented_dimension];
        linear[..n].copy_from_slice(coeffs);
        for (j, &w) in enc.weights.iter().enumerate() {
            linear[slack_offsets[k] + j] = -config.rho * w;
        }
        let constant = config
            .rho
            .checked_mul(enc.pad)
            .ok_or(Error::Overflow("penalty rescaling"))?;
        matrix = matrix.add_penalty_square(&linear, constant, weight)?;
        penalties.push(PenaltyRecord {
            coeffs: coeffs.clone(),
            constant,
            weight,
            effective_weight,
            slack: Some((slack_offsets[k], enc.clone())),
        });
    }

    for (k, eq) in problem.equalities().iter().enumerate() {
        let weight = weights[problem.inequalities().len() + k];
        matrix = embed_equality(&matrix, eq, weight)?;
        penalties.push(PenaltyRecord {
            coeffs: eq.coeffs().to_vec(),
            constant: -eq.rhs(),
            weight,
            effective_weight: weight,
            slack: None,
        });
    }

    Ok(AugmentedQubo {
        matrix,
        objective,
        map: VariableMap {
            roles,
            original: n,
            slack_offsets,
        },
        penalties,
        rho: config.rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mask_assignment(n: usize, mask: u64) -> BinaryAssignment {
        BinaryAssignment::from_bools((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    fn diag(values: &[i64]) -> QuboMatrix {
        QuboMatrix::from_diagonal(values.to_vec()).unwrap()
    }

    #[test]
    fn normalize_flips_negative_coefficients() {
        let ineq = LinearInequality::new(vec![-2, 3], 1).unwrap();
        let norm = normalize_inequality(&ineq).unwrap();
        assert_eq!(norm.inequality.coeffs(), &[2, 3]);
        assert_eq!(norm.inequality.bound(), 3);
        assert_eq!(norm.complemented, vec![0]);
    }

    #[test]
    fn normalize_keeps_nonnegative_rows_unchanged() {
        let ineq = LinearInequality::new(vec![0, 4, 1], 6).unwrap();
        let norm = normalize_inequality(&ineq).unwrap();
        assert_eq!(norm.inequality, ineq);
        assert!(norm.complemented.is_empty());
    }

    #[test]
    fn normalize_detects_unsatisfiable_rows() {
        let ineq = LinearInequality::new(vec![2, 3], -1).unwrap();
        assert!(matches!(
            normalize_inequality(&ineq),
            Err(Error::InfeasibleConstraint { bound: -1 })
        ));
        let ineq = LinearInequality::new(vec![-2], -3).unwrap();
        assert!(matches!(
            normalize_inequality(&ineq),
            Err(Error::InfeasibleConstraint { bound: -1 })
        ));
    }

    #[test]
    fn normalization_preserves_the_feasible_set() {
        let ineq = LinearInequality::new(vec![-3, 2, -1, 4], 2).unwrap();
        let norm = normalize_inequality(&ineq).unwrap();
        for mask in 0u64..16 {
            let x = mask_assignment(4, mask);
            let mut flipped = x.clone();
            for &i in &norm.complemented {
                flipped.flip(i);
            }
            assert_eq!(
                ineq.is_satisfied(&x).unwrap(),
                norm.inequality.is_satisfied(&flipped).unwrap(),
                "mask {mask:#b}"
            );
        }
    }

    #[test]
    fn slack_count_reference_values() {
        let cases = [
            (15, 1, 4),
            (63, 1, 6),
            (7, 7, 1),
            (1250, 1, 11),
            (1250, 10, 7),
            (1250, 100, 4),
            (0, 1, 0),
            (0, 9, 0),
            (7, 8, 0),
            (7, 1, 3),
            (10, 1, 4),
            (1, 1, 1),
        ];
        for (bound, rho, want) in cases {
            assert_eq!(
                slack_count(bound, rho).unwrap(),
                want,
                "bound {bound} rho {rho}"
            );
        }
    }

    #[test]
    fn slack_count_rejects_bad_arguments() {
        assert!(matches!(slack_count(5, 0), Err(Error::InvalidRho(0))));
        assert!(matches!(slack_count(5, -3), Err(Error::InvalidRho(-3))));
        assert!(matches!(
            slack_count(-1, 1),
            Err(Error::InfeasibleConstraint { bound: -1 })
        ));
    }

    #[test]
    fn slack_encoding_reference_values() {
        let enc = build_slack_encoding(15, 1).unwrap();
        assert_eq!(enc.weights, vec![1, 2, 4, 8]);
        assert_eq!(enc.pad, 0);

        let enc = build_slack_encoding(10, 1).unwrap();
        assert_eq!(enc.weights, vec![1, 2, 4, 8]);
        assert_eq!(enc.pad, 5);
        assert_eq!(enc.max_value(), 15);

        let enc = build_slack_encoding(7, 2).unwrap();
        assert_eq!(enc.scaled_bound, 3);
        assert_eq!(enc.weights, vec![1, 2]);
        assert_eq!(enc.pad, 0);

        let enc = build_slack_encoding(7, 3).unwrap();
        assert_eq!(enc.scaled_bound, 2);
        assert_eq!(enc.weights, vec![1, 2]);
        assert_eq!(enc.pad, 1);

        let enc = build_slack_encoding(7, 7).unwrap();
        assert_eq!(enc.weights, vec![1]);
        assert_eq!(enc.pad, 0);

        let enc = build_slack_encoding(0, 5).unwrap();
        assert!(enc.weights.is_empty());
        assert_eq!(enc.pad, 0);
    }

    #[test]
    fn encoding_admits_multiples_of_rho_up_to_bound() {
        let enc = build_slack_encoding(7, 2).unwrap();
        for lhs in 0..=9 {
            let want = lhs % 2 == 0 && lhs <= 6;
            assert_eq!(enc.admits(lhs), want, "lhs {lhs}");
        }
    }

    #[test]
    fn transform_expands_to_the_expected_square() {
        let objective = diag(&[-3, -2, -4]);
        let ineq = LinearInequality::new(vec![3, 5, 4], 7).unwrap();
        let problem = ConstrainedProblem::new(objective.clone(), vec![ineq], vec![]).unwrap();

        let aug = transform(
            &problem,
            &TransformConfig {
                rho: 1,
                penalty: PenaltyWeight::Fixed(7),
            },
        )
        .unwrap();
        let want = objective
            .extend(3)
            .add_penalty_square(&[3, 5, 4, -1, -2, -4], 0, 7)
            .unwrap();
        assert_eq!(aug.matrix(), &want);
        assert_eq!(aug.penalties()[0].effective_weight(), 7);

        let aug = transform(
            &problem,
            &TransformConfig {
                rho: 7,
                penalty: PenaltyWeight::Fixed(7),
            },
        )
        .unwrap();
        let want = objective
            .extend(1)
            .add_penalty_square(&[3, 5, 4, -7], 0, 7)
            .unwrap();
        assert_eq!(aug.matrix(), &want);
        assert_eq!(aug.penalties()[0].effective_weight(), 7 * 49);
    }

    #[test]
    fn penalty_minimum_is_zero_exactly_on_admitted_lhs_values() {
        let objective = diag(&[-3, -2, -4]);
        let ineq = LinearInequality::new(vec![3, 5, 4], 7).unwrap();
        let problem = ConstrainedProblem::new(objective, vec![ineq], vec![]).unwrap();
        let aug = transform(
            &problem,
            &TransformConfig {
                rho: 2,
                penalty: PenaltyWeight::Fixed(5),
            },
        )
        .unwrap();
        let enc = aug.penalties()[0].encoding().unwrap().clone();
        assert_eq!(enc.weights, vec![1, 2]);
        let total = aug.variable_map().augmented_dimension();
        assert_eq!(total, 5);

        let coeffs = [3i64, 5, 4];
        for xmask in 0u64..8 {
            let lhs: i64 = (0..3).filter(|&i| xmask >> i & 1 == 1).map(|i| coeffs[i]).sum();
            let mut best = i64::MAX;
            for smask in 0u64..4 {
                let y = mask_assignment(total, xmask | smask << 3);
                let penalty = aug.penalty_at(&y).unwrap();
                assert_eq!(
                    aug.objective_part(&y).unwrap() + penalty,
                    aug.matrix().evaluate(&y).unwrap()
                );
                best = best.min(penalty);
            }
            assert_eq!(best == 0, enc.admits(lhs), "lhs {lhs}");
        }
    }

    #[test]
    fn transform_complements_through_objective_and_recovers() {
        let mut b = QuboMatrix::builder(2);
        b.add(0, 0, -4).add(1, 1, 3).add(0, 1, 2).add_offset(1);
        let objective = b.build().unwrap();
        let ineq = LinearInequality::new(vec![-2, 3], 1).unwrap();
        let problem = ConstrainedProblem::new(objective.clone(), vec![ineq], vec![]).unwrap();
        let aug = transform(&problem, &TransformConfig::default()).unwrap();

        assert!(aug.variable_map().is_complemented(0));
        assert!(!aug.variable_map().is_complemented(1));
        // Normalized bound 3 needs two slack bits at rho 1.
        assert_eq!(aug.slack_dimension(), 2);

        let total = aug.variable_map().augmented_dimension();
        for mask in 0..1u64 << total {
            let y = mask_assignment(total, mask);
            let recovered = aug.recover(&y).unwrap();
            assert_eq!(
                aug.objective_part(&y).unwrap(),
                objective.evaluate(&recovered.assignment).unwrap(),
                "mask {mask:#b}"
            );
            let expected_slack = (mask >> 2 & 1) as i64 + 2 * (mask >> 3 & 1) as i64;
            assert_eq!(recovered.slack_values, vec![expected_slack]);
        }
    }

    #[test]
    fn transform_rejects_mixed_signs_across_rows() {
        let problem = ConstrainedProblem::new(
            diag(&[1, 1]),
            vec![
                LinearInequality::new(vec![1, 2], 2).unwrap(),
                LinearInequality::new(vec![-1, 2], 2).unwrap(),
            ],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            transform(&problem, &TransformConfig::default()),
            Err(Error::MixedSigns { variable: 0 })
        ));
    }

    #[test]
    fn transform_shares_one_complement_set_across_rows() {
        let objective = diag(&[-1, -1, -1]);
        let rows = vec![
            LinearInequality::new(vec![-2, 0, 1], 0).unwrap(),
            LinearInequality::new(vec![-1, 3, 0], 2).unwrap(),
        ];
        let problem = ConstrainedProblem::new(objective.clone(), rows.clone(), vec![]).unwrap();
        let aug = transform(&problem, &TransformConfig::default()).unwrap();

        let total = aug.variable_map().augmented_dimension();
        let mut best = i64::MAX;
        let mut best_x = None;
        for mask in 0..1u64 << total {
            let y = mask_assignment(total, mask);
            let value = aug.matrix().evaluate(&y).unwrap();
            if value < best {
                best = value;
                best_x = Some(aug.recover(&y).unwrap().assignment);
            }
        }
        // Exhaustive feasible minimum of the original problem.
        let mut want = i64::MAX;
        for mask in 0u64..8 {
            let x = mask_assignment(3, mask);
            if problem.check_feasible(&x).unwrap() {
                want = want.min(objective.evaluate(&x).unwrap());
            }
        }
        assert_eq!(best, want);
        let best_x = best_x.unwrap();
        assert!(problem.check_feasible(&best_x).unwrap());
        assert_eq!(objective.evaluate(&best_x).unwrap(), want);
    }

    #[test]
    fn auto_weight_makes_the_embedding_exact_at_unit_rho() {
        let mut b = QuboMatrix::builder(3);
        b.add(0, 0, -5).add(1, 1, 4).add(2, 2, -3).add(0, 2, 2);
        let objective = b.build().unwrap();
        let ineq = LinearInequality::new(vec![2, 3, 4], 5).unwrap();
        let problem = ConstrainedProblem::new(objective.clone(), vec![ineq], vec![]).unwrap();
        let aug = transform(&problem, &TransformConfig::default()).unwrap();

        let total = aug.variable_map().augmented_dimension();
        let mut best = i64::MAX;
        for mask in 0..1u64 << total {
            best = best.min(aug.matrix().evaluate(&mask_assignment(total, mask)).unwrap());
        }
        let mut want = i64::MAX;
        for mask in 0u64..8 {
            let x = mask_assignment(3, mask);
            if problem.check_feasible(&x).unwrap() {
                want = want.min(objective.evaluate(&x).unwrap());
            }
        }
        assert_eq!(best, want);
    }

    #[test]
    fn equalities_embed_as_plain_squares() {
        let problem = ConstrainedProblem::new(
            QuboMatrix::zero(2),
            vec![],
            vec![LinearEquality::new(vec![1, 1], 1).unwrap()],
        )
        .unwrap();
        let aug = transform(
            &problem,
            &TransformConfig {
                rho: 1,
                penalty: PenaltyWeight::Fixed(5),
            },
        )
        .unwrap();
        assert_eq!(aug.slack_dimension(), 0);
        let values: Vec<i64> = (0u64..4)
            .map(|mask| aug.matrix().evaluate(&mask_assignment(2, mask)).unwrap())
            .collect();
        assert_eq!(values, vec![5, 0, 0, 5]);
    }

    #[test]
    fn per_constraint_weights_are_validated() {
        let problem = ConstrainedProblem::new(
            diag(&[1, 1]),
            vec![LinearInequality::new(vec![1, 1], 1).unwrap()],
            vec![LinearEquality::new(vec![1, 0], 1).unwrap()],
        )
        .unwrap();
        let bad_len = TransformConfig {
            rho: 1,
            penalty: PenaltyWeight::PerConstraint(vec![3]),
        };
        assert!(matches!(
            transform(&problem, &bad_len),
            Err(Error::InvalidParameter(_))
        ));
        let bad_sign = TransformConfig {
            rho: 1,
            penalty: PenaltyWeight::PerConstraint(vec![3, 0]),
        };
        assert!(matches!(
            transform(&problem, &bad_sign),
            Err(Error::NonPositiveWeight(0))
        ));
        let good = TransformConfig {
            rho: 1,
            penalty: PenaltyWeight::PerConstraint(vec![3, 9]),
        };
        let aug = transform(&problem, &good).unwrap();
        assert_eq!(aug.penalties()[0].weight(), 3);
        assert_eq!(aug.penalties()[1].weight(), 9);
    }

    #[test]
    fn transform_rejects_nonpositive_rho() {
        let problem = ConstrainedProblem::unconstrained(diag(&[1])).unwrap();
        assert!(matches!(
            transform(&problem, &TransformConfig::with_rho(0)),
            Err(Error::InvalidRho(0))
        ));
    }

    #[test]
    fn prime_rhos_reference_values() {
        assert_eq!(prime_rhos(1), Vec::<i64>::new());
        assert_eq!(prime_rhos(2), vec![2]);
        assert_eq!(prime_rhos(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(prime_rhos(97).len(), 25);
    }

    #[test]
    fn slack_diagonal_cancels_only_when_pad_is_half_a_weight() {
        // The diagonal coefficient of slack bit j is
        // w rho^2 D_j (D_j - 2 pad), which vanishes exactly when
        // 2 pad == D_j, i.e. pad is a power of two in range.
        for bound in 0..200i64 {
            for rho in 1..=20i64 {
                let enc = build_slack_encoding(bound, rho).unwrap();
                let problem = ConstrainedProblem::new(
                    QuboMatrix::zero(1),
                    vec![LinearInequality::new(vec![1], bound).unwrap()],
                    vec![],
                )
                .unwrap();
                let aug = transform(
                    &problem,
                    &TransformConfig {
                        rho,
                        penalty: PenaltyWeight::Fixed(1),
                    },
                )
                .unwrap();
                let nonzero = (0..enc.slack_count())
                    .filter(|&j| aug.matrix().entry(1 + j, 1 + j) != 0)
                    .count();
                let cancelled = enc.pad > 0 && enc.pad & (enc.pad - 1) == 0;
                assert_eq!(
                    nonzero,
                    enc.slack_count() - usize::from(cancelled),
                    "bound {bound} rho {rho} pad {}",
                    enc.pad
                );
            }
        }
    }

    proptest! {
        #[test]
        fn prop_slack_count_nonincreasing_in_rho(
            bound in 0..=4096i64,
            rho in 1..=128i64,
            step in 1..=64i64,
        ) {
            prop_assert!(
                slack_count(bound, rho + step).unwrap() <= slack_count(bound, rho).unwrap()
            );
        }

        #[test]
        fn prop_slack_count_scaling_bound(bound in 1..=1i64 << 40, rho_seed in 1..=1i64 << 20) {
            // For 1 <= rho <= bound the register shrinks by at least the
            // bit length of rho, minus one-bit rounding.
            let rho = 1 + rho_seed % bound.min(1 << 20);
            let base = slack_count(bound, 1).unwrap() as i64;
            let scaled = slack_count(bound, rho).unwrap() as i64;
            let log2_rho = 63 - rho.leading_zeros() as i64;
            prop_assert!(scaled <= base - log2_rho + 1);
        }

        #[test]
        fn prop_admitted_lhs_values_have_zero_residual(
            bound in 0..=120i64,
            rho in 1..=12i64,
            lhs in 0..=140i64,
        ) {
            let enc = build_slack_encoding(bound, rho).unwrap();
            let m = enc.slack_count();
            let mut best = i64::MAX;
            for smask in 0..1u64 << m {
                let bits: Vec<bool> = (0..m).map(|j| smask >> j & 1 == 1).collect();
                let residual = lhs + rho * enc.pad - rho * enc.value(&bits);
                best = best.min(residual * residual);
            }
            prop_assert_eq!(best == 0, enc.admits(lhs));
        }
    }
}
