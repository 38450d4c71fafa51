//! Quadratic binary forms and their fast evaluation.
//!
//! A [`QuboMatrix`] stores `f(x) = offset + sum_{i <= j} q(i,j) x_i x_j`
//! over `x in {0,1}^n` with exact integer coefficients. Storage is sparse
//! upper-triangular: diagonal entries are the linear terms (`x_i^2 = x_i`),
//! pairs are normalized to `i <= j`, and zero coefficients are never kept.
//! Per-variable adjacency lists make the one-flip delta of variable `i`
//! an `O(degree(i))` operation, which is what the incremental
//! [`GainCache`] and every search loop in this crate build on.
//!
//! Matrices are immutable once built; all transformations return fresh
//! matrices via [`QuboBuilder`]. The builder rejects coefficient sets whose
//! absolute sum leaves too little headroom in `i64` for exact evaluation,
//! so evaluation and delta arithmetic never need overflow checks.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// Headroom bound: with `|offset| + sum |q(i,j)| <= MAX_ABS_SUM`, every
/// objective value, flip delta, and difference of two objectives fits in
/// `i64` with room to spare.
pub const MAX_ABS_SUM: i64 = i64::MAX / 8;

/// Whether the user-facing problem maximized or minimized.
///
/// Internally every matrix is a minimization; maximization instances are
/// negated on ingestion and reports are negated back.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Convert an internal (minimization) objective to the user's sense.
    pub fn to_user(self, internal: i64) -> i64 {
        match self {
            Sense::Minimize => internal,
            Sense::Maximize => -internal,
        }
    }
}

/// A binary assignment of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryAssignment {
    bits: Vec<bool>,
}

impl BinaryAssignment {
    pub fn zeros(n: usize) -> Self {
        BinaryAssignment {
            bits: vec![false; n],
        }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        BinaryAssignment { bits }
    }

    /// Build from 0/1 integers; anything else is rejected.
    pub fn from_u01(values: &[u8]) -> Result<Self> {
        let mut bits = Vec::with_capacity(values.len());
        for &v in values {
            match v {
                0 => bits.push(false),
                1 => bits.push(true),
                other => {
                    return Err(Error::InvalidParameter(format!(
                        "assignment entry must be 0 or 1, got {other}"
                    )))
                }
            }
        }
        Ok(BinaryAssignment { bits })
    }

    pub fn random(n: usize, rng: &mut SplitMix64) -> Self {
        BinaryAssignment {
            bits: (0..n).map(|_| rng.next_bool()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, value: bool) {
        self.bits[i] = value;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        self.bits.iter().copied()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn hamming_distance(&self, other: &BinaryAssignment) -> usize {
        debug_assert_eq!(self.len(), other.len());
        self.bits
            .iter()
            .zip(&other.bits)
            .filter(|(a, b)| a != b)
            .count()
    }
}

impl fmt::Display for BinaryAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Accumulating constructor for [`QuboMatrix`].
///
/// Coefficients added to the same normalized `(i, j)` pair sum; pairs that
/// cancel to zero are dropped at build time.
#[derive(Debug, Clone)]
pub struct QuboBuilder {
    n: usize,
    entries: BTreeMap<(u32, u32), i128>,
    offset: i128,
    sense: Sense,
}

impl QuboBuilder {
    pub fn new(n: usize) -> Self {
        assert!(n <= u32::MAX as usize, "dimension too large");
        QuboBuilder {
            n,
            entries: BTreeMap::new(),
            offset: 0,
            sense: Sense::Minimize,
        }
    }

    pub fn sense(mut self, sense: Sense) -> Self {
        self.sense = sense;
        self
    }

    /// Add `coeff * x_i * x_j` (indices in either order; `i == j` adds a
    /// linear term).
    pub fn add(&mut self, i: usize, j: usize, coeff: i64) -> &mut Self {
        assert!(i < self.n && j < self.n, "index out of range");
        let key = (i.min(j) as u32, i.max(j) as u32);
        *self.entries.entry(key).or_insert(0) += coeff as i128;
        self
    }

    pub fn add_offset(&mut self, value: i64) -> &mut Self {
        self.offset += value as i128;
        self
    }

    pub(crate) fn add_wide(&mut self, i: usize, j: usize, coeff: i128) -> &mut Self {
        assert!(i < self.n && j < self.n, "index out of range");
        let key = (i.min(j) as u32, i.max(j) as u32);
        *self.entries.entry(key).or_insert(0) += coeff;
        self
    }

    pub(crate) fn add_offset_wide(&mut self, value: i128) -> &mut Self {
        self.offset += value;
        self
    }

    pub fn build(self) -> Result<QuboMatrix> {
        let mut entries = Vec::with_capacity(self.entries.len());
        let mut abs_sum: i128 = self.offset.abs();
        for ((i, j), c) in self.entries {
            if c == 0 {
                continue;
            }
            if c.abs() > MAX_ABS_SUM as i128 {
                return Err(Error::Overflow("building matrix coefficients"));
            }
            abs_sum += c.abs();
            entries.push((i, j, c as i64));
        }
        if abs_sum > MAX_ABS_SUM as i128 {
            return Err(Error::Overflow("building matrix coefficients"));
        }
        let offset = self.offset as i64;

        let mut linear = vec![0i64; self.n];
        let mut adjacency = vec![Vec::new(); self.n];
        for &(i, j, c) in &entries {
            if i == j {
                linear[i as usize] = c;
            } else {
                adjacency[i as usize].push((j, c));
                adjacency[j as usize].push((i, c));
            }
        }
        Ok(QuboMatrix {
            n: self.n,
            entries,
            offset,
            sense: self.sense,
            linear,
            adjacency,
        })
    }
}

/// Sparse upper-triangular quadratic binary form with a constant offset.
#[derive(Clone)]
pub struct QuboMatrix {
    n: usize,
    /// Normalized `(i, j, coeff)` with `i <= j`, sorted, no zeros.
    entries: Vec<(u32, u32, i64)>,
    offset: i64,
    sense: Sense,
    /// Diagonal coefficients, dense.
    linear: Vec<i64>,
    /// Off-diagonal neighbors of each variable (both directions).
    adjacency: Vec<Vec<(u32, i64)>>,
}

impl PartialEq for QuboMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.offset == other.offset
            && self.sense == other.sense
            && self.entries == other.entries
    }
}

impl Eq for QuboMatrix {}

impl fmt::Debug for QuboMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("QuboMatrix")
            .field("n", &self.n)
            .field("offset", &self.offset)
            .field("sense", &self.sense)
            .field("entries", &self.entries)
            .finish()
    }
}

impl QuboMatrix {
    pub fn zero(n: usize) -> Self {
        QuboBuilder::new(n).build().expect("zero matrix")
    }

    pub fn builder(n: usize) -> QuboBuilder {
        QuboBuilder::new(n)
    }

    pub fn from_diagonal(diag: Vec<i64>) -> Result<Self> {
        let mut b = QuboBuilder::new(diag.len());
        for (i, c) in diag.into_iter().enumerate() {
            b.add(i, i, c);
        }
        b.build()
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn entry_count(&self) -> usize {
        self.entries.len()
    }

    /// Coefficient of `(i, j)` (order-insensitive); 0 when absent.
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        let key = (i.min(j) as u32, i.max(j) as u32);
        match self.entries.binary_search_by_key(&key, |&(a, b, _)| (a, b)) {
            Ok(pos) => self.entries[pos].2,
            Err(_) => 0,
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.entries
            .iter()
            .map(|&(i, j, c)| (i as usize, j as usize, c))
    }

    /// Number of off-diagonal entries touching variable `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// `|offset| + sum of |coefficients|`; bounds every objective value.
    pub fn abs_coeff_sum(&self) -> i64 {
        self.offset.abs() + self.entries.iter().map(|&(_, _, c)| c.abs()).sum::<i64>()
    }

    pub fn to_user_sense(&self, internal: i64) -> i64 {
        self.sense.to_user(internal)
    }

    fn check_assignment(&self, x: &BinaryAssignment) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                dimension: self.n,
            });
        }
        Ok(())
    }

    /// Exact objective value `offset + sum q(i,j) x_i x_j`.
    pub fn evaluate(&self, x: &BinaryAssignment) -> Result<i64> {
        self.check_assignment(x)?;
        Ok(self.evaluate_raw(x.bits()))
    }

    pub(crate) fn evaluate_raw(&self, bits: &[bool]) -> i64 {
        let mut total = self.offset;
        for &(i, j, c) in &self.entries {
            if bits[i as usize] && bits[j as usize] {
                total += c;
            }
        }
        total
    }

    /// Objective change from flipping bit `i`, in `O(degree(i))`.
    pub fn flip_delta(&self, x: &BinaryAssignment, i: usize) -> Result<i64> {
        self.check_assignment(x)?;
        self.check_index(i)?;
        Ok(self.flip_delta_raw(x.bits(), i))
    }

    pub(crate) fn flip_delta_raw(&self, bits: &[bool], i: usize) -> i64 {
        let mut inner = self.linear[i];
        for &(j, c) in &self.adjacency[i] {
            if bits[j as usize] {
                inner += c;
            }
        }
        if bits[i] {
            -inner
        } else {
            inner
        }
    }

    /// Fresh gain cache for `x`: `gains[i]` is the flip delta of bit `i`
    /// and `objective` is `evaluate(x)`.
    pub fn init_gains(&self, x: &BinaryAssignment) -> Result<GainCache> {
        self.check_assignment(x)?;
        Ok(self.init_gains_raw(x.bits()))
    }

    pub(crate) fn init_gains_raw(&self, bits: &[bool]) -> GainCache {
        let gains = (0..self.n).map(|i| self.flip_delta_raw(bits, i)).collect();
        GainCache {
            gains,
            objective: self.evaluate_raw(bits),
        }
    }

    /// Flip bit `i`, updating `x` and `cache` in place.
    ///
    /// Returns the objective after the flip. The cache invariant is
    /// maintained incrementally: only `i` and its neighbors are touched.
    pub fn apply_flip(
        &self,
        x: &mut BinaryAssignment,
        i: usize,
        cache: &mut GainCache,
    ) -> Result<i64> {
        self.check_assignment(x)?;
        self.check_index(i)?;
        if cache.gains.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: cache.gains.len(),
            });
        }
        Ok(self.apply_flip_raw(&mut x.bits, i, cache))
    }

    pub(crate) fn apply_flip_raw(
        &self,
        bits: &mut [bool],
        i: usize,
        cache: &mut GainCache,
    ) -> i64 {
        // sigma is the change x_i_new - x_i_old in {-1, +1}.
        let sigma_i: i64 = if bits[i] { -1 } else { 1 };
        cache.objective += cache.gains[i];
        cache.gains[i] = -cache.gains[i];
        bits[i] = !bits[i];
        for &(j, c) in &self.adjacency[i] {
            let sigma_j: i64 = if bits[j as usize] { -1 } else { 1 };
            cache.gains[j as usize] += c * sigma_i * sigma_j;
        }
        cache.objective
    }

    /// Add `weight * (sum_i linear[i] x_i + constant)^2`, expanded with
    /// `x_i^2 = x_i`: the diagonal gains `weight*(c_i^2 + 2 c_i constant)`,
    /// pairs `i < j` gain `2 weight c_i c_j`, and the offset gains
    /// `weight * constant^2`.
    pub fn add_penalty_square(
        &self,
        linear: &[i64],
        constant: i64,
        weight: i64,
    ) -> Result<QuboMatrix> {
        if weight <= 0 {
            return Err(Error::NonPositiveWeight(weight));
        }
        if linear.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: linear.len(),
            });
        }
        let w = weight as i128;
        let k = constant as i128;
        let mut b = QuboBuilder::new(self.n).sense(self.sense);
        b.add_offset_wide(self.offset as i128);
        for &(i, j, c) in &self.entries {
            b.add_wide(i as usize, j as usize, c as i128);
        }
        b.add_offset_wide(w * k * k);
        let nonzero: Vec<(usize, i128)> = linear
            .iter()
            .enumerate()
            .filter(|&(_, &c)| c != 0)
            .map(|(i, &c)| (i, c as i128))
            .collect();
        for (pos, &(i, ci)) in nonzero.iter().enumerate() {
            b.add_wide(i, i, w * (ci * ci + 2 * ci * k));
            for &(j, cj) in &nonzero[pos + 1..] {
                b.add_wide(i, j, 2 * w * ci * cj);
            }
        }
        b.build()
    }

    /// Substitute `x_i = 1 - y_i`: the returned matrix evaluated at any
    /// assignment equals this matrix evaluated with bit `i` inverted.
    pub fn complement_variable(&self, i: usize) -> Result<QuboMatrix> {
        self.check_index(i)?;
        let k = i as u32;
        let mut b = QuboBuilder::new(self.n).sense(self.sense);
        b.add_offset(self.offset);
        for &(p, q, c) in &self.entries {
            if p == k && q == k {
                // c x_i -> c - c y_i
                b.add_offset(c);
                b.add(i, i, -c);
            } else if p == k {
                // c x_i x_j -> c x_j - c y_i x_j
                b.add(q as usize, q as usize, c);
                b.add(i, q as usize, -c);
            } else if q == k {
                b.add(p as usize, p as usize, c);
                b.add(p as usize, i, -c);
            } else {
                b.add(p as usize, q as usize, c);
            }
        }
        b.build()
    }

    /// Negate every coefficient and toggle the sense. Ingesting a
    /// maximization instance means storing `negated` coefficients so the
    /// internal form is always a minimization.
    pub fn negated(&self) -> QuboMatrix {
        let mut out = self.clone();
        out.offset = -out.offset;
        out.sense = match out.sense {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        };
        for entry in &mut out.entries {
            entry.2 = -entry.2;
        }
        for c in &mut out.linear {
            *c = -*c;
        }
        for adj in &mut out.adjacency {
            for pair in adj.iter_mut() {
                pair.1 = -pair.1;
            }
        }
        out
    }

    /// Append `k` fresh variables with no entries; the objective is
    /// unchanged whenever the new bits are zero.
    pub fn extend(&self, k: usize) -> QuboMatrix {
        let mut out = self.clone();
        out.n += k;
        out.linear.resize(out.n, 0);
        out.adjacency.resize(out.n, Vec::new());
        out
    }
}

/// Per-variable flip deltas plus the incrementally tracked objective.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GainCache {
    gains: Vec<i64>,
    objective: i64,
}

impl GainCache {
    pub fn gain(&self, i: usize) -> i64 {
        self.gains[i]
    }

    pub fn gains(&self) -> &[i64] {
        &self.gains
    }

    pub fn objective(&self) -> i64 {
        self.objective
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assignment_from_mask(n: usize, mask: u64) -> BinaryAssignment {
        BinaryAssignment::from_bools((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    #[test]
    fn evaluate_small_dense() {
        let mut b = QuboMatrix::builder(2);
        b.add(0, 0, 1).add(1, 1, 4).add(0, 1, 4);
        let q = b.build().unwrap();
        let cases = [(0b00, 0), (0b01, 1), (0b10, 4), (0b11, 9)];
        for (mask, want) in cases {
            let x = assignment_from_mask(2, mask);
            assert_eq!(q.evaluate(&x).unwrap(), want, "mask {mask:#b}");
        }
    }

    #[test]
    fn builder_accumulates_and_drops_zeros() {
        let mut b = QuboMatrix::builder(3);
        b.add(1, 0, 5).add(0, 1, -5).add(2, 2, 7).add(0, 2, 3);
        let q = b.build().unwrap();
        assert_eq!(q.entry(0, 1), 0);
        assert_eq!(q.entry(2, 0), 3);
        assert_eq!(q.entry(2, 2), 7);
        assert_eq!(q.entry_count(), 2);
    }

    #[test]
    fn builder_rejects_oversized_coefficients() {
        let mut b = QuboMatrix::builder(2);
        b.add(0, 0, MAX_ABS_SUM).add(1, 1, MAX_ABS_SUM);
        assert!(matches!(b.build(), Err(Error::Overflow(_))));
    }

    #[test]
    fn evaluate_rejects_wrong_length() {
        let q = QuboMatrix::zero(3);
        let x = BinaryAssignment::zeros(2);
        assert!(matches!(
            q.evaluate(&x),
            Err(Error::DimensionMismatch {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn assignment_from_u01_rejects_other_digits() {
        assert!(BinaryAssignment::from_u01(&[0, 1, 1]).is_ok());
        assert!(BinaryAssignment::from_u01(&[0, 2]).is_err());
    }

    #[test]
    fn flip_delta_matches_explicit_difference() {
        let mut b = QuboMatrix::builder(4);
        b.add(0, 0, -3)
            .add(1, 1, 2)
            .add(2, 2, -1)
            .add(0, 1, 6)
            .add(1, 3, -4)
            .add(2, 3, 5)
            .add_offset(11);
        let q = b.build().unwrap();
        for mask in 0u64..16 {
            let x = assignment_from_mask(4, mask);
            let base = q.evaluate(&x).unwrap();
            for i in 0..4 {
                let mut y = x.clone();
                y.flip(i);
                let diff = q.evaluate(&y).unwrap() - base;
                assert_eq!(q.flip_delta(&x, i).unwrap(), diff, "mask {mask:#b} bit {i}");
            }
        }
    }

    #[test]
    fn apply_flip_walk_stays_consistent() {
        let mut b = QuboMatrix::builder(6);
        b.add(0, 0, 4)
            .add(3, 3, -9)
            .add(5, 5, 2)
            .add(0, 2, -7)
            .add(1, 4, 3)
            .add(2, 5, 8)
            .add(3, 4, -2)
            .add_offset(-5);
        let q = b.build().unwrap();
        let mut rng = SplitMix64::new(99);
        let mut x = BinaryAssignment::random(6, &mut rng);
        let mut cache = q.init_gains(&x).unwrap();
        for _ in 0..500 {
            let i = rng.bounded(6) as usize;
            let obj = q.apply_flip(&mut x, i, &mut cache).unwrap();
            assert_eq!(obj, q.evaluate(&x).unwrap());
            let fresh = q.init_gains(&x).unwrap();
            assert_eq!(cache, fresh);
        }
    }

    #[test]
    fn penalty_square_expansion_matches_direct_evaluation() {
        // 7 * (3 x0 + 5 x1 + 4 x2 - x3 - 2 x4 - 4 x5)^2 over all 64 points.
        let coeffs = [3i64, 5, 4, -1, -2, -4];
        let base = QuboMatrix::zero(6);
        let q = base.add_penalty_square(&coeffs, 0, 7).unwrap();
        for mask in 0u64..64 {
            let x = assignment_from_mask(6, mask);
            let lhs: i64 = coeffs
                .iter()
                .zip(x.iter())
                .map(|(&c, b)| if b { c } else { 0 })
                .sum();
            assert_eq!(q.evaluate(&x).unwrap(), 7 * lhs * lhs, "mask {mask:#b}");
        }
    }

    #[test]
    fn penalty_square_with_constant_and_existing_terms() {
        let mut b = QuboMatrix::builder(3);
        b.add(0, 0, -2).add(1, 2, 4).add_offset(1);
        let base = b.build().unwrap();
        let coeffs = [2i64, 0, -3];
        let q = base.add_penalty_square(&coeffs, 5, 3).unwrap();
        for mask in 0u64..8 {
            let x = assignment_from_mask(3, mask);
            let lhs: i64 = coeffs
                .iter()
                .zip(x.iter())
                .map(|(&c, b)| if b { c } else { 0 })
                .sum::<i64>()
                + 5;
            let want = base.evaluate(&x).unwrap() + 3 * lhs * lhs;
            assert_eq!(q.evaluate(&x).unwrap(), want, "mask {mask:#b}");
        }
    }

    #[test]
    fn penalty_square_rejects_nonpositive_weight() {
        let base = QuboMatrix::zero(2);
        assert!(matches!(
            base.add_penalty_square(&[1, 1], 0, 0),
            Err(Error::NonPositiveWeight(0))
        ));
        assert!(matches!(
            base.add_penalty_square(&[1, 1], 0, -4),
            Err(Error::NonPositiveWeight(-4))
        ));
    }

    #[test]
    fn complement_variable_inverts_one_bit() {
        let mut b = QuboMatrix::builder(3);
        b.add(0, 0, 5).add(1, 1, -3).add(0, 1, 2).add(1, 2, -7).add_offset(4);
        let q = b.build().unwrap();
        let c = q.complement_variable(1).unwrap();
        for mask in 0u64..8 {
            let x = assignment_from_mask(3, mask);
            let mut y = x.clone();
            y.flip(1);
            assert_eq!(c.evaluate(&x).unwrap(), q.evaluate(&y).unwrap());
        }
    }

    #[test]
    fn complement_twice_is_identity() {
        let mut b = QuboMatrix::builder(4);
        b.add(0, 0, 1).add(2, 2, -6).add(0, 3, 9).add(1, 2, -2).add_offset(-3);
        let q = b.build().unwrap();
        let back = q
            .complement_variable(2)
            .unwrap()
            .complement_variable(2)
            .unwrap();
        assert_eq!(back, q);
    }

    #[test]
    fn negation_flips_values_and_sense() {
        let mut b = QuboMatrix::builder(3);
        b.add(0, 0, 4).add(1, 2, -6).add_offset(9);
        let q = b.build().unwrap();
        let neg = q.negated();
        assert_eq!(neg.sense(), Sense::Maximize);
        assert_eq!(neg.negated(), q);
        for mask in 0u64..8 {
            let x = assignment_from_mask(3, mask);
            assert_eq!(neg.evaluate(&x).unwrap(), -q.evaluate(&x).unwrap());
            for i in 0..3 {
                assert_eq!(
                    neg.flip_delta(&x, i).unwrap(),
                    -q.flip_delta(&x, i).unwrap()
                );
            }
        }
    }

    #[test]
    fn extend_preserves_objective_on_zero_padding() {
        let mut b = QuboMatrix::builder(2);
        b.add(0, 0, 3).add(0, 1, -2).add_offset(7);
        let q = b.build().unwrap();
        let big = q.extend(3);
        assert_eq!(big.dimension(), 5);
        for mask in 0u64..4 {
            let x = assignment_from_mask(2, mask);
            let padded = assignment_from_mask(5, mask);
            assert_eq!(big.evaluate(&padded).unwrap(), q.evaluate(&x).unwrap());
        }
        assert_eq!(big.flip_delta(&BinaryAssignment::zeros(5), 4).unwrap(), 0);
    }

    #[test]
    fn hamming_distance_counts_disagreements() {
        let a = BinaryAssignment::from_u01(&[0, 1, 1, 0]).unwrap();
        let b = BinaryAssignment::from_u01(&[1, 1, 0, 0]).unwrap();
        assert_eq!(a.hamming_distance(&b), 2);
        assert_eq!(a.hamming_distance(&a), 0);
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = QuboMatrix> {
        let pair = (0..n, 0..n, -50i64..=50);
        (proptest::collection::vec(pair, 0..=n * 2), -100i64..=100).prop_map(
            move |(terms, offset)| {
                let mut b = QuboMatrix::builder(n);
                for (i, j, c) in terms {
                    b.add(i, j, c);
                }
                b.add_offset(offset);
                b.build().unwrap()
            },
        )
    }

    proptest! {
        #[test]
        fn prop_flip_delta_equals_difference(
            q in arb_matrix(8),
            mask in 0u64..256,
            i in 0usize..8,
        ) {
            let x = assignment_from_mask(8, mask);
            let mut y = x.clone();
            y.flip(i);
            let diff = q.evaluate(&y).unwrap() - q.evaluate(&x).unwrap();
            prop_assert_eq!(q.flip_delta(&x, i).unwrap(), diff);
        }

        #[test]
        fn prop_gain_cache_tracks_walk(
            q in arb_matrix(8),
            start in 0u64..256,
            flips in proptest::collection::vec(0usize..8, 1..40),
        ) {
            let mut x = assignment_from_mask(8, start);
            let mut cache = q.init_gains(&x).unwrap();
            for i in flips {
                q.apply_flip(&mut x, i, &mut cache).unwrap();
            }
            prop_assert_eq!(cache, q.init_gains(&x).unwrap());
        }

        #[test]
        fn prop_penalty_square_adds_weighted_square(
            q in arb_matrix(6),
            coeffs in proptest::collection::vec(-10i64..=10, 6),
            constant in -20i64..=20,
            weight in 1i64..=9,
            mask in 0u64..64,
        ) {
            let sq = q.add_penalty_square(&coeffs, constant, weight).unwrap();
            let x = assignment_from_mask(6, mask);
            let lhs: i64 = coeffs
                .iter()
                .zip(x.iter())
                .map(|(&c, b)| if b { c } else { 0 })
                .sum::<i64>() + constant;
            prop_assert_eq!(
                sq.evaluate(&x).unwrap(),
                q.evaluate(&x).unwrap() + weight * lhs * lhs
            );
        }

        #[test]
        fn prop_complement_matches_bit_inversion(
            q in arb_matrix(6),
            i in 0usize..6,
            mask in 0u64..64,
        ) {
            let c = q.complement_variable(i).unwrap();
            let x = assignment_from_mask(6, mask);
            let mut y = x.clone();
            y.flip(i);
            prop_assert_eq!(c.evaluate(&x).unwrap(), q.evaluate(&y).unwrap());
        }
    }
}
