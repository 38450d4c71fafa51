//! Instance ingestion, generation, and the native interchange format.
//!
//! Three text formats are understood:
//!
//! - ORLIB sparse matrices: an instance count, then per instance a
//!   header `n nnz` followed by `nnz` triples `i j value` with 1-based
//!   indices. Duplicate pairs accumulate. Values must be integers.
//! - Knapsack instances in the classic benchmark layout: name, size,
//!   one row of linear profits, the strict upper triangle of quadratic
//!   profits row by row, a blank-or-zero separator, a constraint-type
//!   line, the capacity, and one row of weights. Profits maximize, so
//!   coefficients are negated on ingestion and the sense recorded.
//! - The native format written by [`write_native`]: a self-describing
//!   line-oriented dump of one [`InstanceBundle`] that round-trips
//!   bit-exactly.
//!
//! All readers accept LF or CRLF and tolerate trailing blank lines;
//! errors carry 1-based line numbers.

use crate::error::{Error, Result};
use crate::qubo::{QuboBuilder, QuboMatrix, Sense};
use crate::rng::SplitMix64;
use crate::transform::{ConstrainedProblem, LinearEquality, LinearInequality};

/// Where an instance came from; carried through the native format so
/// derived artifacts stay attributable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// Parsed from an external file; the path may be empty when the
    /// source is an anonymous stream.
    FromFile { path: String },
    /// Produced by a generator; `params` holds space-separated
    /// `key=value` pairs describing the draw.
    Generated { seed: u64, params: String },
}

impl Provenance {
    /// Look up one `key=value` parameter of a generated instance.
    pub fn param(&self, key: &str) -> Option<&str> {
        match self {
            Provenance::Generated { params, .. } => params
                .split_whitespace()
                .find_map(|kv| kv.split_once('=').filter(|(k, _)| *k == key).map(|(_, v)| v)),
            Provenance::FromFile { .. } => None,
        }
    }
}

/// A named constrained problem plus its provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceBundle {
    pub name: String,
    pub provenance: Provenance,
    pub problem: ConstrainedProblem,
}

/// Line-by-line reader tracking 1-based numbers for error reporting.
struct Cursor<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines(),
            line_no: 0,
        }
    }

    fn next_any(&mut self) -> Option<(usize, &'a str)> {
        self.lines.next().map(|line| {
            self.line_no += 1;
            (self.line_no, line.trim_end_matches('\r'))
        })
    }

    fn next_required(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_any().ok_or_else(|| {
            Error::parse(
                self.line_no + 1,
                format!("unexpected end of input, expected {what}"),
            )
        })
    }

    fn next_nonblank(&mut self, what: &str) -> Result<(usize, &'a str)> {
        loop {
            let (no, line) = self.next_required(what)?;
            if !line.trim().is_empty() {
                return Ok((no, line));
            }
        }
    }

    fn expect_end(&mut self) -> Result<()> {
        while let Some((no, line)) = self.next_any() {
            if !line.trim().is_empty() {
                return Err(Error::parse(no, "unexpected trailing content"));
            }
        }
        Ok(())
    }
}

fn parse_i64(token: &str, line: usize, what: &str) -> Result<i64> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what}: expected integer, got '{token}'")))
}

fn parse_usize(token: &str, line: usize, what: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::parse(line, format!("{what}: expected nonnegative integer, got '{token}'")))
}

fn single_token<'a>(line: &'a str, no: usize, what: &str) -> Result<&'a str> {
    let mut tokens = line.split_whitespace();
    match (tokens.next(), tokens.next()) {
        (Some(tok), None) => Ok(tok),
        _ => Err(Error::parse(no, format!("expected a single {what}"))),
    }
}

fn int_row(line: &str, no: usize, want: usize, what: &str) -> Result<Vec<i64>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != want {
        return Err(Error::parse(
            no,
            format!("{what}: expected {want} values, got {}", tokens.len()),
        ));
    }
    tokens
        .into_iter()
        .map(|tok| parse_i64(tok, no, what))
        .collect()
}

/// Parse a multi-instance ORLIB sparse file into raw matrices, with
/// coefficients exactly as written.
pub fn read_orlib_bqp(text: &str) -> Result<Vec<QuboMatrix>> {
    let mut cur = Cursor::new(text);
    let (no, line) = cur.next_nonblank("instance count")?;
    let count = parse_usize(single_token(line, no, "instance count")?, no, "instance count")?;

    let mut matrices = Vec::with_capacity(count);
    for _ in 0..count {
        let (no, line) = cur.next_nonblank("instance header")?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::parse(no, "expected instance header 'n nnz'"));
        }
        let n = parse_usize(tokens[0], no, "variable count")?;
        let nnz = parse_usize(tokens[1], no, "entry count")?;

        let mut builder = QuboBuilder::new(n);
        for _ in 0..nnz {
            let (no, line) = cur.next_nonblank("matrix entry")?;
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(Error::parse(no, "expected matrix entry 'i j value'"));
            }
            let i = parse_usize(tokens[0], no, "row index")?;
            let j = parse_usize(tokens[1], no, "column index")?;
            if i < 1 || i > n || j < 1 || j > n {
                return Err(Error::parse(
                    no,
                    format!("index out of range: ({i}, {j}) not within [1, {n}]"),
                ));
            }
            let value = parse_i64(tokens[2], no, "entry value")?;
            builder.add(i - 1, j - 1, value);
        }
        matrices.push(builder.build()?);
    }
    cur.expect_end()?;
    Ok(matrices)
}

/// Parse one knapsack instance in the classic benchmark layout. The
/// profits maximize; the stored objective is their negation with
/// [`Sense::Maximize`] recorded.
pub fn read_qkp(text: &str) -> Result<InstanceBundle> {
    let mut cur = Cursor::new(text);
    let (_, name_line) = cur.next_nonblank("instance name")?;
    let name = name_line.trim().to_string();

    let (no, line) = cur.next_nonblank("variable count")?;
    let n = parse_usize(single_token(line, no, "variable count")?, no, "variable count")?;
    if n == 0 {
        return Err(Error::parse(no, "variable count must be positive"));
    }

    let (no, line) = cur.next_nonblank("profit row")?;
    let profits = int_row(line, no, n, "profit row")?;

    let mut builder = QuboBuilder::new(n).sense(Sense::Maximize);
    for (i, &p) in profits.iter().enumerate() {
        builder.add(i, i, -p);
    }
    for i in 0..n.saturating_sub(1) {
        let (no, line) = cur.next_nonblank("quadratic row")?;
        let row = int_row(line, no, n - 1 - i, &format!("quadratic row {}", i + 1))?;
        for (k, &p) in row.iter().enumerate() {
            builder.add(i, i + 1 + k, -p);
        }
    }

    let (no, line) = cur.next_required("separator line")?;
    let sep = line.trim();
    if !(sep.is_empty() || sep == "0") {
        return Err(Error::parse(no, "expected a blank or zero separator line"));
    }
    let (no, line) = cur.next_nonblank("constraint type")?;
    parse_i64(single_token(line, no, "constraint type")?, no, "constraint type")?;
    let (no, line) = cur.next_nonblank("capacity")?;
    let capacity = parse_i64(single_token(line, no, "capacity")?, no, "capacity")?;
    let (no, line) = cur.next_nonblank("weight row")?;
    let weights = int_row(line, no, n, "weight row")?;
    cur.expect_end()?;

    let problem = ConstrainedProblem::new(
        builder.build()?,
        vec![LinearInequality::new(weights, capacity)?],
        vec![],
    )?;
    Ok(InstanceBundle {
        name,
        provenance: Provenance::FromFile {
            path: String::new(),
        },
        problem,
    })
}

/// Generate a random knapsack instance: profits and weights uniform in
/// `[1, 100]`, each quadratic profit present with probability
/// `density_percent / 100`, capacity uniform in
/// `[min(50, total - 1), total - 1]` where `total` sums the weights.
///
/// The draw order is fixed (diagonal profits, then pair presence and
/// value row by row, then weights, then capacity), so instances are
/// identical across platforms for a given seed.
pub fn generate_qkp(n: usize, density_percent: u32, seed: u64) -> Result<InstanceBundle> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "variable count must be positive".to_string(),
        ));
    }
    if density_percent == 0 || density_percent > 100 {
        return Err(Error::InvalidParameter(format!(
            "density must be in (0, 100], got {density_percent}"
        )));
    }
    let mut rng = SplitMix64::new(seed);
    let mut builder = QuboBuilder::new(n).sense(Sense::Maximize);
    for i in 0..n {
        builder.add(i, i, -(1 + rng.bounded(100) as i64));
    }
    for i in 0..n {
        for j in i + 1..n {
            if rng.bounded(100) < density_percent as u64 {
                builder.add(i, j, -(1 + rng.bounded(100) as i64));
            }
        }
    }
    let weights: Vec<i64> = (0..n).map(|_| 1 + rng.bounded(100) as i64).collect();
    let total: i64 = weights.iter().sum();
    let hi = total - 1;
    let lo = hi.min(50);
    let capacity = lo + rng.bounded((hi - lo + 1) as u64) as i64;

    let problem = ConstrainedProblem::new(
        builder.build()?,
        vec![LinearInequality::new(weights, capacity)?],
        vec![],
    )?;
    Ok(InstanceBundle {
        name: format!("qkp-n{n}-d{density_percent}-s{seed}"),
        provenance: Provenance::Generated {
            seed,
            params: format!("n={n} density={density_percent}"),
        },
        problem,
    })
}

/// Constrain a raw matrix by `sum x_i <= floor(n * fraction / 100)`.
pub fn attach_cardinality_constraint(
    q: QuboMatrix,
    fraction_percent: u32,
) -> Result<ConstrainedProblem> {
    if fraction_percent == 0 || fraction_percent >= 100 {
        return Err(Error::InvalidParameter(format!(
            "fraction must be in (0, 100), got {fraction_percent}"
        )));
    }
    let n = q.dimension();
    let bound = (n as i64 * fraction_percent as i64) / 100;
    let ineq = LinearInequality::new(vec![1; n], bound)?;
    ConstrainedProblem::new(q, vec![ineq], vec![])
}

fn reject_multiline(value: &str, what: &str) -> Result<()> {
    if value.contains('\n') || value.contains('\r') {
        return Err(Error::InvalidParameter(format!(
            "{what} must be a single line"
        )));
    }
    Ok(())
}

/// Serialize a bundle into the native format. [`read_native`] of the
/// result reproduces the bundle exactly.
pub fn write_native(bundle: &InstanceBundle) -> Result<String> {
    reject_multiline(&bundle.name, "instance name")?;
    let q = bundle.problem.objective();
    let mut out = String::new();
    out.push_str("rhoqubo-instance v1\n");
    out.push_str(&format!("name {}\n", bundle.name));
    match &bundle.provenance {
        Provenance::FromFile { path } => {
            reject_multiline(path, "provenance path")?;
            out.push_str(&format!("provenance file {path}\n"));
        }
        Provenance::Generated { seed, params } => {
            reject_multiline(params, "provenance params")?;
            if params.is_empty() {
                out.push_str(&format!("provenance generated {seed}\n"));
            } else {
                out.push_str(&format!("provenance generated {seed} {params}\n"));
            }
        }
    }
    out.push_str(&format!(
        "sense {}\n",
        match q.sense() {
            Sense::Minimize => "min",
            Sense::Maximize => "max",
        }
    ));
    out.push_str(&format!("vars {}\n", q.dimension()));
    out.push_str(&format!("offset {}\n", q.offset()));
    out.push_str(&format!("entries {}\n", q.entry_count()));
    for (i, j, v) in q.entries() {
        out.push_str(&format!("{i} {j} {v}\n"));
    }
    out.push_str(&format!(
        "inequalities {}\n",
        bundle.problem.inequalities().len()
    ));
    for ineq in bundle.problem.inequalities() {
        out.push_str(&ineq.bound().to_string());
        for c in ineq.coeffs() {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
    }
    out.push_str(&format!("equalities {}\n", bundle.problem.equalities().len()));
    for eq in bundle.problem.equalities() {
        out.push_str(&eq.rhs().to_string());
        for c in eq.coeffs() {
            out.push_str(&format!(" {c}"));
        }
        out.push('\n');
    }
    Ok(out)
}

fn keyword_rest<'a>(cur: &mut Cursor<'a>, key: &str) -> Result<(usize, &'a str)> {
    let (no, line) = cur.next_required(&format!("'{key}' line"))?;
    match line.split_once(' ') {
        Some((head, rest)) if head == key => Ok((no, rest)),
        None if line == key => Ok((no, "")),
        _ => Err(Error::parse(no, format!("expected '{key} ...'"))),
    }
}

/// Parse the native format back into a bundle.
pub fn read_native(text: &str) -> Result<InstanceBundle> {
    let mut cur = Cursor::new(text);
    let (no, header) = cur.next_required("format header")?;
    if header.trim() != "rhoqubo-instance v1" {
        return Err(Error::parse(
            no,
            format!("unsupported header '{}', expected 'rhoqubo-instance v1'", header.trim()),
        ));
    }
    let (_, name) = keyword_rest(&mut cur, "name")?;
    let name = name.to_string();

    let (no, prov) = keyword_rest(&mut cur, "provenance")?;
    let provenance = match prov.split_once(' ').unwrap_or((prov, "")) {
        ("file", path) => Provenance::FromFile {
            path: path.to_string(),
        },
        ("generated", rest) => {
            let (seed_tok, params) = rest.split_once(' ').unwrap_or((rest, ""));
            let seed = seed_tok
                .parse()
                .map_err(|_| Error::parse(no, format!("bad generator seed '{seed_tok}'")))?;
            Provenance::Generated {
                seed,
                params: params.to_string(),
            }
        }
        _ => return Err(Error::parse(no, "expected provenance 'file' or 'generated'")),
    };

    let (no, sense) = keyword_rest(&mut cur, "sense")?;
    let sense = match sense {
        "min" => Sense::Minimize,
        "max" => Sense::Maximize,
        other => return Err(Error::parse(no, format!("unknown sense '{other}'"))),
    };
    let (no, vars) = keyword_rest(&mut cur, "vars")?;
    let n = parse_usize(vars.trim(), no, "variable count")?;
    let (no, offset) = keyword_rest(&mut cur, "offset")?;
    let offset = parse_i64(offset.trim(), no, "offset")?;
    let (no, entries) = keyword_rest(&mut cur, "entries")?;
    let entry_count = parse_usize(entries.trim(), no, "entry count")?;

    let mut builder = QuboBuilder::new(n).sense(sense);
    builder.add_offset(offset);
    for _ in 0..entry_count {
        let (no, line) = cur.next_required("matrix entry")?;
        let row = int_row(line, no, 3, "matrix entry")?;
        let (i, j, v) = (row[0], row[1], row[2]);
        if i < 0 || j < i || j >= n as i64 {
            return Err(Error::parse(
                no,
                format!("bad entry indices ({i}, {j}) for dimension {n}"),
            ));
        }
        builder.add(i as usize, j as usize, v);
    }

    let (no, count) = keyword_rest(&mut cur, "inequalities")?;
    let ineq_count = parse_usize(count.trim(), no, "inequality count")?;
    let mut inequalities = Vec::with_capacity(ineq_count);
    for _ in 0..ineq_count {
        let (no, line) = cur.next_required("inequality row")?;
        let row = int_row(line, no, n + 1, "inequality row")?;
        inequalities.push(LinearInequality::new(row[1..].to_vec(), row[0])?);
    }

    let (no, count) = keyword_rest(&mut cur, "equalities")?;
    let eq_count = parse_usize(count.trim(), no, "equality count")?;
    let mut equalities = Vec::with_capacity(eq_count);
    for _ in 0..eq_count {
        let (no, line) = cur.next_required("equality row")?;
        let row = int_row(line, no, n + 1, "equality row")?;
        equalities.push(LinearEquality::new(row[1..].to_vec(), row[0])?);
    }
    cur.expect_end()?;

    let problem = ConstrainedProblem::new(builder.build()?, inequalities, equalities)?;
    Ok(InstanceBundle {
        name,
        provenance,
        problem,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::BinaryAssignment;

    #[test]
    fn orlib_single_entry_example() {
        let matrices = read_orlib_bqp("1\n2 1\n1 2 5\n").unwrap();
        assert_eq!(matrices.len(), 1);
        assert_eq!(matrices[0].dimension(), 2);
        assert_eq!(matrices[0].entry(0, 1), 5);
        assert_eq!(matrices[0].entry_count(), 1);
    }

    #[test]
    fn orlib_zero_matrix_and_crlf() {
        let matrices = read_orlib_bqp("1\r\n3 0\r\n").unwrap();
        assert_eq!(matrices[0].dimension(), 3);
        assert_eq!(matrices[0].entry_count(), 0);
    }

    #[test]
    fn orlib_truncated_instance_reports_the_missing_line() {
        let err = read_orlib_bqp("1\n2 2\n1 2 5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
    }

    #[test]
    fn orlib_duplicates_accumulate() {
        let matrices = read_orlib_bqp("1\n2 2\n1 2 3\n2 1 4\n").unwrap();
        assert_eq!(matrices[0].entry(0, 1), 7);
    }

    #[test]
    fn orlib_rejects_floats_and_bad_indices() {
        let err = read_orlib_bqp("1\n2 1\n1 2 2.5\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = read_orlib_bqp("1\n2 1\n1 3 4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
    }

    #[test]
    fn orlib_reads_several_instances() {
        let matrices = read_orlib_bqp("2\n1 1\n1 1 4\n2 1\n1 2 -3\n\n").unwrap();
        assert_eq!(matrices.len(), 2);
        assert_eq!(matrices[0].entry(0, 0), 4);
        assert_eq!(matrices[1].entry(0, 1), -3);
    }

    #[test]
    fn qkp_parses_a_minimal_instance() {
        let text = "tiny\n2\n3 5\n7\n\n0\n10\n4 6\n";
        let bundle = read_qkp(text).unwrap();
        assert_eq!(bundle.name, "tiny");
        let q = bundle.problem.objective();
        assert_eq!(q.sense(), Sense::Maximize);
        assert_eq!(q.entry(0, 0), -3);
        assert_eq!(q.entry(1, 1), -5);
        assert_eq!(q.entry(0, 1), -7);
        let ineq = &bundle.problem.inequalities()[0];
        assert_eq!(ineq.coeffs(), &[4, 6]);
        assert_eq!(ineq.bound(), 10);
        // Profit of taking both items is 15; internal value is -15.
        let both = BinaryAssignment::from_u01(&[1, 1]).unwrap();
        assert_eq!(q.evaluate(&both).unwrap(), -15);
        assert_eq!(q.to_user_sense(q.evaluate(&both).unwrap()), 15);
    }

    #[test]
    fn qkp_accepts_zero_separator_and_single_variable() {
        let text = "one\n1\n9\n0\n0\n5\n2\n";
        let bundle = read_qkp(text).unwrap();
        assert_eq!(bundle.problem.dimension(), 1);
        assert_eq!(bundle.problem.objective().entry(0, 0), -9);
        assert_eq!(bundle.problem.inequalities()[0].bound(), 5);
    }

    #[test]
    fn qkp_reports_bad_row_lengths_with_the_row_index() {
        let text = "bad\n3\n1 2 3\n4 5 6\n7\n\n0\n9\n1 1 1\n";
        let err = read_qkp(text).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 4);
                assert!(message.contains("quadratic row 1"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn qkp_missing_capacity_is_an_error() {
        let text = "bad\n2\n3 5\n7\n\n0\n";
        assert!(matches!(read_qkp(text), Err(Error::Parse { .. })));
    }

    #[test]
    fn generated_instances_are_reproducible() {
        let a = generate_qkp(100, 25, 1).unwrap();
        let b = generate_qkp(100, 25, 1).unwrap();
        assert_eq!(a, b);
        let c = generate_qkp(100, 25, 2).unwrap();
        assert_ne!(a, c);
        assert_eq!(a.provenance.param("density"), Some("25"));
        assert_eq!(a.provenance.param("n"), Some("100"));
        assert_eq!(a.provenance.param("missing"), None);
    }

    #[test]
    fn full_density_fills_the_upper_triangle() {
        let bundle = generate_qkp(12, 100, 7).unwrap();
        let q = bundle.problem.objective();
        assert_eq!(q.entry_count(), 12 + 12 * 11 / 2);
        for (_, _, v) in q.entries() {
            assert!((-100..=-1).contains(&v));
        }
    }

    #[test]
    fn measured_density_tracks_the_nominal_level() {
        let mut present = 0usize;
        let mut total = 0usize;
        for seed in 0..50 {
            let bundle = generate_qkp(40, 50, seed).unwrap();
            let q = bundle.problem.objective();
            present += q.entry_count() - 40;
            total += 40 * 39 / 2;
        }
        let percent = 100.0 * present as f64 / total as f64;
        assert!(
            (47.0..=53.0).contains(&percent),
            "measured density {percent:.2}%"
        );
    }

    #[test]
    fn generated_capacity_stays_in_range() {
        for seed in 0..20 {
            let bundle = generate_qkp(30, 50, seed).unwrap();
            let ineq = &bundle.problem.inequalities()[0];
            let total: i64 = ineq.coeffs().iter().sum();
            let lo = (total - 1).min(50);
            assert!(ineq.bound() >= lo && ineq.bound() < total);
            assert!(ineq.coeffs().iter().all(|&w| (1..=100).contains(&w)));
        }
    }

    #[test]
    fn cardinality_constraint_reference_bounds() {
        let q = QuboMatrix::zero(2500);
        let p = attach_cardinality_constraint(q.clone(), 20).unwrap();
        assert_eq!(p.inequalities()[0].bound(), 500);
        let p = attach_cardinality_constraint(q.clone(), 50).unwrap();
        assert_eq!(p.inequalities()[0].bound(), 1250);
        let p = attach_cardinality_constraint(QuboMatrix::zero(10), 80).unwrap();
        assert_eq!(p.inequalities()[0].bound(), 8);
        assert!(p.inequalities()[0].coeffs().iter().all(|&c| c == 1));
        assert!(attach_cardinality_constraint(q.clone(), 0).is_err());
        assert!(attach_cardinality_constraint(q, 100).is_err());
    }

    fn random_bundle(seed: u64) -> InstanceBundle {
        let mut rng = SplitMix64::new(seed);
        let n = 1 + rng.bounded(8) as usize;
        let mut b = QuboBuilder::new(n);
        if rng.next_bool() {
            b = b.sense(Sense::Maximize);
        }
        b.add_offset(rng.range_i64(-50, 50));
        for i in 0..n {
            for j in i..n {
                if rng.bounded(100) < 60 {
                    b.add(i, j, rng.range_i64(-30, 30));
                }
            }
        }
        let mut inequalities = Vec::new();
        for _ in 0..rng.bounded(3) {
            let coeffs = (0..n).map(|_| rng.range_i64(-9, 9)).collect();
            inequalities.push(LinearInequality::new(coeffs, rng.range_i64(-5, 30)).unwrap());
        }
        let mut equalities = Vec::new();
        if rng.next_bool() {
            let coeffs = (0..n).map(|_| rng.range_i64(-9, 9)).collect();
            equalities.push(LinearEquality::new(coeffs, rng.range_i64(-5, 10)).unwrap());
        }
        let provenance = if rng.next_bool() {
            Provenance::FromFile {
                path: format!("data/case-{seed}.txt"),
            }
        } else {
            Provenance::Generated {
                seed: rng.next_u64(),
                params: format!("n={n} kind=random step={}", rng.bounded(10)),
            }
        };
        InstanceBundle {
            name: format!("random bundle {seed}"),
            provenance,
            problem: ConstrainedProblem::new(b.build().unwrap(), inequalities, equalities)
                .unwrap(),
        }
    }

    #[test]
    fn native_format_round_trips_exactly() {
        for seed in 0..100 {
            let bundle = random_bundle(seed);
            let text = write_native(&bundle).unwrap();
            let back = read_native(&text).unwrap();
            assert_eq!(back, bundle, "seed {seed}\n{text}");
            // A second trip through text is byte-identical.
            assert_eq!(write_native(&back).unwrap(), text);
        }
    }

    #[test]
    fn native_round_trips_generated_instances() {
        let bundle = generate_qkp(25, 50, 99).unwrap();
        let text = write_native(&bundle).unwrap();
        assert_eq!(read_native(&text).unwrap(), bundle);
    }

    #[test]
    fn native_rejects_foreign_headers() {
        let err = read_native("rhoqubo-instance v2\n").unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 1);
                assert!(message.contains("v2"), "{message}");
            }
            other => panic!("unexpected error {other}"),
        }
        assert!(read_native("something else\n").is_err());
    }

    #[test]
    fn native_rejects_truncation_and_bad_counts() {
        let bundle = random_bundle(3);
        let text = write_native(&bundle).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.pop();
        let truncated = lines.join("\n");
        assert!(read_native(&truncated).is_err());

        let patched = text.replace("entries ", "entries 9");
        assert!(read_native(&patched).is_err());
    }
}
