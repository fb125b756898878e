//! Exhaustive and randomized searches over positive row-stochastic rational
//! matrices that become doubly stochastic after one column scaling.
//!
//! Every hit is recorded with its determinant and whether it has the 3x3
//! shape `[[x,w,z],[y,w,y],[z,w,x]]`. The search only gathers evidence:
//! when no witness turns up, the report says the question is still open up
//! to the searched bound.

use std::fmt::{self, Write as _};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{scaling_count, ScalingCount};
use crate::error::{Error, Result};
use crate::family::proper_fractions;
use crate::format::write_matrix;
use crate::matrix::Matrix;
use crate::scalar::{format_rational, rat_int, Rational};

/// Largest exhaustive search space accepted.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

/// Ordered compositions of 1 into `n` positive rationals with reduced
/// denominators at most `bound`, in lexicographic order.
pub fn row_compositions(n: usize, bound: u64) -> Vec<Vec<Rational>> {
    compositions_up_to(n, bound, usize::MAX)
}

/// Like [`row_compositions`] but stops once more than `cap` rows are found.
fn compositions_up_to(n: usize, bound: u64, cap: usize) -> Vec<Vec<Rational>> {
    let values = proper_fractions(bound);
    let bound_int = num_bigint::BigInt::from(bound);
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    fn extend(
        values: &[Rational],
        bound: &num_bigint::BigInt,
        n: usize,
        remaining: Rational,
        prefix: &mut Vec<Rational>,
        out: &mut Vec<Vec<Rational>>,
        cap: usize,
    ) {
        if out.len() > cap {
            return;
        }
        if prefix.len() + 1 == n {
            if remaining.is_positive() && remaining.denom() <= bound {
                let mut row = prefix.clone();
                row.push(remaining);
                out.push(row);
            }
            return;
        }
        for v in values {
            if *v >= remaining {
                break;
            }
            prefix.push(v.clone());
            extend(values, bound, n, &remaining - v, prefix, out, cap);
            prefix.pop();
        }
    }
    if n == 1 {
        return vec![vec![Rational::one()]];
    }
    extend(&values, &bound_int, n, Rational::one(), &mut prefix, &mut out, cap);
    out
}

/// Every positive row-stochastic `n x n` matrix with entry denominators at
/// most `bound`, rows in lexicographic order with the first row most
/// significant.
#[derive(Debug, Clone)]
pub struct RowStochasticStream {
    n: usize,
    rows: Vec<Vec<Rational>>,
}

pub fn enumerate_row_stochastic(n: usize, bound: u64) -> Result<RowStochasticStream> {
    enumerate_up_to(n, bound, usize::MAX)
}

fn enumerate_up_to(n: usize, bound: u64, cap: usize) -> Result<RowStochasticStream> {
    if n < 2 {
        return Err(Error::InvalidArgument("n must be at least 2".into()));
    }
    if bound < n as u64 {
        return Err(Error::BoundTooSmall { n, bound });
    }
    Ok(RowStochasticStream {
        n,
        rows: compositions_up_to(n, bound, cap),
    })
}

impl RowStochasticStream {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_choices(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// Number of matrices in the stream.
    pub fn len(&self) -> u128 {
        (self.rows.len() as u128).saturating_pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Matrices whose first row is `row_choices()[first]`, in stream order.
    pub fn shard(&self, first: usize) -> impl Iterator<Item = Matrix<Rational>> + '_ {
        Odometer::new(self.n - 1, self.rows.len()).map(move |idx| self.build(first, &idx))
    }

    pub fn iter(&self) -> impl Iterator<Item = Matrix<Rational>> + '_ {
        (0..self.rows.len()).flat_map(move |first| self.shard(first))
    }

    fn build(&self, first: usize, rest: &[usize]) -> Matrix<Rational> {
        let mut entries = Vec::with_capacity(self.n * self.n);
        entries.extend(self.rows[first].iter().cloned());
        for &r in rest {
            entries.extend(self.rows[r].iter().cloned());
        }
        Matrix::new(self.n, self.n, entries).expect("n x n")
    }
}

/// Counts through all `digits`-long index tuples below `base`, last digit fastest.
struct Odometer {
    state: Option<Vec<usize>>,
    base: usize,
}

impl Odometer {
    fn new(digits: usize, base: usize) -> Self {
        Self {
            state: (base > 0).then(|| vec![0; digits]),
            base,
        }
    }
}

impl Iterator for Odometer {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.state.clone()?;
        let state = self.state.as_mut().expect("checked above");
        let mut i = state.len();
        loop {
            if i == 0 {
                self.state = None;
                break;
            }
            i -= 1;
            state[i] += 1;
            if state[i] < self.base {
                break;
            }
            state[i] = 0;
        }
        Some(current)
    }
}

/// `[[x,w,z],[y,w,y],[z,w,x]]` with positive entries, `y = (x+z)/2` and
/// `w = 1 - x - z`.
pub fn matches_shape3(a: &Matrix<Rational>) -> Result<bool> {
    if a.rows() != 3 || a.cols() != 3 {
        return Err(Error::NotThreeByThree {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let (x, w, z, y) = (&a[(0, 0)], &a[(0, 1)], &a[(0, 2)], &a[(1, 0)]);
    Ok(a.is_positive()
        && a[(1, 1)] == *w
        && a[(2, 1)] == *w
        && a[(1, 2)] == *y
        && a[(2, 0)] == *z
        && a[(2, 2)] == *x
        && y * rat_int(2) == x + z
        && *w == rat_int(1) - x - z)
}

/// One-step test specialised to the search: a row-stochastic candidate has
/// count one exactly when it is not column stochastic and column scaling
/// makes its rows sum to one again.
fn is_one_step_candidate(a: &Matrix<Rational>) -> Result<bool> {
    let one = Rational::one();
    if !a.row_sums().iter().all(|s| *s == one) {
        return Ok(scaling_count(a, 2)? == ScalingCount::Finite(1));
    }
    let col_sums = a.col_sums();
    if col_sums.iter().all(|s| *s == one) || col_sums.iter().any(|s| !s.is_positive()) {
        return Ok(false);
    }
    Ok(a.row_iter().all(|row| {
        row.iter()
            .zip(&col_sums)
            .fold(Rational::zero(), |acc, (v, c)| acc + v / c)
            == one
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Predicate {
    /// Look for a one-step matrix with nonzero determinant.
    OneStepNonsingular,
    /// Look for a singular one-step 3x3 matrix that is not of the symmetric 3x3 shape.
    OneStepShapeCheck,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Predicate::OneStepNonsingular => "one-step-nonsingular",
            Predicate::OneStepShapeCheck => "one-step-shape-check",
        })
    }
}

impl std::str::FromStr for Predicate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "one-step-nonsingular" => Ok(Predicate::OneStepNonsingular),
            "one-step-shape-check" => Ok(Predicate::OneStepShapeCheck),
            other => Err(format!("unknown predicate `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum SearchMode {
    Exhaustive,
    /// Rows are positive integer vectors with entries in `1..=bound`,
    /// normalized to sum one.
    Randomized {
        seed: u64,
        samples: usize,
    },
}

#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub n: usize,
    pub denominator_bound: u64,
    pub mode: SearchMode,
    pub predicate: Predicate,
    /// Extra candidates examined after the generated ones.
    pub planted: Vec<Matrix<Rational>>,
}

impl SearchSpec {
    pub fn exhaustive(n: usize, denominator_bound: u64, predicate: Predicate) -> Self {
        Self {
            n,
            denominator_bound,
            mode: SearchMode::Exhaustive,
            predicate,
            planted: Vec::new(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument("n must be at least 2".into()));
        }
        if self.predicate == Predicate::OneStepShapeCheck && self.n != 3 {
            return Err(Error::InvalidArgument("the shape check needs n = 3".into()));
        }
        if self.denominator_bound < 2 {
            return Err(Error::InvalidArgument("bound must be at least 2".into()));
        }
        if self.planted.iter().any(|m| m.rows() != self.n || m.cols() != self.n) {
            return Err(Error::InvalidArgument("planted matrices must be n x n".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Finding {
    pub matrix: Matrix<Rational>,
    pub det: Rational,
    pub one_step: bool,
    /// Always false when the matrix is not 3x3.
    pub matches_shape3: bool,
}

impl Serialize for Finding {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Finding", 4)?;
        s.serialize_field("matrix", &self.matrix)?;
        s.serialize_field("det", &format_rational(&self.det))?;
        s.serialize_field("one_step", &self.one_step)?;
        s.serialize_field("matches_shape3", &self.matches_shape3)?;
        s.end()
    }
}

/// Classifies one candidate; `None` when it is not a one-step matrix.
pub fn classify(a: &Matrix<Rational>) -> Result<Option<Finding>> {
    if !a.is_positive() || !is_one_step_candidate(a)? {
        return Ok(None);
    }
    let det = a.determinant()?;
    let matches_shape3 = a.rows() == 3 && a.cols() == 3 && matches_shape3(a)?;
    let finding = Finding {
        matrix: a.clone(),
        det,
        one_step: true,
        matches_shape3,
    };
    reverify(&finding)?;
    Ok(Some(finding))
}

/// Re-derives a finding's verdicts through the scaling engine and a second
/// determinant evaluation.
fn reverify(f: &Finding) -> Result<()> {
    let count = scaling_count(&f.matrix, 4)?;
    if count != ScalingCount::Finite(1) {
        return Err(Error::InvariantViolation(format!(
            "finding has scaling count {count}, expected 1"
        )));
    }
    if f.matrix.transpose().determinant()? != f.det {
        return Err(Error::InvariantViolation(
            "determinant disagrees with its transpose".into(),
        ));
    }
    if f.matches_shape3 && !f.det.is_zero() {
        return Err(Error::InvariantViolation(
            "symmetric 3x3 shape with nonzero determinant".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub n: usize,
    pub bound: u64,
    #[serde(flatten)]
    pub mode: SearchMode,
    pub predicate: Predicate,
    pub candidates: u128,
    pub findings: Vec<Finding>,
    /// Indices into `findings` that answer the predicate's question.
    pub witnesses: Vec<usize>,
    pub verdict: String,
}

impl SearchReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mode = match self.mode {
            SearchMode::Exhaustive => "exhaustive".to_string(),
            SearchMode::Randomized { seed, samples } => format!("randomized seed={seed} samples={samples}"),
        };
        let _ = writeln!(
            out,
            "search n={} bound={} mode={} predicate={}",
            self.n, self.bound, mode, self.predicate
        );
        let _ = writeln!(out, "candidates {}", self.candidates);
        let _ = writeln!(out, "one_step_findings {}", self.findings.len());
        for (i, f) in self.findings.iter().enumerate() {
            let _ = writeln!(
                out,
                "finding {} one_step {} det {} shape3 {}",
                i + 1,
                f.one_step,
                format_rational(&f.det),
                f.matches_shape3
            );
            out.push_str(&write_matrix(&f.matrix));
        }
        let _ = writeln!(out, "witnesses {}", self.witnesses.len());
        let _ = writeln!(out, "verdict {}", self.verdict);
        out
    }
}

/// Runs a search on `workers` threads. The report depends only on `spec`.
pub fn search_one_step(spec: &SearchSpec, workers: usize) -> Result<SearchReport> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;

    let (generated, mut findings) = match spec.mode {
        SearchMode::Exhaustive => {
            let stream = enumerate_up_to(spec.n, spec.denominator_bound, rows_within_limit(spec.n))?;
            if stream.len() > EXHAUSTIVE_LIMIT {
                return Err(Error::SearchTooLarge {
                    size: stream.len(),
                    limit: EXHAUSTIVE_LIMIT,
                });
            }
            let shards: Vec<Vec<Finding>> = pool.install(|| {
                (0..stream.row_choices().len())
                    .into_par_iter()
                    .map(|first| {
                        stream
                            .shard(first)
                            .filter_map(|m| classify(&m).transpose())
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()
            })?;
            (stream.len(), shards.into_iter().flatten().collect::<Vec<_>>())
        }
        SearchMode::Randomized { seed, samples } => {
            let candidates = random_row_stochastic(spec.n, spec.denominator_bound, seed, samples);
            let found: Vec<Option<Finding>> =
                pool.install(|| candidates.par_iter().map(classify).collect::<Result<_>>())?;
            (samples as u128, found.into_iter().flatten().collect())
        }
    };
    for m in &spec.planted {
        if let Some(f) = classify(m)? {
            findings.push(f);
        }
    }

    let witnesses: Vec<usize> = findings
        .iter()
        .enumerate()
        .filter(|(_, f)| match spec.predicate {
            Predicate::OneStepNonsingular => !f.det.is_zero(),
            Predicate::OneStepShapeCheck => f.det.is_zero() && !f.matches_shape3,
        })
        .map(|(i, _)| i)
        .collect();
    let verdict = if witnesses.is_empty() {
        format!("OPEN: no witness found up to bound {}", spec.denominator_bound)
    } else {
        match spec.predicate {
            Predicate::OneStepNonsingular => format!(
                "WITNESS FOUND: {} one-step matrices with nonzero determinant",
                witnesses.len()
            ),
            Predicate::OneStepShapeCheck => format!(
                "WITNESS FOUND: {} singular one-step matrices without the symmetric 3x3 shape",
                witnesses.len()
            ),
        }
    };
    Ok(SearchReport {
        n: spec.n,
        bound: spec.denominator_bound,
        mode: spec.mode,
        predicate: spec.predicate,
        candidates: generated + spec.planted.len() as u128,
        findings,
        witnesses,
        verdict,
    })
}

/// Largest row count `r` with `r^n` within [`EXHAUSTIVE_LIMIT`].
fn rows_within_limit(n: usize) -> usize {
    let exp = n as u32;
    let mut r: u128 = 1;
    while (r + 1).saturating_pow(exp) <= EXHAUSTIVE_LIMIT {
        r += 1;
    }
    r as usize
}

/// Seeded sample of row-stochastic matrices, each row a positive integer
/// vector with entries in `1..=bound` divided by its sum.
pub fn random_row_stochastic(n: usize, bound: u64, seed: u64, samples: usize) -> Vec<Matrix<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut entries = Vec::with_capacity(n * n);
            for _ in 0..n {
                let ints: Vec<u64> = (0..n).map(|_| rng.random_range(1..=bound)).collect();
                let total: u64 = ints.iter().sum();
                entries.extend(ints.iter().map(|&v| Rational::new(v.into(), total.into())));
            }
            Matrix::new(n, n, entries).expect("n x n")
        })
        .collect()
}
