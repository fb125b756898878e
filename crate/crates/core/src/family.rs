//! Row-stochastic matrices that become doubly stochastic after exactly one
//! column scaling.
//!
//! For positive integers `k`, `l` and `n > max(2k, 2l)`, and positive
//! rationals `x`, `z` with `0 < x + z < 1/k`, `x + z != 2/n`, set
//! `y = (x + z)/2` and `w = (1 - k(x + z))/(n - 2k)`. Every row consists of
//! `k` leading entries, `n - 2k` middle entries equal to `w`, and `k`
//! trailing entries:
//!
//! | rows            | leading | trailing |
//! |-----------------|---------|----------|
//! | `1..=l`         | `x`     | `z`      |
//! | `l+1..=n-l`     | `y`     | `y`      |
//! | `n-l+1..=n`     | `z`     | `x`      |
//!
//! Such a matrix is row stochastic, its column sums are `ny` (outer
//! columns) and `nw` (middle columns), and it is singular.

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{scaling_count, ScalingCount};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{format_rational, rat_int, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyParams {
    pub k: usize,
    pub ell: usize,
    pub n: usize,
    pub x: Rational,
    pub z: Rational,
    pub y: Rational,
    pub w: Rational,
}

impl FamilyParams {
    pub fn new(k: usize, ell: usize, n: usize, x: Rational, z: Rational) -> Result<Self> {
        let p = Self::new_allowing_degenerate(k, ell, n, x, z)?;
        let sum = &p.x + &p.z;
        if sum == Rational::new(2.into(), n.into()) {
            return Err(Error::DegenerateSum {
                sum: format_rational(&sum),
            });
        }
        Ok(p)
    }

    /// Like [`FamilyParams::new`] but accepts `x + z = 2/n`, where the
    /// construction is already doubly stochastic. Only useful for testing
    /// that exclusion.
    pub fn new_allowing_degenerate(k: usize, ell: usize, n: usize, x: Rational, z: Rational) -> Result<Self> {
        for (name, v) in [("k", k), ("l", ell), ("n", n)] {
            if v == 0 {
                return Err(Error::NonPositiveParameter(name));
            }
        }
        if !x.is_positive() {
            return Err(Error::NonPositiveParameter("x"));
        }
        if !z.is_positive() {
            return Err(Error::NonPositiveParameter("z"));
        }
        let bound = 2 * k.max(ell);
        if n <= bound {
            return Err(Error::DimensionTooSmall { n, bound });
        }
        let sum = &x + &z;
        if sum * rat_int(k as i64) >= rat_int(1) {
            return Err(Error::SumOutOfRange {
                sum: format_rational(&(&x + &z)),
                k,
            });
        }
        let sum = &x + &z;
        let y = &sum / rat_int(2);
        let w = (rat_int(1) - rat_int(k as i64) * &sum) / rat_int((n - 2 * k) as i64);
        // positive by the range checks above
        debug_assert!(y.is_positive() && w.is_positive());
        Ok(Self { k, ell, n, x, z, y, w })
    }

    /// Builds the family matrix.
    pub fn matrix(&self) -> Matrix<Rational> {
        let (n, k, ell) = (self.n, self.k, self.ell);
        Matrix::from_fn(n, n, |i, j| {
            let (lead, trail) = if i < ell {
                (&self.x, &self.z)
            } else if i < n - ell {
                (&self.y, &self.y)
            } else {
                (&self.z, &self.x)
            };
            if j < k {
                lead.clone()
            } else if j < n - k {
                self.w.clone()
            } else {
                trail.clone()
            }
        })
        .expect("n > 0")
    }

    /// Column sum of the `2k` outer columns, `ny`.
    pub fn outer_col_sum(&self) -> Rational {
        rat_int(self.n as i64) * &self.y
    }

    /// Column sum of the `n - 2k` middle columns, `nw`.
    pub fn inner_col_sum(&self) -> Rational {
        rat_int(self.n as i64) * &self.w
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OneStepReport {
    pub rows_sum_to_one: bool,
    /// Outer columns sum to `ny`, middle columns to `nw`, neither equal to 1.
    pub column_sums_match: bool,
    pub scaled_doubly_stochastic: bool,
    pub scaling_count_is_one: bool,
    #[serde(skip)]
    pub scaled: Matrix<Rational>,
}

impl OneStepReport {
    pub fn all_pass(&self) -> bool {
        self.rows_sum_to_one && self.column_sums_match && self.scaled_doubly_stochastic && self.scaling_count_is_one
    }
}

/// Checks the one-step property of a family matrix in exact arithmetic.
pub fn verify_one_step(params: &FamilyParams) -> Result<OneStepReport> {
    let a = params.matrix();
    let one = rat_int(1);
    let rows_sum_to_one = a.row_sums().iter().all(|s| *s == one);

    let (outer, inner) = (params.outer_col_sum(), params.inner_col_sum());
    let column_sums_match = outer != one
        && inner != one
        && a.col_sums().iter().enumerate().all(|(j, s)| {
            let expected = if j < params.k || j >= params.n - params.k {
                &outer
            } else {
                &inner
            };
            s == expected
        });

    let scaled = a.scaled(&a.col_scaling()?)?;
    let scaled_doubly_stochastic = scaled.is_doubly_stochastic(&rat_int(0))?;
    let scaling_count_is_one = scaling_count(&a, 4)? == ScalingCount::Finite(1);
    Ok(OneStepReport {
        rows_sum_to_one,
        column_sums_match,
        scaled_doubly_stochastic,
        scaling_count_is_one,
        scaled,
    })
}

/// Which argument shows the family matrix is singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeterminantCase {
    /// `k > 1` or `n - 2k > 1`.
    DuplicateColumns,
    /// `l > 1` or `n - 2l > 1`.
    DuplicateRows,
    /// `k = l = 1`, `n = 3`: `det = w(x - z)(x + z - 2y)`.
    Formula3x3,
}

impl DeterminantCase {
    pub fn for_params(p: &FamilyParams) -> Self {
        if p.k > 1 || p.n - 2 * p.k > 1 {
            DeterminantCase::DuplicateColumns
        } else if p.ell > 1 || p.n - 2 * p.ell > 1 {
            DeterminantCase::DuplicateRows
        } else {
            DeterminantCase::Formula3x3
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyDeterminant {
    pub determinant: Rational,
    pub case: DeterminantCase,
    /// `w(x - z)(x + z - 2y)`, only for the 3x3 case.
    pub formula: Option<Rational>,
}

/// Determinant of the family matrix together with the case that explains
/// why it vanishes.
pub fn family_determinant(params: &FamilyParams) -> Result<FamilyDeterminant> {
    let determinant = params.matrix().determinant()?;
    let case = DeterminantCase::for_params(params);
    let formula =
        (case == DeterminantCase::Formula3x3).then(|| shape3_formula(&params.x, &params.y, &params.z, &params.w));
    if !determinant.is_zero() {
        return Err(Error::InvariantViolation(format!(
            "family matrix has determinant {}",
            format_rational(&determinant)
        )));
    }
    if let Some(f) = &formula {
        if *f != determinant {
            return Err(Error::InvariantViolation(format!(
                "3x3 determinant {} differs from w(x-z)(x+z-2y) = {}",
                format_rational(&determinant),
                format_rational(f)
            )));
        }
    }
    Ok(FamilyDeterminant {
        determinant,
        case,
        formula,
    })
}

/// `w(x - z)(x + z - 2y)`, the determinant of `[[x,w,z],[y,w,y],[z,w,x]]`.
pub fn shape3_formula(x: &Rational, y: &Rational, z: &Rational, w: &Rational) -> Rational {
    w * (x - z) * (x + z - rat_int(2) * y)
}

/// `[[x,w,z],[y,w,y],[z,w,x]]` for arbitrary values.
pub fn shape3_matrix(x: &Rational, y: &Rational, z: &Rational, w: &Rational) -> Matrix<Rational> {
    Matrix::from_rows(vec![
        vec![x.clone(), w.clone(), z.clone()],
        vec![y.clone(), w.clone(), y.clone()],
        vec![z.clone(), w.clone(), x.clone()],
    ])
    .expect("3x3")
}

/// Positive rationals in `(0, 1)` whose reduced denominator is at most `bound`,
/// in increasing order.
pub fn proper_fractions(bound: u64) -> Vec<Rational> {
    let mut v: Vec<Rational> = (2..=bound as i64)
        .flat_map(|q| (1..q).map(move |p| (p, q)))
        .filter(|&(p, q)| num_integer::gcd(p, q) == 1)
        .map(|(p, q)| Rational::new(p.into(), q.into()))
        .collect();
    v.sort();
    v
}

/// Every valid parameter tuple with `k, l <= max_kl`, `n <= max_n` and
/// `x`, `z` of denominator at most `max_denominator`, in lexicographic
/// order of `(k, l, n, x, z)`.
pub fn parameter_grid(max_kl: usize, max_n: usize, max_denominator: u64) -> Vec<FamilyParams> {
    let fractions = proper_fractions(max_denominator);
    let mut out = Vec::new();
    for k in 1..=max_kl {
        for ell in 1..=max_kl {
            for n in 2 * k.max(ell) + 1..=max_n {
                for x in &fractions {
                    for z in &fractions {
                        if let Ok(p) = FamilyParams::new(k, ell, n, x.clone(), z.clone()) {
                            out.push(p);
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub params: FamilyParams,
    pub one_step: OneStepReport,
    pub determinant: Result<FamilyDeterminant>,
}

impl GridOutcome {
    pub fn passed(&self) -> bool {
        self.one_step.all_pass() && self.determinant.is_ok()
    }
}

/// Verifies every tuple in parallel; results keep the order of `grid`.
pub fn verify_grid(grid: &[FamilyParams]) -> Result<Vec<GridOutcome>> {
    grid.par_iter()
        .map(|p| {
            Ok(GridOutcome {
                params: p.clone(),
                one_step: verify_one_step(p)?,
                determinant: family_determinant(p),
            })
        })
        .collect()
}
