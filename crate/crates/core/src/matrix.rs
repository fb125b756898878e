//! Dense matrices, row/column sums, diagonal scalings and stochasticity.

use std::fmt;
use std::ops::Index;

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{max_abs, Scalar};

/// Dense row-major matrix over a single scalar kind.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if entries.len() != rows * cols {
            return Err(Error::EntryCount {
                expected: rows * cols,
                actual: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut entries = Vec::with_capacity(nrows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: cols,
                    actual: row.len(),
                });
            }
            entries.extend(row);
        }
        Self::new(nrows, cols, entries)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, entries)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[T]> {
        self.entries.chunks(self.cols)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = &T> {
        self.entries.iter().skip(j).step_by(self.cols)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.row_iter().map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        let entries = (0..self.rows * self.cols)
            .map(|k| self[(k % self.rows, k / self.rows)].clone())
            .collect();
        Self {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn map<U: Scalar>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(T::to_f64)
    }

    pub fn ensure_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    /// All entries strictly positive.
    pub fn is_positive(&self) -> bool {
        self.entries.iter().all(T::is_positive)
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.entries.iter().any(T::is_negative)
    }

    /// First entry that is not strictly positive, row-major.
    pub fn first_non_positive(&self) -> Option<(usize, usize)> {
        self.entries
            .iter()
            .position(|v| !v.is_positive())
            .map(|k| (k / self.cols, k % self.cols))
    }

    pub fn row_sums(&self) -> Vec<T> {
        self.row_iter()
            .map(|row| row.iter().fold(T::zero(), |acc, v| acc + v.clone()))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<T> {
        let mut sums = vec![T::zero(); self.cols];
        for row in self.row_iter() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s = s.clone() + v.clone();
            }
        }
        sums
    }

    /// `X(A) = diag(1 / rowsum_i)`, applied on the left.
    pub fn row_scaling(&self) -> Result<DiagonalScaling<T>> {
        let values = reciprocals(self.row_sums()).map_err(Error::ZeroRowSum)?;
        Ok(DiagonalScaling {
            values,
            side: Side::Left,
        })
    }

    /// `Y(A) = diag(1 / colsum_j)`, applied on the right.
    pub fn col_scaling(&self) -> Result<DiagonalScaling<T>> {
        let values = reciprocals(self.col_sums()).map_err(Error::ZeroColSum)?;
        Ok(DiagonalScaling {
            values,
            side: Side::Right,
        })
    }

    /// `DA` for a left scaling, `AD` for a right one.
    pub fn scaled(&self, d: &DiagonalScaling<T>) -> Result<Self> {
        let expected = match d.side {
            Side::Left => self.rows,
            Side::Right => self.cols,
        };
        if d.values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: d.values.len(),
            });
        }
        Ok(Matrix::from_fn(self.rows, self.cols, |i, j| {
            let k = match d.side {
                Side::Left => i,
                Side::Right => j,
            };
            d.values[k].clone() * self[(i, j)].clone()
        })
        .expect("shape unchanged"))
    }

    /// Deviation of row and column sums from one, compared against
    /// `tolerance`. Exact matrices only accept a zero tolerance.
    pub fn stochasticity(&self, tolerance: &T) -> Result<StochasticityReport<T>> {
        check_tolerance(tolerance)?;
        let one = T::one();
        let row_dev = max_abs(&self.row_sums().into_iter().map(|s| s - one.clone()).collect::<Vec<_>>());
        let col_dev = max_abs(&self.col_sums().into_iter().map(|s| s - one.clone()).collect::<Vec<_>>());
        let nonnegative = self.is_nonnegative();
        Ok(StochasticityReport {
            row_stochastic: nonnegative && row_dev <= *tolerance,
            col_stochastic: nonnegative && col_dev <= *tolerance,
            nonnegative,
            max_row_deviation: row_dev,
            max_col_deviation: col_dev,
        })
    }

    pub fn is_doubly_stochastic(&self, tolerance: &T) -> Result<bool> {
        let r = self.stochasticity(tolerance)?;
        Ok(r.row_stochastic && r.col_stochastic)
    }
}

pub(crate) fn check_tolerance<T: Scalar>(tolerance: &T) -> Result<()> {
    if tolerance.is_negative() {
        return Err(Error::NegativeTolerance);
    }
    if T::KIND.is_exact() && !tolerance.is_zero() {
        return Err(Error::NonzeroToleranceInExactMode);
    }
    Ok(())
}

fn reciprocals<T: Scalar>(sums: Vec<T>) -> std::result::Result<Vec<T>, usize> {
    sums.into_iter()
        .enumerate()
        .map(|(i, s)| if s.is_zero() { Err(i) } else { Ok(T::one() / s) })
        .collect()
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix<{}> {}x{} [", T::KIND, self.rows, self.cols)?;
        for row in self.row_iter() {
            let cells: Vec<_> = row.iter().map(T::to_text).collect();
            writeln!(f, "  {}", cells.join(" "))?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let entries: Vec<Vec<serde_json::Value>> = self
            .row_iter()
            .map(|row| row.iter().map(T::to_json).collect())
            .collect();
        let mut s = serializer.serialize_struct("Matrix", 4)?;
        s.serialize_field("kind", &T::KIND)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        s.serialize_field("entries", &entries)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Multiplies rows: `DA`.
    Left,
    /// Multiplies columns: `AD`.
    Right,
}

/// `diag(d_1, ..., d_n)` together with the side it is applied on.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalScaling<T> {
    pub values: Vec<T>,
    pub side: Side,
}

impl<T: Scalar> DiagonalScaling<T> {
    pub fn identity(n: usize, side: Side) -> Self {
        Self {
            values: vec![T::one(); n],
            side,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.values.iter().all(T::is_one)
    }

    pub fn max_deviation_from_identity(&self) -> T {
        let one = T::one();
        max_abs(&self.values.iter().map(|v| v.clone() - one.clone()).collect::<Vec<_>>())
    }

    /// Identity up to `tolerance`; structural equality when the tolerance is zero.
    pub fn is_identity_within(&self, tolerance: &T) -> bool {
        if tolerance.is_zero() {
            self.is_identity()
        } else {
            self.max_deviation_from_identity() <= *tolerance
        }
    }
}

impl<T: Scalar> Serialize for DiagonalScaling<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let values: Vec<_> = self.values.iter().map(T::to_json).collect();
        let mut s = serializer.serialize_struct("DiagonalScaling", 2)?;
        s.serialize_field("side", &self.side)?;
        s.serialize_field("values", &values)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticityReport<T> {
    pub row_stochastic: bool,
    pub col_stochastic: bool,
    pub nonnegative: bool,
    pub max_row_deviation: T,
    pub max_col_deviation: T,
}

impl<T: Scalar> StochasticityReport<T> {
    pub fn doubly_stochastic(&self) -> bool {
        self.row_stochastic && self.col_stochastic
    }
}

impl<T: Scalar> Serialize for StochasticityReport<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("StochasticityReport", 5)?;
        s.serialize_field("row_stochastic", &self.row_stochastic)?;
        s.serialize_field("col_stochastic", &self.col_stochastic)?;
        s.serialize_field("nonnegative", &self.nonnegative)?;
        s.serialize_field("max_row_deviation", &self.max_row_deviation.to_json())?;
        s.serialize_field("max_col_deviation", &self.max_col_deviation.to_json())?;
        s.end()
    }
}
