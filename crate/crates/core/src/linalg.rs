//! Determinants and exact linear solves.
//!
//! Rational matrices are first cleared of denominators row by row, then
//! reduced with Bareiss' fraction-free elimination over the integers, so
//! every intermediate value is an exact minor of the scaled matrix. Float
//! matrices use Gaussian elimination with partial pivoting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Rational;

impl Matrix<Rational> {
    /// Exact determinant.
    pub fn determinant(&self) -> Result<Rational> {
        self.ensure_square()?;
        let (mut m, scale) = integer_rows(self.row_iter().map(<[Rational]>::to_vec));
        let n = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
                return Ok(Rational::zero());
            };
            if p != k {
                m.swap(p, k);
                sign = -sign;
            }
            bareiss_step(&mut m, k, &prev, n);
            prev = m[k][k].clone();
        }
        Ok(Rational::new(sign * prev, scale))
    }
}

impl Matrix<f64> {
    /// Determinant by LU factorization with partial pivoting.
    pub fn determinant(&self) -> Result<f64> {
        self.ensure_square()?;
        let n = self.rows();
        let mut m = self.to_rows();
        let mut det = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))
                .expect("non-empty range");
            if m[p][k] == 0.0 {
                return Ok(0.0);
            }
            if p != k {
                m.swap(p, k);
                det = -det;
            }
            let pivot = m[k][k];
            det *= pivot;
            let (top, below) = m.split_at_mut(k + 1);
            let pivot_row = &top[k][k + 1..];
            for row in below {
                let factor = row[k] / pivot;
                if factor != 0.0 {
                    for (v, p) in row[k + 1..].iter_mut().zip(pivot_row) {
                        *v -= factor * p;
                    }
                }
            }
        }
        Ok(det)
    }
}

/// Solves `A x = b` exactly.
///
/// The augmented system is scaled to integers and reduced by fraction-free
/// elimination with full pivoting; back substitution runs over the rationals.
pub fn solve_exact(a: &Matrix<Rational>, b: &[Rational]) -> Result<Vec<Rational>> {
    a.ensure_square()?;
    let n = a.rows();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    let augmented = a.row_iter().zip(b).map(|(row, rhs)| {
        let mut r = row.to_vec();
        r.push(rhs.clone());
        r
    });
    let (mut m, _) = integer_rows(augmented);
    // perm[c] is the original unknown sitting in column c
    let mut perm: Vec<usize> = (0..n).collect();
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n)
            .flat_map(|i| (k..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !m[i][j].is_zero())
            .min_by_key(|&(i, j)| m[i][j].bits());
        let Some((pi, pj)) = pivot else {
            return Err(Error::SingularMatrix);
        };
        m.swap(pi, k);
        if pj != k {
            for row in m.iter_mut() {
                row.swap(pj, k);
            }
            perm.swap(pj, k);
        }
        bareiss_step(&mut m, k, &prev, n + 1);
        prev = m[k][k].clone();
    }

    let mut y = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = Rational::from_integer(m[k][n].clone());
        for j in k + 1..n {
            acc -= Rational::from_integer(m[k][j].clone()) * &y[j];
        }
        y[k] = acc / Rational::from_integer(m[k][k].clone());
    }
    let mut x = vec![Rational::zero(); n];
    for (c, &orig) in perm.iter().enumerate() {
        x[orig] = y[c].clone();
    }
    Ok(x)
}

/// Multiplies each row by the lcm of its denominators. Returns the integer
/// rows and the product of the multipliers.
fn integer_rows(rows: impl Iterator<Item = Vec<Rational>>) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let m = rows
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            let ints = row.iter().map(|v| v.numer() * (&l / v.denom())).collect();
            scale *= &l;
            ints
        })
        .collect();
    (m, scale)
}

/// One Bareiss update below pivot `(k, k)` over columns `k+1..width`.
/// Divisions by the previous pivot are exact.
fn bareiss_step(m: &mut [Vec<BigInt>], k: usize, prev: &BigInt, width: usize) {
    let (top, bottom) = m.split_at_mut(k + 1);
    let pivot_row = &top[k];
    for row in bottom.iter_mut() {
        let lead = std::mem::take(&mut row[k]);
        for j in k + 1..width {
            let v = &pivot_row[k] * &row[j] - &lead * &pivot_row[j];
            debug_assert!((&v % prev).is_zero());
            row[j] = v / prev;
        }
    }
}
