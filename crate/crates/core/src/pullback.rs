//! Pulling a row-stochastic matrix back to a column-stochastic one.
//!
//! For nonsingular `A` there is exactly one diagonal `Z` with `ZA` column
//! stochastic: its diagonal solves `Aᵀ z = 1`. When `A` is row stochastic
//! and `z > 0`, row scaling `B = ZA` gives back `A`, so `B` needs one more
//! scaling than `A` to become doubly stochastic.
//!
//! No attempt is made to repair a `z` with non-positive entries; the sign
//! pattern is reported instead.

use std::fmt;

use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::solve_exact;
use crate::matrix::{DiagonalScaling, Matrix, Side};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Positive,
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "-")]
    Negative,
}

impl Sign {
    pub fn of(v: &Rational) -> Self {
        if v.is_positive() {
            Sign::Positive
        } else if v.is_negative() {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Positive => "+",
            Sign::Zero => "0",
            Sign::Negative => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PullbackResult {
    /// `Left` means `B = ZA` (column-stochastic `B`); `Right` means
    /// `B = AZ` (row-stochastic `B`).
    pub side: Side,
    pub z: Vec<Rational>,
    pub b: Matrix<Rational>,
    pub all_positive: bool,
    pub sign_pattern: Vec<Sign>,
}

impl PullbackResult {
    pub fn diagonal(&self) -> DiagonalScaling<Rational> {
        DiagonalScaling {
            values: self.z.clone(),
            side: self.side,
        }
    }
}

impl Serialize for PullbackResult {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let z: Vec<_> = self.z.iter().map(Scalar::to_json).collect();
        let mut s = serializer.serialize_struct("PullbackResult", 5)?;
        s.serialize_field("side", &self.side)?;
        s.serialize_field("z", &z)?;
        s.serialize_field("b", &self.b)?;
        s.serialize_field("all_positive", &self.all_positive)?;
        s.serialize_field("sign_pattern", &self.sign_pattern)?;
        s.end()
    }
}

/// Finds `z` with `diag(z) A` column stochastic and returns `B = diag(z) A`.
pub fn pullback(a: &Matrix<Rational>) -> Result<PullbackResult> {
    pullback_on(a, Side::Left)
}

/// Mirror of [`pullback`]: `B = A diag(z)` row stochastic, i.e. `A z = 1`.
pub fn pullback_right(a: &Matrix<Rational>) -> Result<PullbackResult> {
    pullback_on(a, Side::Right)
}

fn pullback_on(a: &Matrix<Rational>, side: Side) -> Result<PullbackResult> {
    a.ensure_square()?;
    let ones = vec![Rational::one(); a.rows()];
    let z = match side {
        Side::Left => solve_exact(&a.transpose(), &ones)?,
        Side::Right => solve_exact(a, &ones)?,
    };
    let b = a.scaled(&DiagonalScaling {
        values: z.clone(),
        side,
    })?;

    let sums = match side {
        Side::Left => b.col_sums(),
        Side::Right => b.row_sums(),
    };
    if sums.iter().any(|s| !s.is_one()) {
        return Err(Error::InvariantViolation("pullback sums are not exactly one".into()));
    }

    let sign_pattern: Vec<Sign> = z.iter().map(Sign::of).collect();
    let all_positive = sign_pattern.iter().all(|s| *s == Sign::Positive) && b.is_positive();
    Ok(PullbackResult {
        side,
        z,
        b,
        all_positive,
        sign_pattern,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainStop {
    /// The current matrix is singular.
    Singular,
    /// The last link has a non-positive `z`.
    NonPositive,
    /// The last link has `z = 1`, so the chain cannot grow.
    FixedPoint,
    DepthReached,
}

impl fmt::Display for ChainStop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainStop::Singular => "singular",
            ChainStop::NonPositive => "non-positive",
            ChainStop::FixedPoint => "fixed-point",
            ChainStop::DepthReached => "depth-reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainProbe {
    pub links: Vec<PullbackResult>,
    pub stop: ChainStop,
}

/// Repeatedly pulls back, alternating sides: the first link is a left
/// pullback of `a`, the second a right pullback of its `B`, and so on.
/// Stops at singularity, a non-positive `z`, an identity `z`, or `depth`.
pub fn pullback_chain_probe(a: &Matrix<Rational>, depth: usize) -> Result<ChainProbe> {
    a.ensure_square()?;
    let mut links: Vec<PullbackResult> = Vec::new();
    let mut current = a.clone();
    let mut side = Side::Left;
    while links.len() < depth {
        let link = match pullback_on(&current, side) {
            Ok(r) => r,
            Err(Error::SingularMatrix) => {
                return Ok(ChainProbe {
                    links,
                    stop: ChainStop::Singular,
                })
            }
            Err(e) => return Err(e),
        };
        let stop = if !link.all_positive {
            Some(ChainStop::NonPositive)
        } else if link.z.iter().all(Rational::is_one) {
            Some(ChainStop::FixedPoint)
        } else {
            None
        };
        current = link.b.clone();
        links.push(link);
        if let Some(stop) = stop {
            return Ok(ChainProbe { links, stop });
        }
        side = match side {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        };
    }
    Ok(ChainProbe {
        links,
        stop: ChainStop::DepthReached,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{scaling_count, sinkhorn_iterate, IterateOptions, ScalingCount};
    use crate::family::FamilyParams;
    use crate::scalar::{rat, rat_int};

    fn int_matrix(rows: &[&[i64]]) -> Matrix<Rational> {
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| rat_int(v)).collect()).collect()).unwrap()
    }

    /// Columns of `[[2,1,1],[1,2,1],[1,1,3]]` normalized to sum one.
    fn planted_b0() -> Matrix<Rational> {
        let m = int_matrix(&[&[2, 1, 1], &[1, 2, 1], &[1, 1, 3]]);
        m.scaled(&m.col_scaling().unwrap()).unwrap()
    }

    #[test]
    fn identity_pulls_back_to_itself() {
        let id = Matrix::<Rational>::identity(3).unwrap();
        let r = pullback(&id).unwrap();
        assert_eq!(r.z, vec![rat_int(1); 3]);
        assert_eq!(r.b, id);
        // identity has zero entries
        assert!(!r.all_positive);
    }

    #[test]
    fn family_matrix_is_singular() {
        let a = FamilyParams::new(1, 1, 3, rat(1, 5), rat(3, 5)).unwrap().matrix();
        assert_eq!(pullback(&a).unwrap_err(), Error::SingularMatrix);
        let probe = pullback_chain_probe(&a, 5).unwrap();
        assert!(probe.links.is_empty());
        assert_eq!(probe.stop, ChainStop::Singular);
    }

    #[test]
    fn planted_round_trip() {
        let b0 = planted_b0();
        // B0 = [[1/2,1/4,1/5],[1/4,1/2,1/5],[1/4,1/4,3/5]]
        assert_eq!(b0[(2, 2)], rat(3, 5));
        let a0 = b0.scaled(&b0.row_scaling().unwrap()).unwrap();
        let r = pullback(&a0).unwrap();
        assert_eq!(r.z, b0.row_sums());
        assert_eq!(r.b, b0);
        assert!(r.all_positive);
        assert_eq!(r.sign_pattern, vec![Sign::Positive; 3]);
        assert_eq!(a0.scaled(&r.diagonal()).unwrap(), r.b);
    }

    #[test]
    fn uniqueness_spot_check() {
        let b0 = planted_b0();
        let a0 = b0.scaled(&b0.row_scaling().unwrap()).unwrap();
        let r = pullback(&a0).unwrap();
        for i in 0..3 {
            let mut z = r.z.clone();
            z[i] += rat(1, 7);
            let b = a0
                .scaled(&DiagonalScaling {
                    values: z,
                    side: Side::Left,
                })
                .unwrap();
            assert!(b.col_sums().iter().any(|s| !s.is_one()));
        }
    }

    #[test]
    fn pullback_adds_one_scaling_to_the_trace() {
        let b0 = planted_b0();
        let a0 = b0.scaled(&b0.row_scaling().unwrap()).unwrap();
        let b = pullback(&a0).unwrap().b;
        let opts = IterateOptions::with_max_steps(5);
        let ta = sinkhorn_iterate(&a0, &opts).unwrap();
        let tb = sinkhorn_iterate(&b, &opts).unwrap();
        // B's first (row) step lands on A; A's first step is the identity
        assert!(ta.steps[0].was_identity);
        assert!(!tb.steps[0].was_identity);
        assert_eq!(tb.replay().unwrap()[0], a0);
        assert_eq!(ta.steps[1..], tb.steps[1..]);
        assert_eq!(tb.non_identity_steps(), ta.non_identity_steps() + 1);
        assert_eq!(
            scaling_count(&a0, 5).unwrap(),
            ScalingCount::CapExceeded { max_steps: 5 }
        );
    }

    #[test]
    fn doubly_stochastic_is_a_fixed_point() {
        let s = int_matrix(&[&[2, 1, 1], &[1, 1, 2], &[1, 2, 1]]);
        let s = s.scaled(&s.col_scaling().unwrap()).unwrap();
        let probe = pullback_chain_probe(&s, 4).unwrap();
        assert_eq!(probe.links.len(), 1);
        assert_eq!(probe.stop, ChainStop::FixedPoint);
        assert_eq!(probe.links[0].b, s);
    }

    #[test]
    fn right_pullback_mirrors_left() {
        let b0 = planted_b0();
        let a0 = b0.scaled(&b0.row_scaling().unwrap()).unwrap();
        let left = pullback(&a0).unwrap();
        let right = pullback_right(&a0.transpose()).unwrap();
        assert_eq!(left.z, right.z);
        assert_eq!(left.b, right.b.transpose());
    }

    #[test]
    fn rejects_non_square() {
        let a = Matrix::<Rational>::from_fn(2, 3, |_, _| rat_int(1)).unwrap();
        assert!(matches!(pullback(&a), Err(Error::NotSquare { .. })));
    }
}
