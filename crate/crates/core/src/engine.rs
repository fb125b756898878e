//! The alternate scaling algorithm.
//!
//! Starting from a positive square matrix, row scaling and column scaling
//! are applied in turn, beginning with a row scaling. A step whose diagonal
//! is the identity is recorded but not counted, so a row-stochastic matrix
//! that becomes doubly stochastic after one column scaling has count 1.
//!
//! Exact matrices stop only when they are exactly doubly stochastic or the
//! step cap is reached. Float matrices stop when both deviations are within
//! the tolerance.

use std::fmt::{self, Write as _};

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};
use crate::matrix::{check_tolerance, DiagonalScaling, Matrix, Side};
use crate::scalar::{Rational, Scalar};

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Row,
    Column,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Row => Direction::Column,
            Direction::Column => Direction::Row,
        }
    }

    pub fn side(self) -> Side {
        match self {
            Direction::Row => Side::Left,
            Direction::Column => Side::Right,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Row => "row",
            Direction::Column => "column",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ExactDoublyStochastic,
    ConvergedWithinTolerance,
    IterationCapReached,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Termination::ExactDoublyStochastic => "exact-doubly-stochastic",
            Termination::ConvergedWithinTolerance => "converged-within-tolerance",
            Termination::IterationCapReached => "iteration-cap-reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingStep<T> {
    pub direction: Direction,
    pub diagonal: DiagonalScaling<T>,
    pub was_identity: bool,
    /// Deviations of the matrix after this step.
    pub max_row_deviation: T,
    pub max_col_deviation: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTrace<T: Scalar> {
    pub initial: Matrix<T>,
    pub initial_row_deviation: T,
    pub initial_col_deviation: T,
    pub steps: Vec<ScalingStep<T>>,
    pub final_matrix: Matrix<T>,
    pub termination: Termination,
    /// Non-identity steps taken; `None` when the cap was reached.
    pub scaling_count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateOptions<T> {
    pub max_steps: usize,
    pub tolerance: T,
}

impl<T: Scalar> Default for IterateOptions<T> {
    fn default() -> Self {
        Self {
            max_steps: DEFAULT_MAX_STEPS,
            tolerance: T::default_tolerance(),
        }
    }
}

impl<T: Scalar> IterateOptions<T> {
    pub fn with_max_steps(max_steps: usize) -> Self {
        Self {
            max_steps,
            ..Self::default()
        }
    }
}

/// Runs the alternate scaling algorithm on a positive square matrix.
pub fn sinkhorn_iterate<T: Scalar>(a: &Matrix<T>, opts: &IterateOptions<T>) -> Result<ScalingTrace<T>> {
    a.ensure_square()?;
    if let Some((row, col)) = a.first_non_positive() {
        return Err(Error::NonPositiveMatrix { row, col });
    }
    if opts.max_steps == 0 {
        return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
    }
    check_tolerance(&opts.tolerance)?;

    let done = if T::KIND.is_exact() {
        Termination::ExactDoublyStochastic
    } else {
        Termination::ConvergedWithinTolerance
    };

    let initial_report = a.stochasticity(&opts.tolerance)?;
    let mut current = a.clone();
    let mut steps = Vec::new();
    let mut count = 0;
    let mut termination = if initial_report.doubly_stochastic() {
        Some(done)
    } else {
        None
    };
    let mut direction = Direction::Row;

    while termination.is_none() && steps.len() < opts.max_steps {
        let diagonal = match direction {
            Direction::Row => current.row_scaling()?,
            Direction::Column => current.col_scaling()?,
        };
        let was_identity = diagonal.is_identity_within(&opts.tolerance);
        if !was_identity {
            current = current.scaled(&diagonal)?;
            count += 1;
        }
        let report = current.stochasticity(&opts.tolerance)?;
        steps.push(ScalingStep {
            direction,
            diagonal,
            was_identity,
            max_row_deviation: report.max_row_deviation.clone(),
            max_col_deviation: report.max_col_deviation.clone(),
        });
        if report.doubly_stochastic() {
            termination = Some(done);
        }
        direction = direction.flip();
    }

    let termination = termination.unwrap_or(Termination::IterationCapReached);
    Ok(ScalingTrace {
        initial: a.clone(),
        initial_row_deviation: initial_report.max_row_deviation,
        initial_col_deviation: initial_report.max_col_deviation,
        steps,
        final_matrix: current,
        scaling_count: (termination != Termination::IterationCapReached).then_some(count),
        termination,
    })
}

impl<T: Scalar> ScalingTrace<T> {
    /// Matrices after each step, rebuilt from the initial matrix and the
    /// recorded diagonals.
    pub fn replay(&self) -> Result<Vec<Matrix<T>>> {
        let mut current = self.initial.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for step in &self.steps {
            if !step.was_identity {
                current = current.scaled(&step.diagonal)?;
            }
            out.push(current.clone());
        }
        Ok(out)
    }

    pub fn non_identity_steps(&self) -> usize {
        self.steps.iter().filter(|s| !s.was_identity).count()
    }

    /// `(step, max row deviation, max column deviation)`, starting with
    /// step 0 for the input matrix.
    pub fn profile(&self) -> Vec<ProfileEntry<T>> {
        std::iter::once(ProfileEntry {
            step: 0,
            max_row_deviation: self.initial_row_deviation.clone(),
            max_col_deviation: self.initial_col_deviation.clone(),
        })
        .chain(self.steps.iter().enumerate().map(|(i, s)| ProfileEntry {
            step: i + 1,
            max_row_deviation: s.max_row_deviation.clone(),
            max_col_deviation: s.max_col_deviation.clone(),
        }))
        .collect()
    }

    /// Line-oriented report. With `intermediates`, every matrix after a
    /// step is written in the matrix text format.
    pub fn to_report(&self, intermediates: bool) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kind {}", T::KIND);
        let _ = writeln!(out, "dims {} {}", self.initial.rows(), self.initial.cols());
        let _ = writeln!(
            out,
            "step 0 initial row_dev {} col_dev {}",
            self.initial_row_deviation.to_text(),
            self.initial_col_deviation.to_text()
        );
        let matrices = if intermediates { self.replay().ok() } else { None };
        for (i, step) in self.steps.iter().enumerate() {
            let diag: Vec<_> = step.diagonal.values.iter().map(T::to_text).collect();
            let _ = writeln!(
                out,
                "step {} {} {} diag {} row_dev {} col_dev {}",
                i + 1,
                step.direction,
                if step.was_identity { "identity" } else { "scaled" },
                diag.join(" "),
                step.max_row_deviation.to_text(),
                step.max_col_deviation.to_text()
            );
            if let Some(ms) = &matrices {
                out.push_str(&crate::format::write_matrix(&ms[i]));
            }
        }
        let _ = writeln!(out, "terminated {}", self.termination);
        match self.scaling_count {
            Some(c) => {
                let _ = writeln!(out, "scaling_count {c}");
            }
            None => out.push_str("scaling_count undefined\n"),
        }
        out.push_str("final\n");
        out.push_str(&crate::format::write_matrix(&self.final_matrix));
        out
    }
}

impl<T: Scalar> Serialize for ScalingTrace<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let steps: Vec<_> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "direction": s.direction,
                    "was_identity": s.was_identity,
                    "diagonal": s.diagonal.values.iter().map(T::to_json).collect::<Vec<_>>(),
                    "max_row_deviation": s.max_row_deviation.to_json(),
                    "max_col_deviation": s.max_col_deviation.to_json(),
                })
            })
            .collect();
        let mut s = serializer.serialize_struct("ScalingTrace", 5)?;
        s.serialize_field("initial", &self.initial)?;
        s.serialize_field("steps", &steps)?;
        s.serialize_field("final", &self.final_matrix)?;
        s.serialize_field("terminated", &self.termination)?;
        s.serialize_field("scaling_count", &self.scaling_count)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileEntry<T> {
    pub step: usize,
    pub max_row_deviation: T,
    pub max_col_deviation: T,
}

/// Deviation from stochasticity after every step of a float run.
pub fn convergence_profile(a: &Matrix<f64>, opts: &IterateOptions<f64>) -> Result<Vec<ProfileEntry<f64>>> {
    Ok(sinkhorn_iterate(a, opts)?.profile())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScalingCount {
    Finite(usize),
    /// Not exactly doubly stochastic within the given number of steps.
    CapExceeded {
        max_steps: usize,
    },
}

impl ScalingCount {
    pub fn finite(self) -> Option<usize> {
        match self {
            ScalingCount::Finite(c) => Some(c),
            ScalingCount::CapExceeded { .. } => None,
        }
    }
}

impl fmt::Display for ScalingCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingCount::Finite(c) => write!(f, "{c}"),
            ScalingCount::CapExceeded { max_steps } => {
                write!(f, "does not terminate within {max_steps} steps")
            }
        }
    }
}

/// Number of non-identity scalings until the matrix is exactly doubly
/// stochastic, looking at most `max_steps` steps ahead.
///
/// A count of one is always decided within two steps, so a small cap is
/// enough to test for one-step matrices.
pub fn scaling_count(a: &Matrix<Rational>, max_steps: usize) -> Result<ScalingCount> {
    let trace = sinkhorn_iterate(a, &IterateOptions::with_max_steps(max_steps))?;
    Ok(match trace.scaling_count {
        Some(c) => ScalingCount::Finite(c),
        None => ScalingCount::CapExceeded { max_steps },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn example3() -> Matrix<Rational> {
        Matrix::from_rows(vec![
            vec![rat(1, 5), rat(1, 5), rat(3, 5)],
            vec![rat(2, 5), rat(1, 5), rat(2, 5)],
            vec![rat(3, 5), rat(1, 5), rat(1, 5)],
        ])
        .unwrap()
    }

    #[test]
    fn example3_needs_one_column_scaling() {
        let trace = sinkhorn_iterate(&example3(), &IterateOptions::default()).unwrap();
        assert_eq!(trace.termination, Termination::ExactDoublyStochastic);
        assert_eq!(trace.scaling_count, Some(1));
        assert_eq!(trace.steps.len(), 2);
        assert!(trace.steps[0].was_identity);
        assert_eq!(trace.steps[0].direction, Direction::Row);
        assert_eq!(trace.steps[1].direction, Direction::Column);
        let expected = Matrix::from_rows(vec![
            vec![rat(1, 6), rat(1, 3), rat(3, 6)],
            vec![rat(2, 6), rat(1, 3), rat(2, 6)],
            vec![rat(3, 6), rat(1, 3), rat(1, 6)],
        ])
        .unwrap();
        assert_eq!(trace.final_matrix, expected);
        assert_eq!(trace.replay().unwrap().last().unwrap(), &expected);
        assert_eq!(scaling_count(&example3(), 10).unwrap(), ScalingCount::Finite(1));
    }

    #[test]
    fn doubly_stochastic_input_takes_no_steps() {
        let id = Matrix::from_rows(vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 2), rat(1, 2)]]).unwrap();
        let trace = sinkhorn_iterate(&id, &IterateOptions::default()).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(trace.scaling_count, Some(0));
        assert_eq!(trace.final_matrix, id);
        let profile = convergence_profile(&id.to_f64(), &IterateOptions::default()).unwrap();
        assert_eq!(profile.len(), 1);
        assert_eq!(profile[0].max_row_deviation, 0.0);
        assert_eq!(profile[0].max_col_deviation, 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let z = Matrix::from_rows(vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 1), rat(1, 1)]]).unwrap();
        assert_eq!(
            sinkhorn_iterate(&z, &IterateOptions::default()).unwrap_err(),
            Error::NonPositiveMatrix { row: 0, col: 1 }
        );
        let opts = IterateOptions {
            max_steps: 5,
            tolerance: rat(1, 100),
        };
        assert_eq!(
            sinkhorn_iterate(&example3(), &opts).unwrap_err(),
            Error::NonzeroToleranceInExactMode
        );
        assert!(sinkhorn_iterate(&example3(), &IterateOptions::with_max_steps(0)).is_err());
    }

    #[test]
    fn generic_exact_matrix_hits_cap() {
        let a = Matrix::from_rows(vec![vec![rat(1, 1), rat(2, 1)], vec![rat(3, 1), rat(4, 1)]]).unwrap();
        let trace = sinkhorn_iterate(&a, &IterateOptions::with_max_steps(6)).unwrap();
        assert_eq!(trace.termination, Termination::IterationCapReached);
        assert_eq!(trace.scaling_count, None);
        assert_eq!(trace.steps.len(), 6);
        assert_eq!(
            scaling_count(&a, 6).unwrap(),
            ScalingCount::CapExceeded { max_steps: 6 }
        );
        // directions strictly alternate
        for w in trace.steps.windows(2) {
            assert_ne!(w[0].direction, w[1].direction);
        }
    }

    #[test]
    fn example3_float_profile() {
        let profile = convergence_profile(&example3().to_f64(), &IterateOptions::default()).unwrap();
        // step 1 is the identity row scaling, step 2 the column scaling
        assert_eq!(profile.len(), 3);
        assert!((profile[0].max_col_deviation - 0.4).abs() < 1e-15);
        assert!(profile[2].max_row_deviation <= 1e-15);
        assert!(profile[2].max_col_deviation <= 1e-15);
    }

    #[test]
    fn report_lists_every_step() {
        let trace = sinkhorn_iterate(&example3(), &IterateOptions::default()).unwrap();
        let text = trace.to_report(true);
        assert!(text.contains("step 1 row identity diag 1 1 1 row_dev 0 col_dev 2/5\n"));
        assert!(text.contains("step 2 column scaled diag 5/6 5/3 5/6 row_dev 0 col_dev 0\n"));
        assert!(text.contains("terminated exact-doubly-stochastic\nscaling_count 1\n"));
    }
}
