//! Matrix scaling toolkit: the alternate row/column scaling algorithm over
//! exact rationals and floats, a family of matrices that become doubly
//! stochastic after one column scaling, the pullback construction, and
//! searches for one-step matrices.

pub mod engine;
pub mod error;
pub mod family;
pub mod format;
pub mod linalg;
pub mod matrix;
pub mod pullback;
pub mod scalar;
pub mod search;

pub use engine::{
    convergence_profile, scaling_count, sinkhorn_iterate, Direction, IterateOptions, ProfileEntry, ScalingCount,
    ScalingStep, ScalingTrace, Termination, DEFAULT_MAX_STEPS,
};
pub use error::{Error, Result};
pub use family::{
    family_determinant, verify_grid, verify_one_step, DeterminantCase, FamilyDeterminant, FamilyParams, OneStepReport,
};
pub use format::{parse_matrix, write_matrix, AnyMatrix};
pub use linalg::solve_exact;
pub use matrix::{DiagonalScaling, Matrix, Side, StochasticityReport};
pub use pullback::{pullback, pullback_chain_probe, ChainProbe, ChainStop, PullbackResult, Sign};
pub use scalar::{format_rational, parse_rational, rat, rat_int, Rational, Scalar, ScalarKind};
pub use search::{
    enumerate_row_stochastic, matches_shape3, search_one_step, Finding, Predicate, SearchMode, SearchReport, SearchSpec,
};
