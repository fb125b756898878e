use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use sinklab_core::family::{shape3_formula, shape3_matrix};
use sinklab_core::*;

/// Laplace expansion along the first row.
fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = Rational::zero();
    for j in 0..n {
        let minor: Vec<Vec<Rational>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != j)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][j] * cofactor_det(&minor);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-9i64..=9, 1i64..=9).prop_map(|(p, q)| rat(p, q))
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=9).prop_map(|(p, q)| rat(p, q))
}

fn rational_matrix(max_n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(small_rational(), n * n).prop_map(move |e| Matrix::new(n, n, e).unwrap())
    })
}

fn positive_matrix(min_n: usize, max_n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (min_n..=max_n).prop_flat_map(|n| {
        prop::collection::vec(positive_rational(), n * n).prop_map(move |e| Matrix::new(n, n, e).unwrap())
    })
}

fn positive_float_matrix(max_n: usize) -> impl Strategy<Value = Matrix<f64>> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(0.01f64..100.0, n * n).prop_map(move |e| Matrix::new(n, n, e).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn determinant_matches_cofactor_expansion(m in rational_matrix(4)) {
        let expected = cofactor_det(&m.to_rows());
        prop_assert_eq!(m.determinant().unwrap(), expected.clone());
        let f = m.to_f64().determinant().unwrap();
        let e = expected.to_f64();
        if expected.is_zero() {
            prop_assert!(f.abs() <= 1e-9, "float det {} for singular matrix", f);
        } else {
            prop_assert!(((f - e) / e).abs() <= 1e-9, "float det {} vs {}", f, e);
        }
    }

    #[test]
    fn shape3_determinant_identity(x in positive_rational(), y in positive_rational(),
                                   z in positive_rational(), w in positive_rational()) {
        let a = shape3_matrix(&x, &y, &z, &w);
        prop_assert_eq!(a.determinant().unwrap(), shape3_formula(&x, &y, &z, &w));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn row_and_column_scaling_are_exact(a in positive_matrix(1, 5)) {
        let r = a.scaled(&a.row_scaling().unwrap()).unwrap();
        prop_assert!(r.row_sums().iter().all(Rational::is_one));
        prop_assert!(r.is_positive());
        let c = a.scaled(&a.col_scaling().unwrap()).unwrap();
        prop_assert!(c.col_sums().iter().all(Rational::is_one));
        prop_assert!(c.is_positive());
    }

    #[test]
    fn float_scaling_is_accurate(a in positive_float_matrix(6)) {
        let n = a.rows() as f64;
        let bound = 2.0 * f64::EPSILON * n;
        let r = a.scaled(&a.row_scaling().unwrap()).unwrap();
        prop_assert!(r.row_sums().iter().all(|s| (s - 1.0).abs() <= bound));
        let c = a.scaled(&a.col_scaling().unwrap()).unwrap();
        prop_assert!(c.col_sums().iter().all(|s| (s - 1.0).abs() <= bound));
    }

    #[test]
    fn row_scaling_is_identity_iff_row_stochastic(a in positive_matrix(1, 4), normalize in any::<bool>()) {
        let a = if normalize { a.scaled(&a.row_scaling().unwrap()).unwrap() } else { a };
        let identity = a.row_scaling().unwrap().is_identity();
        let stochastic = a.stochasticity(&Rational::zero()).unwrap().row_stochastic;
        prop_assert_eq!(identity, stochastic);
        prop_assert_eq!(identity, a.scaled(&a.row_scaling().unwrap()).unwrap() == a);
    }

    #[test]
    fn transposition_duality(a in positive_matrix(1, 5)) {
        let t = a.transpose();
        prop_assert_eq!(a.col_sums(), t.row_sums());
        let y = a.col_scaling().unwrap();
        let x = t.row_scaling().unwrap();
        prop_assert_eq!(&y.values, &x.values);
        prop_assert_eq!(a.scaled(&y).unwrap().transpose(), t.scaled(&x).unwrap());
    }

    #[test]
    fn engine_trace_invariants(a in positive_matrix(2, 3), normalize in any::<bool>()) {
        let a = if normalize { a.scaled(&a.row_scaling().unwrap()).unwrap() } else { a };
        let opts = IterateOptions::with_max_steps(6);
        let trace = sinkhorn_iterate(&a, &opts).unwrap();
        prop_assert_eq!(&trace, &sinkhorn_iterate(&a, &opts).unwrap());
        let replayed = trace.replay().unwrap();
        prop_assert_eq!(replayed.last().unwrap_or(&trace.initial), &trace.final_matrix);
        for w in trace.steps.windows(2) {
            prop_assert_ne!(w[0].direction, w[1].direction);
        }
        for s in &trace.steps {
            prop_assert_eq!(s.was_identity, s.diagonal.is_identity());
        }
        match trace.termination {
            Termination::ExactDoublyStochastic => {
                prop_assert_eq!(trace.scaling_count, Some(trace.non_identity_steps()));
                prop_assert!(trace.final_matrix.is_doubly_stochastic(&Rational::zero()).unwrap());
                prop_assert!(trace.final_matrix.row_scaling().unwrap().is_identity());
                prop_assert!(trace.final_matrix.col_scaling().unwrap().is_identity());
            }
            Termination::IterationCapReached => prop_assert_eq!(trace.scaling_count, None),
            Termination::ConvergedWithinTolerance => prop_assert!(false, "exact run converged by tolerance"),
        }
        let count = scaling_count(&a, 6).unwrap();
        prop_assert_eq!(count.finite(), trace.scaling_count);
    }

    #[test]
    fn pullback_identities(a in positive_matrix(2, 4)) {
        match pullback(&a) {
            Ok(r) => {
                prop_assert!(r.b.col_sums().iter().all(Rational::is_one));
                prop_assert_eq!(&a.scaled(&r.diagonal()).unwrap(), &r.b);
                let z_positive = r.z.iter().all(Rational::is_positive);
                prop_assert_eq!(r.all_positive, z_positive);
                prop_assert_eq!(r.all_positive, r.b.is_positive());
                prop_assert_eq!(r.sign_pattern.iter().filter(|s| **s == Sign::Positive).count(),
                                r.z.iter().filter(|v| v.is_positive()).count());
            }
            Err(Error::SingularMatrix) => prop_assert!(a.determinant().unwrap().is_zero()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }
}

/// Exact step budget per dimension; entry bit sizes grow by roughly a
/// factor `n - 1` per step.
fn exact_step_budget(n: usize) -> usize {
    match n {
        2 => 50,
        3 => 10,
        4 => 6,
        5 => 4,
        _ => 3,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn float_and_exact_deviations_agree(a in positive_matrix(2, 8)) {
        let steps = exact_step_budget(a.rows());
        let exact = sinkhorn_iterate(&a, &IterateOptions::with_max_steps(steps)).unwrap();
        let float = sinkhorn_iterate(
            &a.to_f64(),
            &IterateOptions { max_steps: steps, tolerance: 0.0 },
        )
        .unwrap();
        let pe = exact.profile();
        let pf = float.profile();
        // a float run may stop earlier only if it hit exact double stochasticity
        for (e, f) in pe.iter().zip(&pf) {
            prop_assert!((e.max_row_deviation.to_f64() - f.max_row_deviation).abs() <= 1e-9);
            prop_assert!((e.max_col_deviation.to_f64() - f.max_col_deviation).abs() <= 1e-9);
        }
    }
}

#[test]
fn identity_determinants() {
    for n in 1..=8 {
        assert!(Matrix::<Rational>::identity(n).unwrap().determinant().unwrap().is_one());
    }
}

#[test]
fn cofactor_oracle_sanity() {
    let m = vec![
        vec![rat(2, 1), rat(0, 1), rat(1, 1)],
        vec![rat(1, 1), rat(3, 1), rat(2, 1)],
        vec![rat(1, 1), rat(1, 1), rat(1, 1)],
    ];
    // 2(3-2) - 0 + 1(1-3)
    assert_eq!(cofactor_det(&m), rat(0, 1));
}
