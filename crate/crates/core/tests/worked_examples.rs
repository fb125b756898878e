use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sinklab_core::*;

fn q(rows: &[&[(i64, i64)]]) -> Matrix<Rational> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&(p, d)| rat(p, d)).collect())
            .collect(),
    )
    .unwrap()
}

fn seven_by_seven() -> Matrix<Rational> {
    let top: &[(i64, i64)] = &[(1, 4), (1, 4), (1, 12), (1, 12), (1, 12), (1, 8), (1, 8)];
    let mid: &[(i64, i64)] = &[(3, 16), (3, 16), (1, 12), (1, 12), (1, 12), (3, 16), (3, 16)];
    let bot: &[(i64, i64)] = &[(1, 8), (1, 8), (1, 12), (1, 12), (1, 12), (1, 4), (1, 4)];
    q(&[top, top, top, mid, bot, bot, bot])
}

fn seven_by_seven_scaled() -> Matrix<Rational> {
    let top: &[(i64, i64)] = &[(4, 21), (4, 21), (1, 7), (1, 7), (1, 7), (2, 21), (2, 21)];
    let mid: &[(i64, i64)] = &[(1, 7); 7];
    let bot: &[(i64, i64)] = &[(2, 21), (2, 21), (1, 7), (1, 7), (1, 7), (4, 21), (4, 21)];
    q(&[top, top, top, mid, bot, bot, bot])
}

#[test]
fn seven_by_seven_family_member() {
    let p = FamilyParams::new(2, 3, 7, rat(1, 4), rat(1, 8)).unwrap();
    let a = p.matrix();
    assert_eq!(a, seven_by_seven());

    let y = a.col_scaling().unwrap();
    let s = |p, q| rat(p, q);
    assert_eq!(
        y.values,
        vec![s(16, 21), s(16, 21), s(12, 7), s(12, 7), s(12, 7), s(16, 21), s(16, 21)]
    );
    assert_eq!(a.scaled(&y).unwrap(), seven_by_seven_scaled());

    let trace = sinkhorn_iterate(&a, &IterateOptions::default()).unwrap();
    assert_eq!(trace.scaling_count, Some(1));
    assert_eq!(trace.final_matrix, seven_by_seven_scaled());

    let report = verify_one_step(&p).unwrap();
    assert!(report.all_pass());
    let allowed = [rat(4, 21), rat(1, 7), rat(2, 21)];
    assert!(report.scaled.entries().iter().all(|v| allowed.contains(v)));

    let det = family_determinant(&p).unwrap();
    assert_eq!(det.case, DeterminantCase::DuplicateColumns);
    assert!(det.determinant.is_zero());
}

#[test]
fn doubly_stochastic_input_has_count_zero() {
    let s = seven_by_seven_scaled();
    let trace = sinkhorn_iterate(&s, &IterateOptions::default()).unwrap();
    assert_eq!(trace.scaling_count, Some(0));
    assert_eq!(trace.final_matrix, s);
    assert_eq!(scaling_count(&s, 10).unwrap(), ScalingCount::Finite(0));
}

#[test]
fn family_matrices_are_singular_for_pullback() {
    for p in family::parameter_grid(2, 7, 4).iter().take(40) {
        assert_eq!(pullback(&p.matrix()).unwrap_err(), Error::SingularMatrix);
    }
}

#[test]
fn seeded_float_runs_converge() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..20 {
        let entries = (0..25).map(|_| rng.random_range(0.01..1.0)).collect();
        let a = Matrix::new(5, 5, entries).unwrap();
        let opts = IterateOptions {
            max_steps: DEFAULT_MAX_STEPS,
            tolerance: 1e-10,
        };
        let profile = convergence_profile(&a, &opts).unwrap();
        let last = profile.last().unwrap();
        assert!(last.max_row_deviation <= 1e-10 && last.max_col_deviation <= 1e-10);
        assert!(profile.windows(2).all(|w| w[1].step == w[0].step + 1));
    }
}

#[test]
fn grid_of_small_family_parameters() {
    let grid = family::parameter_grid(3, 9, 6);
    assert!(grid.len() > 100);
    let outcomes = verify_grid(&grid).unwrap();
    for o in &outcomes {
        assert!(o.passed(), "{:?}", o.params);
    }
    // order is preserved
    for (o, p) in outcomes.iter().zip(&grid) {
        assert_eq!(&o.params, p);
    }
}

#[test]
fn planted_pullback_round_trip_4x4() {
    let m = q(&[
        &[(3, 1), (1, 1), (1, 1), (2, 1)],
        &[(1, 1), (4, 1), (1, 1), (1, 1)],
        &[(2, 1), (1, 1), (5, 1), (1, 1)],
        &[(1, 1), (2, 1), (1, 1), (6, 1)],
    ]);
    assert!(!m.determinant().unwrap().is_zero());
    let b0 = m.scaled(&m.col_scaling().unwrap()).unwrap();
    let a0 = b0.scaled(&b0.row_scaling().unwrap()).unwrap();
    let r = pullback(&a0).unwrap();
    assert_eq!(r.b, b0);
    assert_eq!(r.z, b0.row_sums());
    assert!(r.all_positive);
    let probe = pullback_chain_probe(&a0, 3).unwrap();
    assert!(!probe.links.is_empty());
    assert_eq!(probe.links[0].b, b0);
}
