mod common;

use common::*;
use helmholtz_ras::assembly::{BcVariant, CsrMatrixC, FieldC, FreeSpace};
use helmholtz_ras::oracle::*;
use helmholtz_ras::{Error, C64};

#[test]
fn identity_direct_solve_returns_load() {
    let space = FreeSpace::new([1, 1], [4, 3]);
    let n = space.len();
    let a = CsrMatrixC::identity(n);
    let values: Vec<C64> = (0..n).map(|i| C64::new(i as f64, -(i as f64) / 2.0)).collect();
    let f = FieldC::from_values(space, values.clone()).unwrap();
    let u = direct_global_solve(&a, &f, 100).unwrap();
    assert_eq!(u.values, values);
}

#[test]
fn direct_solve_respects_budget() {
    let space = FreeSpace::new([1, 1], [4, 3]);
    let a = CsrMatrixC::identity(space.len());
    let f = FieldC::zeros(space);
    assert!(matches!(
        direct_global_solve(&a, &f, 5),
        Err(Error::Capacity { needed: 12, budget: 5 })
    ));
}

#[test]
fn direct_solve_residual_is_small() {
    let (prob, _, _) = setup(&small_params(), [1, 1], 2, 0, BcVariant::PmlImpedance);
    let u = direct_global_solve(&prob.a, &prob.f, DEFAULT_ORACLE_BUDGET).unwrap();
    let a = prob.a.to_dense();
    let au = matvec(&a, &u.values);
    assert!(rel_diff(&au, &prob.f.values) <= 1e-12);
}

#[test]
fn dense_preconditioner_respects_budget() {
    let params = helmholtz_ras::grid::ProblemParams {
        k: 50.0,
        ..Default::default()
    };
    let (_, _, ras) = setup(&params, [2, 2], 2, 3, BcVariant::PmlImpedance);
    assert!(matches!(dense_preconditioner(&ras), Err(Error::Capacity { .. })));
}

#[test]
fn second_order_at_k1() {
    let report = convergence_study(1.0, 3).unwrap();
    assert_eq!(report.levels.len(), 4);
    let order = report.order.unwrap();
    assert!((order - 2.0).abs() <= 0.2, "order {order}");
    assert!(report.pass);
    for w in report.levels.windows(2) {
        let ratio = w[0].1 / w[1].1;
        assert!((3.4..=4.6).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn second_order_for_poisson() {
    let report = convergence_study(0.0, 3).unwrap();
    let order = report.order.unwrap();
    assert!((order - 2.0).abs() <= 0.2, "order {order}");
}

#[test]
fn no_refinement_reports_no_order() {
    let report = convergence_study(1.0, 0).unwrap();
    assert_eq!(report.levels.len(), 1);
    assert!(report.order.is_none());
    assert!(report.abs_error.is_finite() && report.abs_error > 0.0);
    assert!(!report.pass);
}

#[test]
fn convergence_study_rejects_large_k() {
    assert!(matches!(convergence_study(50.0, 1), Err(Error::Config { .. })));
}

#[test]
fn compare_reports_relative_error() {
    let u_ref = vec![C64::new(3.0, 0.0), C64::new(0.0, 4.0)];
    let u = vec![C64::new(3.0, 0.5), C64::new(0.0, 4.0)];
    let report = OracleReport::compare("pair", &u, &u_ref, 0.2).unwrap();
    assert!((report.reference_norm - 5.0).abs() < 1e-15);
    assert!((report.rel_error - 0.1).abs() < 1e-15);
    assert!(report.pass);
    assert!(OracleReport::compare("pair", &u[..1], &u_ref, 0.2).is_err());
}
