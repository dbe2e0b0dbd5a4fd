mod common;

use common::*;
use helmholtz_ras::assembly::{BcVariant, FieldC};
use helmholtz_ras::grid::{decompose, GlobalGrid, ProblemParams};
use helmholtz_ras::linalg::GmresConfig;
use helmholtz_ras::oracle::{dense_preconditioner, direct_global_solve, DEFAULT_ORACLE_BUDGET};
use helmholtz_ras::schwarz::*;
use helmholtz_ras::{Error, C64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Σ_j R̃_jᵀ A_j⁻¹ R_j from explicit dense pieces.
fn brute_force_preconditioner(ras: &RasOperator) -> Dense {
    let n = ras.len();
    let mut b = vec![vec![zero(); n]; n];
    for (j, local) in ras.locals.iter().enumerate() {
        let ainv = inverse(&ras.local_matrix(j).to_dense());
        let map: Vec<Option<usize>> = (0..local.space.len())
            .map(|li| {
                let (ix, iy) = local.space.node(li);
                ras.global.index(ix, iy)
            })
            .collect();
        for (l1, g1) in map.iter().enumerate() {
            let Some(g1) = g1 else { continue };
            let (ix, iy) = local.space.node(l1);
            let chi = ras.pou.weight(j, ix, iy);
            if chi == 0.0 {
                continue;
            }
            for (l2, g2) in map.iter().enumerate() {
                if let Some(g2) = g2 {
                    b[*g1][*g2] += ainv[l1][l2] * chi;
                }
            }
        }
    }
    b
}

#[test]
fn preconditioner_matches_dense_construction() {
    for bc in [
        BcVariant::PmlImpedance,
        BcVariant::PmlDirichlet,
        BcVariant::ImpedanceOnly,
    ] {
        let pml = if bc == BcVariant::ImpedanceOnly { 0 } else { 3 };
        let (prob, _, ras) = setup(&small_params(), [2, 2], 2, pml, bc);
        assert!(prob.n_free() <= 2000, "{}", prob.n_free());
        let brute = brute_force_preconditioner(&ras);
        let applied = dense_preconditioner(&ras).unwrap();
        assert!(dense_rel_diff(&applied, &brute) < 1e-12, "{bc:?}");
    }
}

#[test]
fn single_subdomain_is_exact_inverse() {
    let (prob, _, ras) = setup(&small_params(), [1, 1], 2, 0, BcVariant::PmlImpedance);
    let r = random_vec(prob.n_free(), 1);
    let mut z = vec![zero(); r.len()];
    ras.apply(&r, &mut z, Restriction::Full).unwrap();
    let mut az = vec![zero(); r.len()];
    prob.a.matvec_into(&z, &mut az).unwrap();
    assert!(rel_diff(&az, &r) < 1e-12);

    let u0 = zeros(&prob.f);
    let (_, log) = richardson_solve(&prob.a, &ras, &prob.f, &u0, &RichardsonOptions::default()).unwrap();
    assert_eq!(log.iterations(), 1);
    assert_eq!(log.status, SolveStatus::Converged);
    let (_, log) = gmres_solve(&prob.a, &ras, &prob.f, &u0, &GmresConfig::default()).unwrap();
    assert_eq!(log.iterations(), 1);
    assert_eq!(log.status, SolveStatus::Converged);
}

#[test]
fn preconditioner_is_linear() {
    let (prob, _, ras) = setup(&small_params(), [3, 2], 2, 2, BcVariant::PmlImpedance);
    let n = prob.n_free();
    let (r1, r2) = (random_vec(n, 2), random_vec(n, 3));
    let (alpha, beta) = (C64::new(0.3, -1.2), C64::new(-2.0, 0.7));
    let combo: Vec<C64> = r1.iter().zip(&r2).map(|(a, b)| alpha * a + beta * b).collect();
    let mut z1 = vec![zero(); n];
    let mut z2 = z1.clone();
    let mut zc = z1.clone();
    ras.apply(&r1, &mut z1, Restriction::Full).unwrap();
    ras.apply(&r2, &mut z2, Restriction::Full).unwrap();
    ras.apply(&combo, &mut zc, Restriction::Full).unwrap();
    let expected: Vec<C64> = z1.iter().zip(&z2).map(|(a, b)| alpha * a + beta * b).collect();
    assert!(rel_diff(&zc, &expected) < 1e-12);
    let mut z0 = vec![C64::new(1.0, 1.0); n];
    ras.apply(&vec![zero(); n], &mut z0, Restriction::Full).unwrap();
    assert!(z0.iter().all(|v| *v == zero()));
}

#[test]
fn richardson_error_propagation() {
    let (prob, _, ras) = setup(&small_params(), [2, 2], 2, 3, BcVariant::PmlImpedance);
    let n = prob.n_free();
    let a = prob.a.to_dense();
    let b = dense_preconditioner(&ras).unwrap();
    let ba = matmul(&b, &a);
    let iteration: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { C64::new(1.0, 0.0) } else { zero() } - ba[i][j])
                .collect()
        })
        .collect();
    let u_star = random_vec(n, 4);
    let f = FieldC::from_values(prob.f.space, matvec(&a, &u_star)).unwrap();
    let mut e: Vec<C64> = u_star.iter().map(|v| -v).collect();
    for steps in 1..=4 {
        let opts = RichardsonOptions {
            maxit: steps,
            rtol: 1e-300,
            sparse_residual: false,
            ..Default::default()
        };
        let (u, _) = richardson_solve(&prob.a, &ras, &f, &zeros(&f), &opts).unwrap();
        e = matvec(&iteration, &e);
        let err: Vec<C64> = u.values.iter().zip(&u_star).map(|(p, q)| p - q).collect();
        assert!(rel_diff(&err, &e) < 1e-10, "step {steps}: {}", rel_diff(&err, &e));
    }
}

#[test]
fn richardson_matches_direct_solve() {
    let params = ProblemParams {
        k: 50.0,
        ..Default::default()
    };
    let (prob, _, ras) = setup(&params, [2, 2], 4, 8, BcVariant::PmlImpedance);
    let (u, log) = richardson_solve(&prob.a, &ras, &prob.f, &zeros(&prob.f), &RichardsonOptions::default()).unwrap();
    assert_eq!(log.status, SolveStatus::Converged);
    let reference = direct_global_solve(&prob.a, &prob.f, DEFAULT_ORACLE_BUDGET).unwrap();
    assert!(rel_diff(&u.values, &reference.values) <= 1e-8);
    let records: Vec<usize> = log.records.iter().map(|r| r.iter).collect();
    assert_eq!(records, (1..=log.iterations()).collect::<Vec<_>>());
    assert_eq!(log.final_relres, log.records.last().unwrap().relres);
}

#[test]
fn gmres_matches_direct_solve() {
    let params = ProblemParams {
        k: 50.0,
        ..Default::default()
    };
    let (prob, _, ras) = setup(&params, [2, 2], 2, 0, BcVariant::ImpedanceOnly);
    let (u, log) = gmres_solve(&prob.a, &ras, &prob.f, &zeros(&prob.f), &GmresConfig::default()).unwrap();
    assert_eq!(log.status, SolveStatus::Converged);
    for w in log.records.windows(2) {
        assert!(w[1].relres <= w[0].relres * (1.0 + 1e-12));
    }
    let reference = direct_global_solve(&prob.a, &prob.f, DEFAULT_ORACLE_BUDGET).unwrap();
    assert!(rel_diff(&u.values, &reference.values) <= 1e-8);
}

#[test]
fn sparse_and_full_residual_paths_agree() {
    let params = ProblemParams {
        k: 50.0,
        ..Default::default()
    };
    let (prob, _, ras) = setup(&params, [3, 3], 4, 6, BcVariant::PmlImpedance);
    let run = |sparse: bool, verify: bool, maxit: usize| {
        let opts = RichardsonOptions {
            sparse_residual: sparse,
            verify_sparsity: verify,
            maxit,
            ..Default::default()
        };
        richardson_solve(&prob.a, &ras, &prob.f, &zeros(&prob.f), &opts).unwrap()
    };
    let (_, full) = run(false, false, 500);
    let (_, sparse) = run(true, true, 500);
    assert_eq!(full.iterations(), sparse.iterations());
    for (a, b) in full.records.iter().zip(&sparse.records) {
        assert!(
            (a.relres - b.relres).abs() <= 1e-12 * a.relres.max(1e-300) + 1e-14,
            "{a:?} {b:?}"
        );
    }
    for it in [1, 3, full.iterations()] {
        let (uf, _) = run(false, false, it);
        let (us, _) = run(true, false, it);
        assert!(rel_diff(&us.values, &uf.values) <= 1e-12, "iteration {it}");
    }
    // fewer values move on the sparse path
    assert!(ras.analytic_halo_count(Restriction::Sparse) < ras.analytic_halo_count(Restriction::Full));
}

#[test]
fn first_residual_is_the_load() {
    let (prob, _, ras) = setup(&small_params(), [2, 2], 2, 2, BcVariant::PmlImpedance);
    let mut r = vec![zero(); prob.n_free()];
    sparse_residual_update(&ras, &prob.a, &prob.f.values, &vec![zero(); prob.n_free()], &mut r);
    for &row in &ras.support.rows {
        assert_eq!(r[row], prob.f.values[row]);
    }
}

#[test]
fn thread_count_independence() {
    let params = ProblemParams {
        k: 50.0,
        ..Default::default()
    };
    let runs: Vec<(Vec<C64>, Vec<f64>)> = [1, 2, 8]
        .iter()
        .map(|&threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| {
                let (prob, _, ras) = setup(&params, [3, 2], 4, 6, BcVariant::PmlImpedance);
                let (u, log) =
                    richardson_solve(&prob.a, &ras, &prob.f, &zeros(&prob.f), &RichardsonOptions::default()).unwrap();
                (u.values, log.records.iter().map(|r| r.relres).collect())
            })
        })
        .collect();
    for other in &runs[1..] {
        assert_eq!(other.1, runs[0].1);
        assert_eq!(other.0, runs[0].0);
    }
}

#[test]
fn impedance_only_rejects_pml() {
    let params = small_params();
    let prob = helmholtz_ras::problem::Problem::build(&params, 4_000_000).unwrap();
    assert!(matches!(
        decompose(&prob.grid, [2, 2], 2, 3, BcVariant::ImpedanceOnly),
        Err(Error::Config { .. })
    ));
    let mut layout = decompose(&prob.grid, [2, 2], 2, 3, BcVariant::PmlImpedance).unwrap();
    layout.bc = BcVariant::ImpedanceOnly;
    assert!(matches!(
        build_ras(&prob.grid, &prob.coeffs, &layout, RasConfig::new(params.k)),
        Err(Error::Config { .. })
    ));
}

#[test]
fn local_failures_name_the_subdomain() {
    let params = small_params();
    let prob = helmholtz_ras::problem::Problem::build(&params, 4_000_000).unwrap();
    let layout = decompose(&prob.grid, [2, 1], 2, 2, BcVariant::PmlImpedance).unwrap();
    let mut cfg = RasConfig::new(params.k);
    cfg.k = f64::NAN;
    match build_ras(&prob.grid, &prob.coeffs, &layout, cfg) {
        Err(Error::Subdomain { id, .. }) => assert_eq!(id, 0),
        other => panic!("expected a subdomain error, got {other:?}"),
    }
}

#[test]
fn pou_midpoint_of_even_overlap() {
    let grid = GlobalGrid::uniform([20, 10], 0.05, 0);
    let layout = decompose(&grid, [2, 1], 4, 2, BcVariant::PmlImpedance).unwrap();
    let pou = build_pou(&layout);
    // blocks 0..10 and 10..20; overlap nodes 8..12, midpoint 10
    assert_eq!(pou.weight(0, 10, 5), 0.5);
    assert_eq!(pou.weight(1, 10, 5), 0.5);
    assert_eq!(pou.weight(0, 12, 5), 0.0);
    assert_eq!(pou.weight(1, 8, 5), 0.0);
    assert_eq!(pou.weight(0, 3, 5), 1.0);
}

fn layout_strategy() -> impl Strategy<Value = (usize, usize, usize, usize, usize, usize)> {
    (1usize..=5, 1usize..=5, 1usize..=6, 0usize..=10, 0usize..=6, 0usize..3)
}

fn random_layout(
    nx: usize,
    ny: usize,
    ovlp: usize,
    pml: usize,
    gpml: usize,
    bc: usize,
) -> Option<(GlobalGrid, helmholtz_ras::grid::SubdomainLayout)> {
    let bc = BcVariant::ALL[bc];
    let pml = if bc == BcVariant::ImpedanceOnly { 0 } else { pml };
    let cells = 8 * 5 + 3 * gpml;
    let grid = GlobalGrid::uniform([cells, cells + 3], 1.0 / 40.0, gpml);
    decompose(&grid, [nx, ny], ovlp, pml, bc).ok().map(|l| (grid, l))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pou_invariants((nx, ny, ovlp, pml, gpml, bc) in layout_strategy()) {
        let Some((grid, layout)) = random_layout(nx, ny, ovlp, pml, gpml, bc) else { return Ok(()) };
        let pou = build_pou(&layout);
        let n = layout.len() as f64;
        for iy in 0..=grid.n_cells[1] {
            for ix in 0..=grid.n_cells[0] {
                let sum: f64 = (0..layout.len()).map(|j| pou.weight(j, ix, iy)).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-14 * n, "sum {} at ({}, {})", sum, ix, iy);
                for s in &layout.subdomains {
                    let inside = |b: &[helmholtz_ras::grid::CellRange; 2]| {
                        b[0].start <= ix && ix <= b[0].end && b[1].start <= iy && iy <= b[1].end
                    };
                    let open = |b: &[helmholtz_ras::grid::CellRange; 2]| {
                        b[0].start < ix && ix < b[0].end && b[1].start < iy && iy < b[1].end
                    };
                    let w = pou.weight(s.id, ix, iy);
                    prop_assert!(w >= 0.0);
                    if inside(&s.full_box) && !inside(&s.int_box) {
                        prop_assert_eq!(w, 0.0);
                    }
                    if open(&s.int_box) && layout.subdomains.iter().all(|o| o.id == s.id || !open(&o.int_box)) {
                        prop_assert_eq!(w, 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn halo_counts_match_analytic((nx, ny, ovlp, pml, gpml, bc) in layout_strategy(), seed in 0u64..1000) {
        let Some((grid, layout)) = random_layout(nx, ny, ovlp, pml, gpml, bc) else { return Ok(()) };
        let coeffs = helmholtz_ras::pml::PmlCoeffs::global(&grid, 30.0);
        let ras = build_ras(&grid, &coeffs, &layout, RasConfig::new(3.0)).unwrap();
        let n = ras.len();
        let r = random_vec(n, seed);
        let mut z = vec![zero(); n];
        for restriction in [Restriction::Full, Restriction::Sparse] {
            ras.reset_stats();
            ras.apply(&r, &mut z, restriction).unwrap();
            prop_assert_eq!(ras.counters.total(), ras.analytic_halo_count(restriction));
            prop_assert_eq!(ras.counters.total(), ras.halo.planned_count(restriction == Restriction::Sparse));
        }
        // received sets partition the non-owned restriction support
        for (j, h) in ras.halo.subdomains.iter().enumerate() {
            let mut seen = std::collections::BTreeSet::new();
            for p in &h.recv {
                prop_assert!(p.peer != j);
                for &(_, g) in &p.entries {
                    let (ix, iy) = ras.global.node(g);
                    prop_assert_eq!(layout.owner(ix, iy), p.peer);
                    prop_assert!(seen.insert(g));
                }
            }
            for &(_, g) in &h.owned {
                prop_assert!(seen.insert(g));
            }
            let expected = (0..ras.locals[j].space.len())
                .filter(|&li| {
                    let (ix, iy) = ras.locals[j].space.node(li);
                    ras.global.index(ix, iy).is_some()
                })
                .count();
            prop_assert_eq!(seen.len(), expected);
        }
    }
}
