#![allow(dead_code)]

use helmholtz_ras::assembly::{BcVariant, FieldC};
use helmholtz_ras::grid::{decompose, ProblemParams, SubdomainLayout};
use helmholtz_ras::problem::Problem;
use helmholtz_ras::schwarz::{build_ras, RasConfig, RasOperator};
use helmholtz_ras::C64;

pub type Dense = Vec<Vec<C64>>;

pub fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

pub fn norm(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let d: Vec<C64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
    norm(&d) / norm(b)
}

pub fn dense_rel_diff(a: &Dense, b: &Dense) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            num += (x - y).norm_sqr();
            den += y.norm_sqr();
        }
    }
    (num / den).sqrt()
}

pub fn matmul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![zero(); p]; n];
    for i in 0..n {
        for l in 0..m {
            let ail = a[i][l];
            if ail == zero() {
                continue;
            }
            for j in 0..p {
                c[i][j] += ail * b[l][j];
            }
        }
    }
    c
}

pub fn matvec(a: &Dense, x: &[C64]) -> Vec<C64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
pub fn inverse(a: &Dense) -> Dense {
    let n = a.len();
    let mut m: Dense = a.clone();
    let mut inv: Dense = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { C64::new(1.0, 0.0) } else { zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm()))
            .unwrap();
        m.swap(col, p);
        inv.swap(col, p);
        let d = m[col][col];
        for j in 0..n {
            m[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r][col];
            if f == zero() {
                continue;
            }
            for j in 0..n {
                let (mv, iv) = (m[col][j], inv[col][j]);
                m[r][j] -= f * mv;
                inv[r][j] -= f * iv;
            }
        }
    }
    inv
}

/// Small problem (≤ 2000 free nodes) at k = 50 with 4 points per wavelength.
pub fn small_params() -> ProblemParams {
    ProblemParams {
        k: 50.0,
        ppw: 4,
        kappa_g_wavelengths: 1.0,
        ..Default::default()
    }
}

pub fn setup(
    params: &ProblemParams,
    nsub: [usize; 2],
    n_ovlp: usize,
    n_pml: usize,
    bc: BcVariant,
) -> (Problem, SubdomainLayout, RasOperator) {
    let prob = Problem::build(params, 4_000_000).unwrap();
    let layout = decompose(&prob.grid, nsub, n_ovlp, n_pml, bc).unwrap();
    let ras = build_ras(&prob.grid, &prob.coeffs, &layout, RasConfig::new(params.k)).unwrap();
    (prob, layout, ras)
}

pub fn zeros(f: &FieldC) -> FieldC {
    FieldC::zeros(f.space)
}
