//! Reference computations: a global sparse direct solve, the dense
//! preconditioner matrix, and a finite element convergence study.

use std::f64::consts::PI;

use crate::assembly::{assemble_load, assemble_operator, norm2, CsrMatrixC, FieldC, Quadrature, Region};
use crate::grid::GlobalGrid;
use crate::linalg::SparseFactorization;
use crate::pml::PmlCoeffs;
use crate::schwarz::{RasOperator, Restriction};
use crate::{Error, Result, C64};

pub const DEFAULT_ORACLE_BUDGET: usize = 300_000;
pub const DENSE_BUDGET: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub problem: String,
    pub reference_norm: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Mesh sizes and L² errors of a convergence study.
    pub levels: Vec<(f64, f64)>,
    pub order: Option<f64>,
}

impl OracleReport {
    /// Discrete ℓ² comparison of `u` against `u_ref`.
    pub fn compare(problem: impl Into<String>, u: &[C64], u_ref: &[C64], tolerance: f64) -> Result<Self> {
        if u.len() != u_ref.len() {
            return Err(Error::Dimension {
                expected: u_ref.len(),
                got: u.len(),
            });
        }
        let diff: Vec<C64> = u.iter().zip(u_ref).map(|(a, b)| a - b).collect();
        let abs_error = norm2(&diff);
        let reference_norm = norm2(u_ref);
        let rel_error = abs_error / reference_norm;
        Ok(Self {
            problem: problem.into(),
            reference_norm,
            abs_error,
            rel_error,
            tolerance,
            pass: rel_error <= tolerance,
            levels: Vec::new(),
            order: None,
        })
    }
}

/// Solves `A u = f` by sparse LU.
pub fn direct_global_solve(a: &CsrMatrixC, f: &FieldC, budget: usize) -> Result<FieldC> {
    if a.n_rows > budget {
        return Err(Error::Capacity {
            needed: a.n_rows,
            budget,
        });
    }
    if a.n_rows != f.len() {
        return Err(Error::Dimension {
            expected: a.n_rows,
            got: f.len(),
        });
    }
    let lu = SparseFactorization::new(a.clone())?;
    let mut u = vec![C64::new(0.0, 0.0); f.len()];
    lu.solve(&f.values, &mut u)?;
    let mut au = vec![C64::new(0.0, 0.0); f.len()];
    a.matvec_into(&u, &mut au)?;
    let r: Vec<C64> = f.values.iter().zip(&au).map(|(p, q)| p - q).collect();
    let fnorm = f.norm();
    if norm2(&r) > 1e-12 * fnorm {
        return Err(Error::Factorization {
            pivot: 0,
            reason: format!("direct solve residual {:e}", norm2(&r) / fnorm),
        });
    }
    FieldC::from_values(f.space, u)
}

/// Dense `B⁻¹`, row-major, built column by column from unit vectors.
pub fn dense_preconditioner(p: &RasOperator) -> Result<Vec<Vec<C64>>> {
    let n = p.len();
    if n > DENSE_BUDGET {
        return Err(Error::Capacity {
            needed: n,
            budget: DENSE_BUDGET,
        });
    }
    let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for c in 0..n {
        e[c] = C64::new(1.0, 0.0);
        p.apply(&e, &mut col, Restriction::Full)?;
        e[c] = C64::new(0.0, 0.0);
        for (row, v) in m.iter_mut().zip(&col) {
            row[c] = *v;
        }
    }
    Ok(m)
}

/// L² error of the Q1 interpolant `u_h` (over free nodes of `grid`, zero on
/// the boundary) against `exact`, by 3×3 Gauss per cell.
fn l2_error(grid: &GlobalGrid, u_h: &[C64], exact: impl Fn(f64, f64) -> f64) -> f64 {
    let space = grid.free_space();
    let rule = Quadrature::Gauss3.rule();
    let h = grid.h;
    let nodal = |ix: usize, iy: usize| space.index(ix, iy).map_or(C64::new(0.0, 0.0), |i| u_h[i]);
    let mut acc = 0.0;
    for cy in 0..grid.n_cells[1] {
        for cx in 0..grid.n_cells[0] {
            let v = [
                nodal(cx, cy),
                nodal(cx + 1, cy),
                nodal(cx + 1, cy + 1),
                nodal(cx, cy + 1),
            ];
            for &(xi, wx) in rule {
                for &(eta, wy) in rule {
                    let uh = v[0] * ((1.0 - xi) * (1.0 - eta))
                        + v[1] * (xi * (1.0 - eta))
                        + v[2] * (xi * eta)
                        + v[3] * ((1.0 - xi) * eta);
                    let x = grid.coord(0, cx) + xi * h;
                    let y = grid.coord(1, cy) + eta * h;
                    acc += wx * wy * h * h * (uh - C64::new(exact(x, y), 0.0)).norm_sqr();
                }
            }
        }
    }
    acc.sqrt()
}

/// Manufactured solution `sin(πx) sin(πy)` of `−Δu − k²u = f` with
/// homogeneous Dirichlet data on the unit square, solved on meshes with
/// `8 · 2^l` cells per side for `l = 0..=refinements`.
pub fn convergence_study(k: f64, refinements: usize) -> Result<OracleReport> {
    if !(0.0..=10.0).contains(&k) {
        return Err(Error::config("k", "convergence study requires 0 <= k <= 10"));
    }
    let exact = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
    let mut levels = Vec::with_capacity(refinements + 1);
    for l in 0..=refinements {
        let n = 8usize << l;
        let grid = GlobalGrid::uniform([n, n], 1.0 / n as f64, 0);
        let region = Region::global(&grid, PmlCoeffs::identity())?;
        let a = assemble_operator(&region, k, Quadrature::Gauss3);
        let f = assemble_load(
            &grid,
            |p| C64::new((2.0 * PI * PI - k * k) * exact(p[0], p[1]), 0.0),
            Quadrature::Gauss3,
        );
        let u = direct_global_solve(&a, &f, DEFAULT_ORACLE_BUDGET)?;
        levels.push((grid.h, l2_error(&grid, &u.values, exact)));
    }
    let order = (levels.len() >= 2).then(|| {
        let (h0, e0) = levels[levels.len() - 2];
        let (h1, e1) = levels[levels.len() - 1];
        (e0 / e1).ln() / (h0 / h1).ln()
    });
    let (_, last) = *levels.last().unwrap();
    Ok(OracleReport {
        problem: format!("manufactured sin(pi x) sin(pi y), k = {k}, {refinements} refinements"),
        reference_norm: 0.5,
        abs_error: last,
        rel_error: last / 0.5,
        tolerance: 0.2,
        pass: order.is_some_and(|p| (p - 2.0).abs() <= 0.2),
        levels,
        order,
    })
}
