//! Richardson and GMRES drivers around the RAS preconditioner.

use std::time::Instant;

use super::ras::{RasOperator, Restriction};
use crate::assembly::{norm2, CsrMatrixC, FieldC};
use crate::linalg::{gmres, GmresConfig};
use crate::{Error, Result, C64};

/// Relative residual above which Richardson is declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    Diverged,
    Breakdown,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "maxit",
            SolveStatus::Diverged => "diverged",
            SolveStatus::Breakdown => "breakdown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub relres: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub records: Vec<IterationRecord>,
    pub status: SolveStatus,
    pub final_relres: f64,
    /// Filled in by the caller that owns the setup phase.
    pub setup_s: f64,
    pub solve_s: f64,
    pub comm_values: u64,
    pub preconditioner_applies: u64,
}

impl IterationLog {
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.iter)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RichardsonOptions {
    pub rtol: f64,
    pub maxit: usize,
    /// Evaluate the residual only on the overlap support after the first
    /// update.
    pub sparse_residual: bool,
    /// Also evaluate the full residual and fail if it is not negligible off
    /// the support.
    pub verify_sparsity: bool,
}

impl Default for RichardsonOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            maxit: 500,
            sparse_residual: true,
            verify_sparsity: false,
        }
    }
}

fn check_dims(a: &CsrMatrixC, p: &RasOperator, f: &FieldC, u0: &FieldC) -> Result<()> {
    for got in [a.n_rows, f.len(), u0.len()] {
        if got != p.len() {
            return Err(Error::Dimension { expected: p.len(), got });
        }
    }
    Ok(())
}

fn full_residual(a: &CsrMatrixC, f: &[C64], u: &[C64], r: &mut [C64]) -> Result<()> {
    a.matvec_into(u, r)?;
    for (ri, fi) in r.iter_mut().zip(f) {
        *ri = fi - *ri;
    }
    Ok(())
}

/// Residual `f − A u` evaluated only on the rows of the support; all other
/// entries are set to zero.
pub fn sparse_residual_update(p: &RasOperator, a: &CsrMatrixC, f: &[C64], u: &[C64], r: &mut [C64]) {
    r.fill(C64::new(0.0, 0.0));
    for &row in &p.support.rows {
        r[row] = f[row] - a.row_dot(row, u);
    }
}

/// Largest residual magnitude off the support.
fn off_support_max(p: &RasOperator, r: &[C64]) -> f64 {
    let mut m: f64 = 0.0;
    for (i, v) in r.iter().enumerate() {
        let (ix, iy) = p.global.node(i);
        if !p.support.contains(ix, iy) {
            m = m.max(v.norm());
        }
    }
    m
}

/// Fixed-point iteration `u ← u + B⁻¹ (f − A u)`.
pub fn richardson_solve(
    a: &CsrMatrixC,
    p: &RasOperator,
    f: &FieldC,
    u0: &FieldC,
    opts: &RichardsonOptions,
) -> Result<(FieldC, IterationLog)> {
    check_dims(a, p, f, u0)?;
    let start = Instant::now();
    let comm0 = p.counters.total();
    let applies0 = p.counters.applies();
    let n = f.len();
    let fnorm = f.norm();
    let mut u = u0.values.clone();
    let mut r = vec![C64::new(0.0, 0.0); n];
    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut full = if opts.verify_sparsity {
        vec![C64::new(0.0, 0.0); n]
    } else {
        Vec::new()
    };
    full_residual(a, &f.values, &u, &mut r)?;
    let mut records = Vec::new();
    let mut relres = if fnorm > 0.0 { norm2(&r) / fnorm } else { 0.0 };
    let mut status = if relres <= opts.rtol {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIterations
    };
    let mut iter = 0;
    while status != SolveStatus::Converged && iter < opts.maxit {
        let restriction = if opts.sparse_residual && iter > 0 {
            Restriction::Sparse
        } else {
            Restriction::Full
        };
        p.apply(&r, &mut z, restriction)?;
        for (ui, zi) in u.iter_mut().zip(&z) {
            *ui += zi;
        }
        iter += 1;
        if opts.sparse_residual {
            sparse_residual_update(p, a, &f.values, &u, &mut r);
        } else {
            full_residual(a, &f.values, &u, &mut r)?;
        }
        if opts.verify_sparsity {
            full_residual(a, &f.values, &u, &mut full)?;
            let off = off_support_max(p, &full);
            if off > 1e-12 * fnorm {
                return Err(Error::SparsityViolation {
                    iteration: iter,
                    value: off / fnorm,
                });
            }
        }
        relres = norm2(&r) / fnorm;
        records.push(IterationRecord {
            iter,
            relres,
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if relres <= opts.rtol {
            status = SolveStatus::Converged;
        } else if !(relres <= DIVERGENCE_THRESHOLD) {
            status = SolveStatus::Diverged;
            break;
        }
    }
    let log = IterationLog {
        records,
        status,
        final_relres: relres,
        setup_s: 0.0,
        solve_s: start.elapsed().as_secs_f64(),
        comm_values: p.counters.total() - comm0,
        preconditioner_applies: p.counters.applies() - applies0,
    };
    Ok((
        FieldC {
            space: f.space,
            values: u,
        },
        log,
    ))
}

/// Right-preconditioned GMRES with `B⁻¹` as preconditioner.
pub fn gmres_solve(
    a: &CsrMatrixC,
    p: &RasOperator,
    f: &FieldC,
    u0: &FieldC,
    cfg: &GmresConfig,
) -> Result<(FieldC, IterationLog)> {
    check_dims(a, p, f, u0)?;
    let start = Instant::now();
    let comm0 = p.counters.total();
    let applies0 = p.counters.applies();
    let mut records = Vec::new();
    let out = gmres(
        |x, y| a.matvec_into(x, y),
        |x, y| p.apply(x, y, Restriction::Full),
        &f.values,
        &u0.values,
        cfg,
        |iter, relres| {
            records.push(IterationRecord {
                iter,
                relres,
                elapsed_s: start.elapsed().as_secs_f64(),
            })
        },
    )?;
    let status = if out.converged {
        SolveStatus::Converged
    } else if out.breakdown {
        SolveStatus::Breakdown
    } else {
        SolveStatus::MaxIterations
    };
    let log = IterationLog {
        records,
        status,
        final_relres: out.final_relres,
        setup_s: 0.0,
        solve_s: start.elapsed().as_secs_f64(),
        comm_values: p.counters.total() - comm0,
        preconditioner_applies: p.counters.applies() - applies0,
    };
    Ok((
        FieldC {
            space: f.space,
            values: out.x,
        },
        log,
    ))
}
