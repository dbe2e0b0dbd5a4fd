//! Right-preconditioned GMRES with modified Gram–Schmidt.

use crate::assembly::norm2;
use crate::{Error, Result, C64};

/// Orthogonality loss that triggers a second Gram–Schmidt pass.
const REORTH_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresConfig {
    pub rtol: f64,
    pub maxit: usize,
    /// Krylov dimension per cycle; `None` runs full GMRES.
    pub restart: Option<usize>,
}

impl Default for GmresConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            maxit: 500,
            restart: None,
        }
    }
}

impl GmresConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) {
            return Err(Error::config("rtol", "must be positive"));
        }
        if self.maxit == 0 {
            return Err(Error::config("maxit", "must be at least 1"));
        }
        if self.restart == Some(0) {
            return Err(Error::config("restart", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOutcome {
    pub x: Vec<C64>,
    pub iterations: usize,
    /// Relative residual after each iteration. Entries inside a cycle are the
    /// Arnoldi estimates; the entry closing a cycle is recomputed from `x`.
    pub history: Vec<f64>,
    pub converged: bool,
    pub breakdown: bool,
    pub cycles: usize,
    /// `‖b − A x‖ / ‖b‖` recomputed at exit.
    pub final_relres: f64,
    /// Number of second Gram–Schmidt passes performed.
    pub reorthogonalizations: usize,
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(p, q)| p.conj() * q).sum()
}

fn givens(a: C64, b: f64) -> (f64, C64) {
    let r = (a.norm_sqr() + b * b).sqrt();
    if a.norm() == 0.0 {
        (0.0, C64::new(1.0, 0.0))
    } else {
        (a.norm() / r, (a / a.norm()) * (b / r))
    }
}

/// Solves `A x = b` with right preconditioner `M`. `on_iter(iteration,
/// relres)` is called after every iteration.
pub fn gmres<A, M, L>(
    mut apply_a: A,
    mut apply_m: M,
    b: &[C64],
    x0: &[C64],
    cfg: &GmresConfig,
    mut on_iter: L,
) -> Result<GmresOutcome>
where
    A: FnMut(&[C64], &mut [C64]) -> Result<()>,
    M: FnMut(&[C64], &mut [C64]) -> Result<()>,
    L: FnMut(usize, f64),
{
    cfg.validate()?;
    let n = b.len();
    if x0.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: x0.len(),
        });
    }
    let zero = C64::new(0.0, 0.0);
    let bnorm = norm2(b);
    let mut x = x0.to_vec();
    let mut out = GmresOutcome {
        x: Vec::new(),
        iterations: 0,
        history: Vec::new(),
        converged: false,
        breakdown: false,
        cycles: 0,
        final_relres: 0.0,
        reorthogonalizations: 0,
    };
    if bnorm == 0.0 {
        out.x = vec![zero; n];
        out.converged = true;
        return Ok(out);
    }
    let mut r = vec![zero; n];
    let mut tmp = vec![zero; n];
    let residual = |x: &[C64], r: &mut [C64], apply_a: &mut A| -> Result<f64> {
        apply_a(x, r)?;
        for (ri, bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        Ok(norm2(r))
    };
    let mut rnorm = residual(&x, &mut r, &mut apply_a)?;
    out.final_relres = rnorm / bnorm;
    if out.final_relres <= cfg.rtol {
        out.converged = true;
        out.x = x;
        return Ok(out);
    }

    while out.iterations < cfg.maxit && !out.breakdown {
        out.cycles += 1;
        let m = cfg.restart.unwrap_or(cfg.maxit).min(cfg.maxit - out.iterations);
        let mut v: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        v.push(r.iter().map(|ri| ri / rnorm).collect());
        // Columns of the Hessenberg matrix, already rotated.
        let mut hcols: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut rot: Vec<(f64, C64)> = Vec::with_capacity(m);
        let mut g = vec![C64::new(rnorm, 0.0)];
        for j in 0..m {
            apply_m(&v[j], &mut tmp)?;
            let mut w = vec![zero; n];
            apply_a(&tmp, &mut w)?;
            let mut h = vec![zero; j + 2];
            for (i, vi) in v.iter().enumerate() {
                let hij = dotc(vi, &w);
                h[i] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let mut wnorm = norm2(&w);
            if wnorm > 0.0 {
                let loss = v.iter().map(|vi| dotc(vi, &w).norm()).fold(0.0, f64::max) / wnorm;
                if loss > REORTH_THRESHOLD {
                    out.reorthogonalizations += 1;
                    for (i, vi) in v.iter().enumerate() {
                        let c = dotc(vi, &w);
                        h[i] += c;
                        for (wk, vk) in w.iter_mut().zip(vi) {
                            *wk -= c * vk;
                        }
                    }
                    wnorm = norm2(&w);
                }
            }
            h[j + 1] = C64::new(wnorm, 0.0);
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a, bb) = (h[i], h[i + 1]);
                h[i] = c * a + s * bb;
                h[i + 1] = -s.conj() * a + c * bb;
            }
            let (c, s) = givens(h[j], h[j + 1].re);
            h[j] = c * h[j] + s * h[j + 1];
            h[j + 1] = zero;
            rot.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            hcols.push(h);
            out.iterations += 1;
            let estimate = g[j + 1].norm() / bnorm;
            let breakdown = wnorm == 0.0;
            if estimate <= cfg.rtol || breakdown || j + 1 == m {
                out.breakdown = breakdown;
                break;
            }
            out.history.push(estimate);
            on_iter(out.iterations, estimate);
            v.push(w.iter().map(|wk| wk / wnorm).collect());
        }
        // Back substitution for the cycle's least-squares coefficients.
        let k = hcols.len();
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for l in i + 1..k {
                s -= hcols[l][i] * y[l];
            }
            y[i] = s / hcols[i][i];
        }
        let mut vy = vec![zero; n];
        for (vl, yl) in v.iter().zip(&y) {
            for (o, vk) in vy.iter_mut().zip(vl) {
                *o += yl * vk;
            }
        }
        apply_m(&vy, &mut tmp)?;
        for (xi, ti) in x.iter_mut().zip(&tmp) {
            *xi += ti;
        }
        rnorm = residual(&x, &mut r, &mut apply_a)?;
        out.final_relres = rnorm / bnorm;
        out.history.push(out.final_relres);
        on_iter(out.iterations, out.final_relres);
        if out.final_relres <= cfg.rtol {
            out.converged = true;
            break;
        }
        if rnorm == 0.0 {
            break;
        }
    }
    out.x = x;
    Ok(out)
}
