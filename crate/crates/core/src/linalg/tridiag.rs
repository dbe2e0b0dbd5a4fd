//! Tridiagonal LU with partial pivoting.

use crate::assembly::Tridiag;
use crate::{Error, Result, C64};

/// Factors `P T = L U` of a complex tridiagonal matrix. `U` has two
/// superdiagonals because of row interchanges.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagLu {
    dl: Vec<C64>,
    d: Vec<C64>,
    du: Vec<C64>,
    du2: Vec<C64>,
    swap: Vec<bool>,
}

impl TridiagLu {
    pub fn new(t: &Tridiag) -> Result<Self> {
        let n = t.len();
        let mut dl = t.sub.clone();
        let mut d = t.diag.clone();
        let mut du = t.sup.clone();
        let mut du2 = vec![C64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swap = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].l1_norm() >= dl[i].l1_norm() {
                if d[i] == C64::new(0.0, 0.0) {
                    return Err(singular(i));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swap[i] = true;
            }
        }
        if n > 0 && !(d[n - 1].norm() > 0.0) {
            return Err(singular(n - 1));
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::Factorization {
                pivot: d.iter().position(|v| !v.is_finite()).unwrap_or(0),
                reason: "non-finite pivot".into(),
            });
        }
        Ok(Self { dl, d, du, du2, swap })
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Overwrites `b` with `T⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.len();
        for i in 0..n.saturating_sub(1) {
            if self.swap[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                let v = b[i];
                b[i + 1] -= self.dl[i] * v;
            }
        }
        if n == 0 {
            return;
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn singular(pivot: usize) -> Error {
    Error::Factorization {
        pivot,
        reason: "zero pivot in tridiagonal factorization".into(),
    }
}
