//! Sparse LU of general CSR matrices.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::lu::{factorize_symbolic_lu, LuRef, NumericLu, SymbolicLu};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Spec;
use faer::{Conj, MatMut, Par};

use crate::assembly::{norm2, CsrMatrixC};
use crate::{Error, Result, C64};

/// LU factorization (column-AMD ordering, partial pivoting) of a CSR
/// matrix. The CSR arrays of `A` are handed to the backend as the CSC arrays
/// of `Aᵀ`; solves use the transposed factorization.
#[derive(Debug)]
pub struct SparseFactorization {
    n: usize,
    symbolic: SymbolicLu<usize>,
    numeric: NumericLu<usize, C64>,
    matrix: CsrMatrixC,
    probe_residual: f64,
}

pub fn factorize(a: &CsrMatrixC) -> Result<SparseFactorization> {
    SparseFactorization::new(a.clone())
}

impl SparseFactorization {
    pub fn new(matrix: CsrMatrixC) -> Result<Self> {
        let n = matrix.n_rows;
        if matrix.n_cols != n {
            return Err(Error::Dimension {
                expected: n,
                got: matrix.n_cols,
            });
        }
        check_structure(&matrix)?;
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &matrix.row_offsets, None, &matrix.col_indices);
        let at = SparseColMatRef::new(sym, &matrix.values);
        let symbolic = factorize_symbolic_lu(sym, Default::default()).map_err(|e| Error::Backend(format!("{e:?}")))?;
        let mut numeric = NumericLu::new();
        let params: Spec<_, C64> = Default::default();
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_lu_scratch::<C64>(Par::Seq, params));
        symbolic
            .factorize_numeric_lu(&mut numeric, at, Par::Seq, MemStack::new(&mut mem), params)
            .map_err(|e| Error::Factorization {
                pivot: 0,
                reason: format!("{e:?}"),
            })?;
        let mut fact = Self {
            n,
            symbolic,
            numeric,
            matrix,
            probe_residual: 0.0,
        };
        fact.probe_residual = fact.probe()?;
        Ok(fact)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn probe_residual(&self) -> f64 {
        self.probe_residual
    }

    fn probe(&self) -> Result<f64> {
        let b: Vec<C64> = (0..self.n)
            .map(|i| {
                let s = (i as f64 * 0.754_877_666_246_692_7).fract();
                C64::new(s - 0.5, (7.0 * s).fract() - 0.5)
            })
            .collect();
        let mut x = b.clone();
        self.solve_in_place(&mut x)?;
        let mut ax = vec![C64::new(0.0, 0.0); self.n];
        self.matrix.matvec_into(&x, &mut ax)?;
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let rel = norm2(&r) / norm2(&b).max(f64::MIN_POSITIVE);
        if !rel.is_finite() || rel > 1e-8 {
            let pivot = x.iter().position(|v| !v.is_finite()).unwrap_or(0);
            return Err(Error::Factorization {
                pivot,
                reason: format!("numerically singular (probe residual {rel:e})"),
            });
        }
        Ok(rel)
    }

    /// Overwrites `b` with `A⁻¹ b`.
    pub fn solve_in_place(&self, b: &mut [C64]) -> Result<()> {
        if b.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: b.len(),
            });
        }
        let lu = LuRef::new_unchecked(&self.symbolic, &self.numeric);
        let mut mem = MemBuffer::new(self.symbolic.solve_transpose_in_place_scratch::<C64>(1, Par::Seq));
        let rhs = MatMut::from_column_major_slice_mut(b, self.n, 1);
        lu.solve_transpose_in_place_with_conj(Conj::No, rhs, Par::Seq, MemStack::new(&mut mem));
        Ok(())
    }

    pub fn solve(&self, b: &[C64], x: &mut [C64]) -> Result<()> {
        x.copy_from_slice(b);
        self.solve_in_place(x)
    }
}

/// Rejects matrices with an empty (all-zero) row or column.
fn check_structure(a: &CsrMatrixC) -> Result<()> {
    let zero = C64::new(0.0, 0.0);
    let mut col_seen = vec![false; a.n_cols];
    for r in 0..a.n_rows {
        let (cols, vals) = a.row(r);
        let mut any = false;
        for (c, v) in cols.iter().zip(vals) {
            if *v != zero {
                any = true;
                col_seen[*c] = true;
            }
        }
        if !any {
            return Err(Error::Factorization {
                pivot: r,
                reason: "zero row".into(),
            });
        }
    }
    if let Some(c) = col_seen.iter().position(|s| !s) {
        return Err(Error::Factorization {
            pivot: c,
            reason: "zero column".into(),
        });
    }
    Ok(())
}
