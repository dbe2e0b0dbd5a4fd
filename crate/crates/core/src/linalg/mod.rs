//! Direct subdomain solvers and the GMRES accelerator.

mod gmres;
mod separable;
mod sparse;
mod tridiag;

pub use gmres::{gmres, GmresConfig, GmresOutcome};
pub use separable::SeparableFactorization;
pub use sparse::{factorize, SparseFactorization};
pub use tridiag::TridiagLu;

use crate::assembly::{assemble_operator, Quadrature, Region, SeparableOperator};
use crate::{Error, Result, C64};

/// Which direct method factors the subdomain operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LocalSolverKind {
    /// Kronecker/Schur solver on the tensor structure of the local operator.
    #[default]
    Separable,
    /// General sparse LU of the assembled local matrix.
    SparseLu,
}

impl LocalSolverKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocalSolverKind::Separable => "separable",
            LocalSolverKind::SparseLu => "sparse-lu",
        }
    }
}

impl std::str::FromStr for LocalSolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separable" => Ok(Self::Separable),
            "sparse-lu" => Ok(Self::SparseLu),
            other => Err(Error::config(
                "local_solver",
                format!("unknown solver `{other}` (separable | sparse-lu)"),
            )),
        }
    }
}

/// A factored subdomain operator.
#[derive(Debug)]
pub enum LocalFactor {
    Separable(SeparableFactorization),
    Sparse(SparseFactorization),
}

impl LocalFactor {
    /// Assembles and factors the operator of `region`.
    pub fn build(region: &Region, k: f64, quad: Quadrature, kind: LocalSolverKind) -> Result<Self> {
        match kind {
            LocalSolverKind::Separable => Ok(Self::Separable(SeparableFactorization::new(
                SeparableOperator::from_region(region, k, quad),
            )?)),
            LocalSolverKind::SparseLu => Ok(Self::Sparse(SparseFactorization::new(assemble_operator(
                region, k, quad,
            ))?)),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Separable(f) => f.len(),
            Self::Sparse(f) => f.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn probe_residual(&self) -> f64 {
        match self {
            Self::Separable(f) => f.probe_residual(),
            Self::Sparse(f) => f.probe_residual(),
        }
    }

    pub fn solve(&self, b: &[C64], x: &mut [C64]) -> Result<()> {
        match self {
            Self::Separable(f) => f.solve(b, x),
            Self::Sparse(f) => f.solve(b, x),
        }
    }
}
