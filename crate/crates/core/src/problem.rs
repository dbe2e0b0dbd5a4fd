//! The global discrete Helmholtz problem `A u = f`.

use crate::assembly::{assemble_operator, assemble_source, CsrMatrixC, FieldC, Quadrature, Region};
use crate::grid::{build_global_grid, GlobalGrid, ProblemParams};
use crate::pml::PmlCoeffs;
use crate::Result;

/// Source centre used by the experiments.
pub const SOURCE_CENTRE: [f64; 2] = [0.5, 0.5];

#[derive(Debug, Clone)]
pub struct Problem {
    pub params: ProblemParams,
    pub grid: GlobalGrid,
    pub coeffs: PmlCoeffs,
    pub region: Region,
    pub a: CsrMatrixC,
    pub f: FieldC,
    pub quad: Quadrature,
}

impl Problem {
    /// Grid, global PML, operator and smoothed point-source load.
    pub fn build(params: &ProblemParams, node_budget: usize) -> Result<Self> {
        params.validate()?;
        let grid = build_global_grid(params, node_budget)?;
        let coeffs = PmlCoeffs::global(&grid, params.sigma());
        let f = assemble_source(&grid, params.k, SOURCE_CENTRE)?;
        Self::from_parts(*params, grid, coeffs, f)
    }

    pub fn from_parts(params: ProblemParams, grid: GlobalGrid, coeffs: PmlCoeffs, f: FieldC) -> Result<Self> {
        let quad = Quadrature::Gauss2;
        let region = Region::global(&grid, coeffs.clone())?;
        let a = assemble_operator(&region, params.k, quad);
        Ok(Self {
            params,
            grid,
            coeffs,
            region,
            a,
            f,
            quad,
        })
    }

    pub fn n_free(&self) -> usize {
        self.f.len()
    }
}
