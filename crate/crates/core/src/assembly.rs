//! Q1 finite element assembly of the PML-modified Helmholtz form
//!
//! `a(u, v) = ∫ (D ∇u)·∇v − (β·∇u) v − k² u v  (−ik ∫ u v on impedance faces)`
//!
//! on tensor grids. Test functions are not conjugated. Dirichlet nodes are
//! eliminated; the remaining (free) nodes of a region always form a tensor
//! product of one-dimensional index ranges, numbered x-fastest.

use std::io::Write;

use rayon::prelude::*;

use crate::grid::{CellRange, FaceBc, GlobalGrid, Subdomain, LOWER, UPPER};
use crate::pml::{PmlCoeffs, Scaling1D};
use crate::{Error, Result, C64};

/// Transmission condition used on the artificial faces of subdomains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BcVariant {
    /// Subdomain PML closed by a Dirichlet condition.
    PmlDirichlet,
    /// Subdomain PML closed by an impedance condition.
    PmlImpedance,
    /// No subdomain PML; impedance condition directly on the int box.
    ImpedanceOnly,
}

impl BcVariant {
    pub const ALL: [BcVariant; 3] = [
        BcVariant::PmlImpedance,
        BcVariant::PmlDirichlet,
        BcVariant::ImpedanceOnly,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            BcVariant::PmlDirichlet => "pml-dirichlet",
            BcVariant::PmlImpedance => "pml-impedance",
            BcVariant::ImpedanceOnly => "impedance",
        }
    }
}

impl std::str::FromStr for BcVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pml-dirichlet" => Ok(BcVariant::PmlDirichlet),
            "pml-impedance" => Ok(BcVariant::PmlImpedance),
            "impedance" => Ok(BcVariant::ImpedanceOnly),
            other => Err(Error::config(
                "bc",
                format!("unknown variant `{other}` (pml-dirichlet | pml-impedance | impedance)"),
            )),
        }
    }
}

impl std::fmt::Display for BcVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tensor index space of free nodes: global node indices
/// `lo[d] .. lo[d] + n[d]` per dimension, numbered x-fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FreeSpace {
    pub lo: [usize; 2],
    pub n: [usize; 2],
}

impl FreeSpace {
    /// Space spanning the closed node ranges `lo..=hi`.
    pub fn new(lo: [usize; 2], hi: [usize; 2]) -> Self {
        let n = [(hi[0] + 1).saturating_sub(lo[0]), (hi[1] + 1).saturating_sub(lo[1])];
        Self { lo, n }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, ix: usize, iy: usize) -> bool {
        ix >= self.lo[0] && ix < self.lo[0] + self.n[0] && iy >= self.lo[1] && iy < self.lo[1] + self.n[1]
    }

    pub fn index(&self, ix: usize, iy: usize) -> Option<usize> {
        self.contains(ix, iy)
            .then(|| (ix - self.lo[0]) + self.n[0] * (iy - self.lo[1]))
    }

    /// Grid node of free index `i`.
    pub fn node(&self, i: usize) -> (usize, usize) {
        (self.lo[0] + i % self.n[0], self.lo[1] + i / self.n[0])
    }
}

/// Complex nodal vector over the free nodes of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldC {
    pub space: FreeSpace,
    pub values: Vec<C64>,
}

impl FieldC {
    pub fn zeros(space: FreeSpace) -> Self {
        Self {
            space,
            values: vec![C64::new(0.0, 0.0); space.len()],
        }
    }

    pub fn from_values(space: FreeSpace, values: Vec<C64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Dimension {
                expected: space.len(),
                got: values.len(),
            });
        }
        Ok(Self { space, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.values)
    }
}

/// Euclidean norm, summed in index order.
pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Complex sparse matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrixC {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_offsets: Vec<usize>,
    pub col_indices: Vec<usize>,
    pub values: Vec<C64>,
}

impl CsrMatrixC {
    /// Builds a matrix from unsorted triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, C64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= n_rows || c >= n_cols {
                return Err(Error::Dimension {
                    expected: n_rows.max(n_cols),
                    got: r.max(c),
                });
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<C64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            row_offsets[r + 1] += 1;
            col_indices.push(c);
            values.push(v);
            last = Some((r, c));
        }
        for r in 0..n_rows {
            row_offsets[r + 1] += row_offsets[r];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[C64]) {
        let span = self.row_offsets[r]..self.row_offsets[r + 1];
        (&self.col_indices[span.clone()], &self.values[span])
    }

    pub fn get(&self, r: usize, c: usize) -> Option<C64> {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).ok().map(|i| vals[i])
    }

    /// `y = A x`. Rows are independent, each accumulated in column order.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) -> Result<()> {
        if x.len() != self.n_cols {
            return Err(Error::Dimension {
                expected: self.n_cols,
                got: x.len(),
            });
        }
        if y.len() != self.n_rows {
            return Err(Error::Dimension {
                expected: self.n_rows,
                got: y.len(),
            });
        }
        y.par_iter_mut().with_min_len(2048).enumerate().for_each(|(r, out)| {
            *out = self.row_dot(r, x);
        });
        Ok(())
    }

    #[inline]
    pub fn row_dot(&self, r: usize, x: &[C64]) -> C64 {
        let (cols, vals) = self.row(r);
        let mut acc = C64::new(0.0, 0.0);
        for (c, v) in cols.iter().zip(vals) {
            acc += v * x[*c];
        }
        acc
    }

    /// Dense copy, row-major. Only for small matrices.
    pub fn to_dense(&self) -> Vec<Vec<C64>> {
        let mut d = vec![vec![C64::new(0.0, 0.0); self.n_cols]; self.n_rows];
        for (r, row) in d.iter_mut().enumerate() {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                row[*c] = *v;
            }
        }
        d
    }

    /// Writes the matrix in MatrixMarket coordinate format (complex general).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "{} {} {}", self.n_rows, self.n_cols, self.nnz())?;
        for r in 0..self.n_rows {
            let (cols, vals) = self.row(r);
            for (c, v) in cols.iter().zip(vals) {
                writeln!(w, "{} {} {:e} {:e}", r + 1, c + 1, v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// `y = A x` for a field.
pub fn matvec(a: &CsrMatrixC, x: &FieldC) -> Result<FieldC> {
    let mut y = vec![C64::new(0.0, 0.0); a.n_rows];
    a.matvec_into(&x.values, &mut y)?;
    Ok(FieldC {
        space: x.space,
        values: y,
    })
}

/// Boundary treatment of one face of an assembly region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceKind {
    Dirichlet,
    Impedance,
}

impl From<FaceBc> for FaceKind {
    fn from(bc: FaceBc) -> Self {
        match bc {
            FaceBc::GlobalBoundary | FaceBc::Dirichlet => FaceKind::Dirichlet,
            FaceBc::Impedance => FaceKind::Impedance,
        }
    }
}

/// Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    Gauss2,
    Gauss3,
}

impl Quadrature {
    pub fn rule(&self) -> &'static [(f64, f64)] {
        const G2: [(f64, f64); 2] = [(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)];
        const G3: [(f64, f64); 3] = [
            (0.112_701_665_379_258_3, 5.0 / 18.0),
            (0.5, 8.0 / 18.0),
            (0.887_298_334_620_741_7, 5.0 / 18.0),
        ];
        match self {
            Quadrature::Gauss2 => &G2,
            Quadrature::Gauss3 => &G3,
        }
    }
}

/// A rectangular assembly region of a grid: a cell box, its face treatment
/// and the PML coefficients that apply on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub cells: [CellRange; 2],
    /// Indexed `[dimension][LOWER | UPPER]`.
    pub faces: [[FaceKind; 2]; 2],
    pub coeffs: PmlCoeffs,
    pub h: f64,
    pub origin: [f64; 2],
}

impl Region {
    /// Validates that every ramp start of `coeffs` sits on a node of the box.
    pub fn new(grid: &GlobalGrid, cells: [CellRange; 2], faces: [[FaceKind; 2]; 2], coeffs: PmlCoeffs) -> Result<Self> {
        for d in 0..2 {
            if cells[d].is_empty() || cells[d].end > grid.n_cells[d] {
                return Err(Error::Layout(format!("region box {:?} outside the grid", cells[d])));
            }
            let s = &coeffs.scalings[d];
            for start in [s.lower_start, s.upper_start].into_iter().flatten() {
                let pos = (start - grid.origin[d]) / grid.h;
                if (pos - pos.round()).abs() > 1e-6 {
                    return Err(Error::config(
                        "coeffs",
                        format!("ramp start {start} does not lie on a grid node"),
                    ));
                }
            }
        }
        let region = Self {
            cells,
            faces,
            coeffs,
            h: grid.h,
            origin: grid.origin,
        };
        if region.free_space().is_empty() {
            return Err(Error::Layout("region has no free nodes".into()));
        }
        Ok(region)
    }

    /// The whole grid with homogeneous Dirichlet closure.
    pub fn global(grid: &GlobalGrid, coeffs: PmlCoeffs) -> Result<Self> {
        Self::new(
            grid,
            [grid.full_range(0), grid.full_range(1)],
            [[FaceKind::Dirichlet; 2]; 2],
            coeffs,
        )
    }

    /// The full box of a subdomain with its local scaling.
    pub fn subdomain(grid: &GlobalGrid, global: &PmlCoeffs, sub: &Subdomain) -> Result<Self> {
        let faces = [
            [sub.face_bc[0][LOWER].into(), sub.face_bc[0][UPPER].into()],
            [sub.face_bc[1][LOWER].into(), sub.face_bc[1][UPPER].into()],
        ];
        Self::new(grid, sub.full_box, faces, PmlCoeffs::subdomain(grid, global, sub))
    }

    pub fn coord(&self, d: usize, node: usize) -> f64 {
        self.origin[d] + node as f64 * self.h
    }

    /// First and last free node along `d`.
    pub fn free_range(&self, d: usize) -> (usize, usize) {
        let lo = match self.faces[d][LOWER] {
            FaceKind::Dirichlet => self.cells[d].start + 1,
            FaceKind::Impedance => self.cells[d].start,
        };
        let hi = match self.faces[d][UPPER] {
            FaceKind::Dirichlet => self.cells[d].end.saturating_sub(1),
            FaceKind::Impedance => self.cells[d].end,
        };
        (lo, hi)
    }

    pub fn free_space(&self) -> FreeSpace {
        let (x0, x1) = self.free_range(0);
        let (y0, y1) = self.free_range(1);
        FreeSpace::new([x0, y0], [x1, y1])
    }
}

/// Local element matrix indexed `[test][trial]` with corners ordered
/// `(0,0), (1,0), (1,1), (0,1)`.
pub type ElementMatrix = [[C64; 4]; 4];

const CORNERS: [(usize, usize); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

/// Element matrix of cell `(cx, cy)` for the volume terms.
pub fn element_matrix(region: &Region, cx: usize, cy: usize, k: f64, quad: Quadrature) -> ElementMatrix {
    let h = region.h;
    let x0 = region.coord(0, cx);
    let y0 = region.coord(1, cy);
    let rule = quad.rule();
    let k2 = k * k;
    let mut e = [[C64::new(0.0, 0.0); 4]; 4];
    for &(xi, wx) in rule {
        let (d0, b0) = region.coeffs.scalings[0].coeff(x0 + xi * h);
        for &(eta, wy) in rule {
            let (d1, b1) = region.coeffs.scalings[1].coeff(y0 + eta * h);
            let w = wx * wy * h * h;
            let phi = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), xi * eta, (1.0 - xi) * eta];
            let dx = [-(1.0 - eta) / h, (1.0 - eta) / h, eta / h, -eta / h];
            let dy = [-(1.0 - xi) / h, -xi / h, xi / h, (1.0 - xi) / h];
            for a in 0..4 {
                for b in 0..4 {
                    let v = d0 * (dx[b] * dx[a]) + d1 * (dy[b] * dy[a])
                        - (b0 * dx[b] + b1 * dy[b]) * phi[a]
                        - C64::new(k2 * phi[b] * phi[a], 0.0);
                    e[a][b] += v * w;
                }
            }
        }
    }
    e
}

/// Edge matrix `−ik ∫ φ_b φ_a` along one cell edge of length `h`.
fn impedance_edge(h: f64, k: f64, quad: Quadrature) -> [[C64; 2]; 2] {
    let mut m = [[0.0; 2]; 2];
    for &(t, w) in quad.rule() {
        let phi = [1.0 - t, t];
        for a in 0..2 {
            for b in 0..2 {
                m[a][b] += w * h * phi[a] * phi[b];
            }
        }
    }
    let s = C64::new(0.0, -k);
    [[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]]
}

/// Assembles the operator of `region` as a CSR matrix over its free nodes.
pub fn assemble_operator(region: &Region, k: f64, quad: Quadrature) -> CsrMatrixC {
    let space = region.free_space();
    let [cx0, cy0] = [region.cells[0].start, region.cells[1].start];
    let [cx1, cy1] = [region.cells[0].end, region.cells[1].end];
    let edge = impedance_edge(region.h, k, quad);
    let (fx0, fx1) = region.free_range(0);
    let (fy0, fy1) = region.free_range(1);

    let element_row =
        |cy: usize| -> Vec<ElementMatrix> { (cx0..cx1).map(|cx| element_matrix(region, cx, cy, k, quad)).collect() };

    const CHUNK: usize = 32;
    let rows: Vec<usize> = (fy0..=fy1).collect();
    let chunks: Vec<(Vec<usize>, Vec<usize>, Vec<C64>)> = rows
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut counts = Vec::with_capacity(chunk.len() * space.n[0]);
            let mut cols = Vec::with_capacity(chunk.len() * space.n[0] * 9);
            let mut vals = Vec::with_capacity(chunk.len() * space.n[0] * 9);
            let mut below: Option<Vec<ElementMatrix>> = None;
            for &iy in chunk {
                let lower = match below.take() {
                    Some(row) => Some(row),
                    None if iy > cy0 => Some(element_row(iy - 1)),
                    None => None,
                };
                let upper = (iy < cy1).then(|| element_row(iy));
                for ix in fx0..=fx1 {
                    let mut stencil = [[C64::new(0.0, 0.0); 3]; 3];
                    for (cy, elems) in [(iy.wrapping_sub(1), &lower), (iy, &upper)] {
                        let Some(elems) = elems else { continue };
                        for cx in [ix.wrapping_sub(1), ix] {
                            if cx < cx0 || cx >= cx1 {
                                continue;
                            }
                            let e = &elems[cx - cx0];
                            let a = corner_of(ix - cx, iy - cy);
                            for (b, &(bx, by)) in CORNERS.iter().enumerate() {
                                let sx = cx + bx + 1 - ix;
                                let sy = cy + by + 1 - iy;
                                stencil[sy][sx] += e[a][b];
                            }
                        }
                    }
                    add_impedance(region, ix, iy, &edge, &mut stencil);
                    let mut n = 0;
                    for (sy, srow) in stencil.iter().enumerate() {
                        let jy = iy + sy;
                        if jy < 1 + fy0 || jy > fy1 + 1 {
                            continue;
                        }
                        for (sx, v) in srow.iter().enumerate() {
                            let jx = ix + sx;
                            if jx < 1 + fx0 || jx > fx1 + 1 {
                                continue;
                            }
                            cols.push(space.index(jx - 1, jy - 1).unwrap());
                            vals.push(*v);
                            n += 1;
                        }
                    }
                    counts.push(n);
                }
                below = upper;
            }
            (counts, cols, vals)
        })
        .collect();

    let n = space.len();
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let nnz: usize = chunks.iter().map(|c| c.1.len()).sum();
    let mut col_indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for (counts, cols, vals) in chunks {
        for c in counts {
            row_offsets.push(row_offsets.last().unwrap() + c);
        }
        col_indices.extend(cols);
        values.extend(vals);
    }
    CsrMatrixC {
        n_rows: n,
        n_cols: n,
        row_offsets,
        col_indices,
        values,
    }
}

fn corner_of(dx: usize, dy: usize) -> usize {
    match (dx, dy) {
        (0, 0) => 0,
        (1, 0) => 1,
        (1, 1) => 2,
        (0, 1) => 3,
        _ => unreachable!("node is not a corner of the cell"),
    }
}

/// Adds the impedance edge contributions touching node `(ix, iy)`.
fn add_impedance(region: &Region, ix: usize, iy: usize, edge: &[[C64; 2]; 2], stencil: &mut [[C64; 3]; 3]) {
    for d in 0..2 {
        let (along, across) = if d == 0 { (iy, ix) } else { (ix, iy) };
        let o = 1 - d;
        for side in [LOWER, UPPER] {
            let face_node = if side == LOWER {
                region.cells[d].start
            } else {
                region.cells[d].end
            };
            if region.faces[d][side] != FaceKind::Impedance || across != face_node {
                continue;
            }
            // Edges of the face on both sides of the node.
            for ec in [along.wrapping_sub(1), along] {
                if ec < region.cells[o].start || ec >= region.cells[o].end {
                    continue;
                }
                let a = along - ec;
                for b in 0..2 {
                    let off = ec + b + 1 - along;
                    let (sx, sy) = if d == 0 { (1, off) } else { (off, 1) };
                    stencil[sy][sx] += edge[a][b];
                }
            }
        }
    }
}

/// Load vector `b_p = ∫ f φ_p` over the free nodes of the global grid.
pub fn assemble_load<F>(grid: &GlobalGrid, f: F, quad: Quadrature) -> FieldC
where
    F: Fn([f64; 2]) -> C64,
{
    let space = grid.free_space();
    let mut b = FieldC::zeros(space);
    let h = grid.h;
    let rule = quad.rule();
    for cy in 0..grid.n_cells[1] {
        for cx in 0..grid.n_cells[0] {
            let x0 = grid.coord(0, cx);
            let y0 = grid.coord(1, cy);
            let mut local = [C64::new(0.0, 0.0); 4];
            for &(xi, wx) in rule {
                for &(eta, wy) in rule {
                    let fv = f([x0 + xi * h, y0 + eta * h]) * (wx * wy * h * h);
                    let phi = [(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), xi * eta, (1.0 - xi) * eta];
                    for a in 0..4 {
                        local[a] += fv * phi[a];
                    }
                }
            }
            for (a, &(dx, dy)) in CORNERS.iter().enumerate() {
                if let Some(i) = space.index(cx + dx, cy + dy) {
                    b.values[i] += local[a];
                }
            }
        }
    }
    b
}

/// Smoothed point source `(16k²/π³) exp(−16k² |x − x_c|² / π²)`.
pub fn source_density(k: f64, x_c: [f64; 2]) -> impl Fn([f64; 2]) -> C64 {
    use std::f64::consts::PI;
    let amp = 16.0 * k * k / PI.powi(3);
    let rate = 16.0 * k * k / (PI * PI);
    move |x| {
        let r2 = (x[0] - x_c[0]).powi(2) + (x[1] - x_c[1]).powi(2);
        C64::new(amp * (-rate * r2).exp(), 0.0)
    }
}

/// Load vector of the smoothed point source centred at `x_c`.
pub fn assemble_source(grid: &GlobalGrid, k: f64, x_c: [f64; 2]) -> Result<FieldC> {
    for d in 0..2 {
        let (a, b) = grid.interior_bounds(d);
        if !(x_c[d] > a && x_c[d] < b) {
            return Err(Error::config("x_c", "source centre must lie inside the physical box"));
        }
    }
    Ok(assemble_load(grid, source_density(k, x_c), Quadrature::Gauss2))
}

/// Complex tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiag {
    pub sub: Vec<C64>,
    pub diag: Vec<C64>,
    pub sup: Vec<C64>,
}

impl Tridiag {
    pub fn zeros(n: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        Self {
            sub: vec![z; n.saturating_sub(1)],
            diag: vec![z; n],
            sup: vec![z; n.saturating_sub(1)],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i == j {
            self.diag[i]
        } else if j + 1 == i {
            self.sub[j]
        } else if i + 1 == j {
            self.sup[i]
        } else {
            C64::new(0.0, 0.0)
        }
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: C64, other: &Tridiag, b: C64) -> Tridiag {
        let lin = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
        Tridiag {
            sub: lin(&self.sub, &other.sub),
            diag: lin(&self.diag, &other.diag),
            sup: lin(&self.sup, &other.sup),
        }
    }

    /// `y = T x` for a strided vector view.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.sup[i] * x[i + 1];
            }
            y[i] = v;
        }
    }
}

/// One-dimensional finite element matrices along one direction of a region.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator1D {
    /// `∫ D φ_q' φ_p'`
    pub stiffness: Tridiag,
    /// `∫ β φ_q' φ_p`
    pub convection: Tridiag,
    /// `∫ φ_q φ_p`
    pub mass: Tridiag,
    /// Unit entries at impedance end nodes.
    pub boundary: Tridiag,
}

impl Operator1D {
    /// Assembles the 1D matrices over the free nodes `free.0..=free.1` of the
    /// cell range `cells`.
    pub fn assemble(
        cells: CellRange,
        free: (usize, usize),
        faces: [FaceKind; 2],
        scaling: &Scaling1D,
        h: f64,
        origin: f64,
        quad: Quadrature,
    ) -> Self {
        let n = free.1 + 1 - free.0;
        let mut stiffness = Tridiag::zeros(n);
        let mut convection = Tridiag::zeros(n);
        let mut mass = Tridiag::zeros(n);
        let mut boundary = Tridiag::zeros(n);
        let rule = quad.rule();
        for c in cells.start..cells.end {
            let x0 = origin + c as f64 * h;
            let mut ke = [[C64::new(0.0, 0.0); 2]; 2];
            let mut ce = ke;
            let mut me = ke;
            for &(t, w) in rule {
                let (dcoef, beta) = scaling.coeff(x0 + t * h);
                let phi = [1.0 - t, t];
                let dphi = [-1.0 / h, 1.0 / h];
                for a in 0..2 {
                    for b in 0..2 {
                        ke[a][b] += dcoef * (w * h * dphi[b] * dphi[a]);
                        ce[a][b] += beta * (w * h * dphi[b] * phi[a]);
                        me[a][b] += C64::new(w * h * phi[b] * phi[a], 0.0);
                    }
                }
            }
            for a in 0..2 {
                let p = c + a;
                if p < free.0 || p > free.1 {
                    continue;
                }
                for b in 0..2 {
                    let q = c + b;
                    if q < free.0 || q > free.1 {
                        continue;
                    }
                    let (i, j) = (p - free.0, q - free.0);
                    for (m, e) in [(&mut stiffness, &ke), (&mut convection, &ce), (&mut mass, &me)] {
                        let slot = if i == j {
                            &mut m.diag[i]
                        } else if i > j {
                            &mut m.sub[j]
                        } else {
                            &mut m.sup[i]
                        };
                        *slot += e[a][b];
                    }
                }
            }
        }
        if faces[0] == FaceKind::Impedance {
            boundary.diag[0] = C64::new(1.0, 0.0);
        }
        if faces[1] == FaceKind::Impedance {
            boundary.diag[n - 1] += C64::new(1.0, 0.0);
        }
        Self {
            stiffness,
            convection,
            mass,
            boundary,
        }
    }

    /// `K − C − ik B + shift · M`.
    pub fn operator(&self, k: f64, mass_shift: f64) -> Tridiag {
        let one = C64::new(1.0, 0.0);
        self.stiffness
            .combine(one, &self.convection, -one)
            .combine(one, &self.boundary, C64::new(0.0, -k))
            .combine(one, &self.mass, C64::new(mass_shift, 0.0))
    }
}

/// Operator of a region written as the Kronecker sum
/// `A = M_y ⊗ S_x + S_y ⊗ M_x` over the x-fastest free-node numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableOperator {
    pub mass: [Tridiag; 2],
    pub op: [Tridiag; 2],
}

impl SeparableOperator {
    /// Tensor-form of [`assemble_operator`] for the same region; the `k²`
    /// term is carried by the y factor.
    pub fn from_region(region: &Region, k: f64, quad: Quadrature) -> Self {
        let dims: Vec<Operator1D> = (0..2)
            .map(|d| {
                Operator1D::assemble(
                    region.cells[d],
                    region.free_range(d),
                    region.faces[d],
                    &region.coeffs.scalings[d],
                    region.h,
                    region.origin[d],
                    quad,
                )
            })
            .collect();
        Self {
            mass: [dims[0].mass.clone(), dims[1].mass.clone()],
            op: [dims[0].operator(k, 0.0), dims[1].operator(k, -k * k)],
        }
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.mass[0].len(), self.mass[1].len()]
    }

    pub fn len(&self) -> usize {
        self.dims()[0] * self.dims()[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, ix: usize, iy: usize, jx: usize, jy: usize) -> C64 {
        self.mass[1].get(iy, jy) * self.op[0].get(ix, jx) + self.op[1].get(iy, jy) * self.mass[0].get(ix, jx)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        let [nx, ny] = self.dims();
        let mut sx = vec![C64::new(0.0, 0.0); nx * ny];
        let mut mx = vec![C64::new(0.0, 0.0); nx * ny];
        for iy in 0..ny {
            let col = &x[iy * nx..(iy + 1) * nx];
            self.op[0].apply(col, &mut sx[iy * nx..(iy + 1) * nx]);
            self.mass[0].apply(col, &mut mx[iy * nx..(iy + 1) * nx]);
        }
        for iy in 0..ny {
            let out = &mut y[iy * nx..(iy + 1) * nx];
            out.fill(C64::new(0.0, 0.0));
            for jy in iy.saturating_sub(1)..(iy + 2).min(ny) {
                let my = self.mass[1].get(iy, jy);
                let sy = self.op[1].get(iy, jy);
                let (a, b) = (&sx[jy * nx..(jy + 1) * nx], &mx[jy * nx..(jy + 1) * nx]);
                for i in 0..nx {
                    out[i] += my * a[i] + sy * b[i];
                }
            }
        }
    }

    /// Explicit CSR form in the x-fastest numbering.
    pub fn to_csr(&self) -> CsrMatrixC {
        let [nx, ny] = self.dims();
        let mut triplets = Vec::with_capacity(nx * ny * 9);
        for iy in 0..ny {
            for ix in 0..nx {
                for jy in iy.saturating_sub(1)..(iy + 2).min(ny) {
                    for jx in ix.saturating_sub(1)..(ix + 2).min(nx) {
                        triplets.push((ix + nx * iy, jx + nx * jy, self.entry(ix, iy, jx, jy)));
                    }
                }
            }
        }
        CsrMatrixC::from_triplets(nx * ny, nx * ny, &triplets).expect("indices in range")
    }
}
