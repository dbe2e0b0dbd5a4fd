//! Global grid over the PML-extended rectangle and its Cartesian overlapping
//! decomposition.
//!
//! All boxes are stored as half-open cell ranges per dimension. A cell range
//! `[start, end)` covers the closed node range `start..=end`.

use std::f64::consts::PI;

use crate::assembly::BcVariant;
use crate::{Error, Result};

/// Default upper bound on the number of grid nodes a problem may allocate.
pub const DEFAULT_NODE_BUDGET: usize = 4_000_000;

/// Physical and discretization parameters of one Helmholtz problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    /// Angular frequency.
    pub k: f64,
    /// Reference frequency of the width scaling `ell(k)`.
    pub k0: f64,
    pub c_delta: f64,
    pub c_kappa: f64,
    /// Grid points per wavelength.
    pub ppw: u32,
    /// Thickness of the global PML in wavelengths.
    pub kappa_g_wavelengths: f64,
    /// PML strength: `g(t) = sigma_pml * k * t^3`.
    pub sigma_pml: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            k: 300.0,
            k0: 150.0,
            c_delta: 1.0 / 6.0,
            c_kappa: 3.0 / 8.0,
            ppw: 12,
            kappa_g_wavelengths: 3.0,
            sigma_pml: 10.0,
        }
    }
}

impl ProblemParams {
    /// Checks the parameter invariants. `k > k0` is only required where the
    /// width formula is evaluated (see [`widths_from_k`]).
    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::config("k", "must be positive and finite"));
        }
        if !(self.k0.is_finite() && self.k0 > 0.0) {
            return Err(Error::config("k0", "must be positive and finite"));
        }
        if self.ppw < 4 {
            return Err(Error::config("ppw", "must be at least 4"));
        }
        if !(self.c_delta.is_finite() && self.c_delta > 0.0) {
            return Err(Error::config("c_delta", "must be positive"));
        }
        if !(self.c_kappa.is_finite() && self.c_kappa > 0.0) {
            return Err(Error::config("c_kappa", "must be positive"));
        }
        if !(self.kappa_g_wavelengths.is_finite() && self.kappa_g_wavelengths >= 0.0) {
            return Err(Error::config("kappa_g", "must be nonnegative"));
        }
        if !(self.sigma_pml.is_finite() && self.sigma_pml >= 0.0) {
            return Err(Error::config("sigma_pml", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }

    /// Mesh size `h = wavelength / ppw`.
    pub fn h(&self) -> f64 {
        self.wavelength() / self.ppw as f64
    }

    /// Cubic ramp coefficient `sigma_pml * k`.
    pub fn sigma(&self) -> f64 {
        self.sigma_pml * self.k
    }
}

/// Logarithmic width factor `(k / (k - k0)) * log2(k / k0)`.
pub fn ell(k: f64, k0: f64) -> Result<f64> {
    if !(k0 > 0.0 && k > k0 && k.is_finite()) {
        return Err(Error::Domain(format!(
            "ell(k) requires k > k0 > 0 (k = {k}, k0 = {k0})"
        )));
    }
    Ok(k / (k - k0) * (k / k0).log2())
}

/// Number of cells in a layer of width `c * ell(k)` wavelengths at `ppw`
/// points per wavelength, rounded down with a minimum of one cell.
fn cells_for(c: f64, ppw: u32, ell: f64) -> usize {
    // The guard absorbs products like 6 * 8/3 landing just below an integer.
    let raw = ppw as f64 * c * ell;
    ((raw + 1e-9).floor() as usize).max(1)
}

/// Overlap and subdomain PML widths in cells, `(n_ovlp, n_pml)`.
pub fn widths_from_k(params: &ProblemParams) -> Result<(usize, usize)> {
    params.validate()?;
    let l = ell(params.k, params.k0)?;
    Ok((
        cells_for(params.c_delta, params.ppw, l),
        cells_for(params.c_kappa, params.ppw, l),
    ))
}

/// Half-open range of cell indices along one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CellRange {
    pub start: usize,
    pub end: usize,
}

impl CellRange {
    pub const fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains_cell(&self, c: usize) -> bool {
        self.start <= c && c < self.end
    }

    /// Whether the closed node range `start..=end` contains `node`.
    pub fn contains_node(&self, node: usize) -> bool {
        self.start <= node && node <= self.end
    }

    pub fn contains_range(&self, other: &CellRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// Number of cells shared with `other`.
    pub fn overlap_cells(&self, other: &CellRange) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }
}

/// Uniform tensor grid over the PML-extended domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalGrid {
    pub h: f64,
    pub n_cells: [usize; 2],
    pub origin: [f64; 2],
    /// Cell box of the physical region (where the source lives).
    pub interior: [CellRange; 2],
    /// Global PML thickness in cells per side.
    pub n_pml_g: usize,
}

impl GlobalGrid {
    /// Grid with `n_interior` physical cells per dimension surrounded by
    /// `n_pml_g` PML cells per side; the physical box starts at the origin.
    pub fn uniform(n_interior: [usize; 2], h: f64, n_pml_g: usize) -> Self {
        let n_cells = [n_interior[0] + 2 * n_pml_g, n_interior[1] + 2 * n_pml_g];
        let shift = -(n_pml_g as f64) * h;
        Self {
            h,
            n_cells,
            origin: [shift, shift],
            interior: [
                CellRange::new(n_pml_g, n_pml_g + n_interior[0]),
                CellRange::new(n_pml_g, n_pml_g + n_interior[1]),
            ],
            n_pml_g,
        }
    }

    pub fn n_nodes(&self, d: usize) -> usize {
        self.n_cells[d] + 1
    }

    pub fn total_nodes(&self) -> usize {
        self.n_nodes(0) * self.n_nodes(1)
    }

    /// Coordinate of node `i` along dimension `d`.
    pub fn coord(&self, d: usize, i: usize) -> f64 {
        self.origin[d] + i as f64 * self.h
    }

    /// Coordinates of the physical box edges `(a, b)` along `d`.
    pub fn interior_bounds(&self, d: usize) -> (f64, f64) {
        (
            self.coord(d, self.interior[d].start),
            self.coord(d, self.interior[d].end),
        )
    }

    pub fn full_range(&self, d: usize) -> CellRange {
        CellRange::new(0, self.n_cells[d])
    }

    /// Free (non-Dirichlet) nodes of the global problem.
    pub fn free_space(&self) -> crate::assembly::FreeSpace {
        crate::assembly::FreeSpace::new([1, 1], [self.n_cells[0] - 1, self.n_cells[1] - 1])
    }
}

/// Builds the global grid: `h = wavelength / ppw`, a unit-square interior of
/// `round(1 / h)` cells and `round(kappa_g * ppw)` PML cells on each side.
pub fn build_global_grid(params: &ProblemParams, node_budget: usize) -> Result<GlobalGrid> {
    params.validate()?;
    let h = params.h();
    let n_int = ((1.0 / h).round() as usize).max(1);
    let n_pml_g = (params.kappa_g_wavelengths * params.ppw as f64).round() as usize;
    let grid = GlobalGrid::uniform([n_int, n_int], h, n_pml_g);
    let needed = grid.total_nodes();
    if needed > node_budget {
        return Err(Error::Capacity {
            needed,
            budget: node_budget,
        });
    }
    Ok(grid)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaceBc {
    /// Face lies on the boundary of the global domain (homogeneous Dirichlet).
    GlobalBoundary,
    Dirichlet,
    Impedance,
}

pub const LOWER: usize = 0;
pub const UPPER: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdomain {
    pub id: usize,
    pub cart: [usize; 2],
    pub novlp: [CellRange; 2],
    pub int_box: [CellRange; 2],
    pub full_box: [CellRange; 2],
    /// Indexed `[dimension][LOWER | UPPER]`.
    pub face_bc: [[FaceBc; 2]; 2],
    pub pml_cells: [[usize; 2]; 2],
}

impl Subdomain {
    pub fn is_interior_face(&self, d: usize, side: usize) -> bool {
        self.face_bc[d][side] != FaceBc::GlobalBoundary
    }

    /// Number of nodes in the closed full box.
    pub fn full_nodes(&self) -> usize {
        (self.full_box[0].len() + 1) * (self.full_box[1].len() + 1)
    }
}

/// Overlapping Cartesian decomposition of a [`GlobalGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainLayout {
    pub nsub: [usize; 2],
    pub n_ovlp: usize,
    pub n_pml: usize,
    pub bc: BcVariant,
    pub n_cells: [usize; 2],
    /// Block boundaries of the non-overlapping partition, `nsub[d] + 1`
    /// entries per dimension.
    pub cuts: [Vec<usize>; 2],
    pub subdomains: Vec<Subdomain>,
    /// Subdomains whose full box reaches nodes owned by another subdomain.
    pub neighbors: Vec<Vec<usize>>,
}

impl SubdomainLayout {
    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    pub fn id_of(&self, cart: [usize; 2]) -> usize {
        cart[0] + self.nsub[0] * cart[1]
    }

    /// Block that owns node `node` along dimension `d`. Node ownership follows
    /// the cell to its upper side; the last node belongs to the last block.
    pub fn owner_block(&self, d: usize, node: usize) -> usize {
        let cuts = &self.cuts[d];
        let n = self.nsub[d];
        // cuts is sorted; find the block whose cell range holds `node`.
        match cuts[1..n].binary_search(&node) {
            Ok(i) => i + 1,
            Err(i) => i,
        }
    }

    /// Subdomain that owns the global node `(ix, iy)`.
    pub fn owner(&self, ix: usize, iy: usize) -> usize {
        self.id_of([self.owner_block(0, ix), self.owner_block(1, iy)])
    }

    /// Closed node range owned by block `b` along `d`.
    pub fn owned_nodes(&self, d: usize, b: usize) -> (usize, usize) {
        let lo = self.cuts[d][b];
        let hi = if b + 1 == self.nsub[d] {
            self.cuts[d][b + 1]
        } else {
            self.cuts[d][b + 1] - 1
        };
        (lo, hi)
    }
}

/// Splits `n` cells into `parts` blocks as evenly as possible; the first
/// `n % parts` blocks get one extra cell.
pub fn split_even(n: usize, parts: usize) -> Vec<usize> {
    let base = n / parts;
    let rem = n % parts;
    let mut cuts = Vec::with_capacity(parts + 1);
    cuts.push(0);
    let mut acc = 0;
    for b in 0..parts {
        acc += base + usize::from(b < rem);
        cuts.push(acc);
    }
    cuts
}

/// Builds the overlapping decomposition with `n_ovlp` overlap cells between
/// adjacent blocks and `n_pml` extra PML cells on every interior face.
///
/// The lower block of each adjacent pair is extended by `ceil(n_ovlp / 2)`
/// cells and the upper block by `floor(n_ovlp / 2)`.
pub fn decompose(
    grid: &GlobalGrid,
    nsub: [usize; 2],
    n_ovlp: usize,
    n_pml: usize,
    bc: BcVariant,
) -> Result<SubdomainLayout> {
    if bc == BcVariant::ImpedanceOnly && n_pml > 0 {
        return Err(Error::config(
            "n_pml",
            "the impedance-only variant uses no subdomain PML (n_pml must be 0)",
        ));
    }
    let mut cuts: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for d in 0..2 {
        let n = grid.n_cells[d];
        if nsub[d] == 0 || nsub[d] > n {
            return Err(Error::Layout(format!("nsub[{d}] = {} must lie in 1..={n}", nsub[d])));
        }
        cuts[d] = split_even(n, nsub[d]);
        if nsub[d] > 1 {
            if n_ovlp == 0 {
                return Err(Error::Layout("overlap must be at least one cell".into()));
            }
            let smallest = cuts[d].windows(2).map(|w| w[1] - w[0]).min().unwrap_or(0);
            if smallest <= n_ovlp {
                return Err(Error::Layout(format!(
                    "overlap of {n_ovlp} cells does not fit blocks of {smallest} cells along dimension {d}"
                )));
            }
        }
    }

    let up_ext = n_ovlp.div_ceil(2);
    let down_ext = n_ovlp / 2;
    let interior_tag = match bc {
        BcVariant::PmlDirichlet => FaceBc::Dirichlet,
        BcVariant::PmlImpedance | BcVariant::ImpedanceOnly => FaceBc::Impedance,
    };

    let mut subdomains = Vec::with_capacity(nsub[0] * nsub[1]);
    for jy in 0..nsub[1] {
        for jx in 0..nsub[0] {
            let cart = [jx, jy];
            let mut novlp = [CellRange::new(0, 0); 2];
            let mut int_box = novlp;
            let mut full_box = novlp;
            let mut face_bc = [[FaceBc::GlobalBoundary; 2]; 2];
            let mut pml_cells = [[0usize; 2]; 2];
            for d in 0..2 {
                let b = cart[d];
                let n = grid.n_cells[d];
                let lo = cuts[d][b];
                let hi = cuts[d][b + 1];
                novlp[d] = CellRange::new(lo, hi);
                let (mut ilo, mut ihi) = (lo, hi);
                let (mut flo, mut fhi) = (lo, hi);
                if b > 0 {
                    ilo = lo - down_ext;
                    face_bc[d][LOWER] = interior_tag;
                    pml_cells[d][LOWER] = n_pml;
                    flo = ilo.checked_sub(n_pml).ok_or_else(|| {
                        Error::Layout(format!(
                            "subdomain {cart:?}: PML extension leaves the grid along dimension {d}"
                        ))
                    })?;
                }
                if b + 1 < nsub[d] {
                    ihi = hi + up_ext;
                    face_bc[d][UPPER] = interior_tag;
                    pml_cells[d][UPPER] = n_pml;
                    fhi = ihi + n_pml;
                    if fhi > n {
                        return Err(Error::Layout(format!(
                            "subdomain {cart:?}: PML extension leaves the grid along dimension {d}"
                        )));
                    }
                }
                int_box[d] = CellRange::new(ilo, ihi);
                full_box[d] = CellRange::new(flo, fhi);
            }
            subdomains.push(Subdomain {
                id: subdomains.len(),
                cart,
                novlp,
                int_box,
                full_box,
                face_bc,
                pml_cells,
            });
        }
    }

    let mut layout = SubdomainLayout {
        nsub,
        n_ovlp,
        n_pml,
        bc,
        n_cells: grid.n_cells,
        cuts,
        subdomains,
        neighbors: Vec::new(),
    };
    layout.neighbors = layout
        .subdomains
        .iter()
        .map(|s| {
            layout
                .subdomains
                .iter()
                .filter(|o| o.id != s.id)
                .filter(|o| {
                    (0..2).all(|d| {
                        let (olo, ohi) = layout.owned_nodes(d, o.cart[d]);
                        olo <= s.full_box[d].end && s.full_box[d].start <= ohi
                    })
                })
                .map(|o| o.id)
                .collect()
        })
        .collect();
    Ok(layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(k: f64) -> ProblemParams {
        ProblemParams {
            k,
            ..Default::default()
        }
    }

    #[test]
    fn ell_values() {
        assert_eq!(ell(300.0, 150.0).unwrap(), 2.0);
        for k0 in [1.0, 7.5, 150.0, 1234.0] {
            assert!((ell(2.0 * k0, k0).unwrap() - 2.0).abs() < 1e-15);
        }
        let expected = 1200.0 / 1050.0 * 3.0;
        assert!((ell(1200.0, 150.0).unwrap() - expected).abs() < 1e-14);
        assert!((ell(1200.0, 150.0).unwrap() - 3.428_571_428_571).abs() < 1e-9);
        assert!(ell(150.0, 150.0).is_err());
        assert!(ell(100.0, 150.0).is_err());
    }

    #[test]
    fn widths_match_table_integers() {
        assert_eq!(widths_from_k(&params(300.0)).unwrap().0, 4);
        assert_eq!(widths_from_k(&params(9600.0)).unwrap().0, 12);
        let half = ProblemParams {
            k: 600.0,
            c_kappa: 0.5,
            ..Default::default()
        };
        assert_eq!(widths_from_k(&half).unwrap().1, 16);
        // Overlap column of the boundary-condition comparison.
        let ovlp: Vec<usize> = [300.0, 600.0, 1200.0, 2400.0, 4800.0, 9600.0]
            .iter()
            .map(|&k| widths_from_k(&params(k)).unwrap().0)
            .collect();
        assert_eq!(ovlp, vec![4, 5, 6, 8, 10, 12]);
    }

    #[test]
    fn widths_are_monotone_in_k() {
        let mut prev = (0, 0);
        let mut k = 300.0;
        while k < 20000.0 {
            let w = widths_from_k(&params(k)).unwrap();
            assert!(w.0 >= prev.0 && w.1 >= prev.1, "k = {k}");
            prev = w;
            k *= 1.01;
        }
    }

    #[test]
    fn global_grid_k300() {
        let g = build_global_grid(&params(300.0), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(g.n_pml_g, 36);
        assert_eq!(g.interior[0].len(), 573);
        assert_eq!(g.n_cells, [645, 645]);
        assert_eq!(g.interior[0], CellRange::new(36, 609));
        assert!(g.coord(0, 36).abs() < 1e-15);
    }

    #[test]
    fn global_grid_without_pml_and_h_definition() {
        let p = ProblemParams {
            kappa_g_wavelengths: 0.0,
            ..params(300.0)
        };
        let g = build_global_grid(&p, DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(g.interior[0], g.full_range(0));
        assert_eq!(g.interior[1], g.full_range(1));

        let g600 = build_global_grid(&params(600.0), DEFAULT_NODE_BUDGET).unwrap();
        assert_eq!(g600.h, 2.0 * PI / 600.0 / 12.0);
        assert!((g600.h - 2.0 * PI / 7200.0).abs() < 1e-18);
    }

    #[test]
    fn global_grid_budget() {
        let err = build_global_grid(&params(300.0), 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { needed: 417_316, .. }));
    }

    #[test]
    fn single_subdomain_is_whole_grid() {
        let g = GlobalGrid::uniform([20, 20], 0.05, 3);
        let l = decompose(&g, [1, 1], 7, 5, BcVariant::PmlImpedance).unwrap();
        assert_eq!(l.len(), 1);
        let s = &l.subdomains[0];
        assert_eq!(s.full_box, [g.full_range(0), g.full_range(1)]);
        assert_eq!(s.int_box, s.full_box);
        assert_eq!(s.novlp, s.full_box);
        assert!(s.face_bc.iter().flatten().all(|&f| f == FaceBc::GlobalBoundary));
        assert!(l.neighbors[0].is_empty());
    }

    #[test]
    fn two_by_two_k300() {
        let g = build_global_grid(&params(300.0), DEFAULT_NODE_BUDGET).unwrap();
        let l = decompose(&g, [2, 2], 4, 8, BcVariant::PmlImpedance).unwrap();
        assert_eq!(l.len(), 4);
        for s in &l.subdomains {
            let interior: Vec<(usize, usize)> = (0..2)
                .flat_map(|d| (0..2).map(move |side| (d, side)))
                .filter(|&(d, side)| s.is_interior_face(d, side))
                .collect();
            assert_eq!(interior.len(), 2);
            for (d, side) in interior {
                assert_eq!(s.pml_cells[d][side], 8);
                assert_eq!(s.face_bc[d][side], FaceBc::Impedance);
            }
            assert_eq!(s.full_box[0].len(), s.int_box[0].len() + 8);
        }
    }

    #[test]
    fn hand_computed_overlap_split() {
        let g = GlobalGrid::uniform([10, 10], 0.1, 0);
        let l = decompose(&g, [2, 1], 4, 0, BcVariant::PmlDirichlet).unwrap();
        let left = &l.subdomains[0];
        let right = &l.subdomains[1];
        // Cells 0..=6 and 3..=9.
        assert_eq!(left.int_box[0], CellRange::new(0, 7));
        assert_eq!(right.int_box[0], CellRange::new(3, 10));
        assert_eq!(left.int_box[0].overlap_cells(&right.int_box[0]), 4);
    }

    #[test]
    fn odd_overlap_gives_lower_block_the_ceiling() {
        let g = GlobalGrid::uniform([20, 4], 0.05, 0);
        let l = decompose(&g, [2, 1], 5, 2, BcVariant::PmlDirichlet).unwrap();
        assert_eq!(l.subdomains[0].int_box[0], CellRange::new(0, 13));
        assert_eq!(l.subdomains[1].int_box[0], CellRange::new(8, 20));
        assert_eq!(l.subdomains[0].full_box[0], CellRange::new(0, 15));
        assert_eq!(l.subdomains[1].full_box[0], CellRange::new(6, 20));
    }

    #[test]
    fn layout_errors() {
        let g = GlobalGrid::uniform([12, 12], 0.1, 0);
        // Overlap larger than a block.
        assert!(matches!(
            decompose(&g, [3, 1], 4, 0, BcVariant::PmlImpedance),
            Err(Error::Layout(_))
        ));
        // PML running off the grid.
        assert!(matches!(
            decompose(&g, [2, 1], 2, 6, BcVariant::PmlImpedance),
            Err(Error::Layout(_))
        ));
        assert!(matches!(
            decompose(&g, [2, 1], 2, 1, BcVariant::ImpedanceOnly),
            Err(Error::Config { .. })
        ));
        assert!(decompose(&g, [2, 1], 2, 0, BcVariant::ImpedanceOnly).is_ok());
    }

    #[test]
    fn owners_are_unique_and_follow_blocks() {
        let g = GlobalGrid::uniform([17, 11], 0.1, 0);
        let l = decompose(&g, [3, 2], 2, 1, BcVariant::PmlDirichlet).unwrap();
        for ix in 0..=g.n_cells[0] {
            for iy in 0..=g.n_cells[1] {
                let o = l.owner(ix, iy);
                let s = &l.subdomains[o];
                let (xlo, xhi) = l.owned_nodes(0, s.cart[0]);
                let (ylo, yhi) = l.owned_nodes(1, s.cart[1]);
                assert!(xlo <= ix && ix <= xhi && ylo <= iy && iy <= yhi);
            }
        }
    }

    fn layout_strategy() -> impl Strategy<Value = (usize, usize, usize, usize, usize, usize)> {
        (
            1usize..=5,
            1usize..=5,
            1usize..=6,
            0usize..=10,
            30usize..90,
            30usize..90,
        )
    }

    proptest! {
        #[test]
        fn tiling_and_overlap_exactness((nx, ny, ovlp, pml, cx, cy) in layout_strategy()) {
            let g = GlobalGrid::uniform([cx, cy], 1.0 / cx as f64, 2);
            let Ok(l) = decompose(&g, [nx, ny], ovlp, pml, BcVariant::PmlImpedance) else {
                return Ok(());
            };
            // Disjoint tiling of the global cell range.
            let mut hits = vec![0u8; g.n_cells[0] * g.n_cells[1]];
            for s in &l.subdomains {
                for cy in s.novlp[1].start..s.novlp[1].end {
                    for cx in s.novlp[0].start..s.novlp[0].end {
                        hits[cx + g.n_cells[0] * cy] += 1;
                    }
                }
                for d in 0..2 {
                    prop_assert!(s.full_box[d].contains_range(&s.int_box[d]));
                    prop_assert!(s.int_box[d].contains_range(&s.novlp[d]));
                    prop_assert!(g.full_range(d).contains_range(&s.full_box[d]));
                    for side in 0..2 {
                        if s.face_bc[d][side] == FaceBc::GlobalBoundary {
                            prop_assert_eq!(s.pml_cells[d][side], 0);
                        }
                    }
                }
            }
            prop_assert!(hits.iter().all(|&h| h == 1));

            // Adjacent pairs overlap by exactly n_ovlp cells.
            for s in &l.subdomains {
                for d in 0..2 {
                    if s.cart[d] + 1 < l.nsub[d] {
                        let mut c = s.cart;
                        c[d] += 1;
                        let o = &l.subdomains[l.id_of(c)];
                        prop_assert_eq!(s.int_box[d].overlap_cells(&o.int_box[d]), ovlp);
                    }
                }
            }

            // At most four int boxes cover any cell.
            let mut cover = vec![0u8; g.n_cells[0] * g.n_cells[1]];
            for s in &l.subdomains {
                for cy in s.int_box[1].start..s.int_box[1].end {
                    for cx in s.int_box[0].start..s.int_box[0].end {
                        cover[cx + g.n_cells[0] * cy] += 1;
                    }
                }
            }
            prop_assert!(cover.iter().all(|&c| (1..=4).contains(&c)));

            let again = decompose(&g, [nx, ny], ovlp, pml, BcVariant::PmlImpedance).unwrap();
            prop_assert_eq!(again, l);
        }
    }
}
