//! Partition of unity built from tensor products of 1D linear ramps.

use crate::assembly::FreeSpace;
use crate::grid::SubdomainLayout;

/// Nodal weights of one subdomain over the nodes of its full box.
#[derive(Debug, Clone, PartialEq)]
pub struct SubWeights {
    /// All nodes of the full box (including closure nodes).
    pub nodes: FreeSpace,
    pub values: Vec<f64>,
}

impl SubWeights {
    /// Weight at global node `(ix, iy)`; zero outside the full box.
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.nodes.index(ix, iy).map_or(0.0, |i| self.values[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    pub weights: Vec<SubWeights>,
}

impl PartitionOfUnity {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, j: usize, ix: usize, iy: usize) -> f64 {
        self.weights[j].at(ix, iy)
    }
}

/// 1D weight of block `b` along dimension `d` at node `i`.
fn profile(layout: &SubdomainLayout, d: usize, b: usize, i: usize) -> f64 {
    let nb = layout.nsub[d];
    let block = |bb: usize| {
        let mut cart = [0, 0];
        cart[d] = bb;
        layout.subdomains[layout.id_of(cart)].int_box[d]
    };
    let own = block(b);
    if i < own.start || i > own.end {
        return 0.0;
    }
    let mut w = 1.0;
    if b > 0 {
        let (o0, o1) = (own.start, block(b - 1).end);
        if i < o1 {
            w *= (i - o0) as f64 / (o1 - o0) as f64;
        }
    }
    if b + 1 < nb {
        let (o0, o1) = (block(b + 1).start, own.end);
        if i > o0 {
            w *= (o1 - i) as f64 / (o1 - o0) as f64;
        }
    }
    w
}

/// Weights `χ_j`: products of the 1D ramps, renormalized nodewise so that
/// they sum to one at every node of the grid.
pub fn build_pou(layout: &SubdomainLayout) -> PartitionOfUnity {
    let nn = [layout.n_cells[0] + 1, layout.n_cells[1] + 1];
    let mut weights: Vec<SubWeights> = layout
        .subdomains
        .iter()
        .map(|s| {
            let lo = [s.full_box[0].start, s.full_box[1].start];
            let hi = [s.full_box[0].end, s.full_box[1].end];
            let nodes = FreeSpace::new(lo, hi);
            let px: Vec<f64> = (lo[0]..=hi[0]).map(|i| profile(layout, 0, s.cart[0], i)).collect();
            let py: Vec<f64> = (lo[1]..=hi[1]).map(|i| profile(layout, 1, s.cart[1], i)).collect();
            let mut values = Vec::with_capacity(nodes.len());
            for wy in &py {
                for wx in &px {
                    values.push(wx * wy);
                }
            }
            SubWeights { nodes, values }
        })
        .collect();

    let mut total = vec![0.0; nn[0] * nn[1]];
    for w in &weights {
        for (i, v) in w.values.iter().enumerate() {
            let (ix, iy) = w.nodes.node(i);
            total[ix + nn[0] * iy] += v;
        }
    }
    for w in &mut weights {
        for (i, v) in w.values.iter_mut().enumerate() {
            let (ix, iy) = w.nodes.node(i);
            let t = total[ix + nn[0] * iy];
            if t > 0.0 {
                *v /= t;
            }
        }
    }
    PartitionOfUnity { weights }
}
