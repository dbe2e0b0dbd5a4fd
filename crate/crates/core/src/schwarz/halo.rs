//! Node ownership, halo exchange lists and communication accounting.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use super::pou::PartitionOfUnity;
use crate::assembly::FreeSpace;
use crate::grid::SubdomainLayout;

/// Closed index box `lo..=hi` per dimension; empty when `lo > hi` anywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeBox {
    pub lo: [usize; 2],
    pub hi: [usize; 2],
}

impl NodeBox {
    pub fn of_space(s: &FreeSpace) -> Self {
        if s.is_empty() {
            return Self { lo: [1, 1], hi: [0, 0] };
        }
        Self {
            lo: s.lo,
            hi: [s.lo[0] + s.n[0] - 1, s.lo[1] + s.n[1] - 1],
        }
    }

    pub fn intersect(&self, o: &NodeBox) -> NodeBox {
        NodeBox {
            lo: [self.lo[0].max(o.lo[0]), self.lo[1].max(o.lo[1])],
            hi: [self.hi[0].min(o.hi[0]), self.hi[1].min(o.hi[1])],
        }
    }

    pub fn extent(&self, d: usize) -> usize {
        (self.hi[d] + 1).saturating_sub(self.lo[d])
    }

    pub fn count(&self) -> usize {
        self.extent(0) * self.extent(1)
    }

    pub fn contains(&self, ix: usize, iy: usize) -> bool {
        ix >= self.lo[0] && ix <= self.hi[0] && iy >= self.lo[1] && iy <= self.hi[1]
    }
}

/// Nodes where the residual can be nonzero once every subdomain has applied
/// one full correction: grid lines within one element layer of an overlap.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSupport {
    /// Sorted, disjoint closed node intervals per dimension.
    pub strips: [Vec<(usize, usize)>; 2],
    /// Global free indices in the support, ascending.
    pub rows: Vec<usize>,
}

impl ResidualSupport {
    pub fn new(layout: &SubdomainLayout, global: &FreeSpace) -> Self {
        let mut strips: [Vec<(usize, usize)>; 2] = [Vec::new(), Vec::new()];
        for d in 0..2 {
            let n_nodes = layout.n_cells[d] + 1;
            let mut raw = Vec::new();
            for b in 1..layout.nsub[d] {
                let mut lo_cart = [0, 0];
                lo_cart[d] = b - 1;
                let mut hi_cart = [0, 0];
                hi_cart[d] = b;
                let o0 = layout.subdomains[layout.id_of(hi_cart)].int_box[d].start;
                let o1 = layout.subdomains[layout.id_of(lo_cart)].int_box[d].end;
                raw.push((o0.saturating_sub(1), (o1 + 1).min(n_nodes - 1)));
            }
            raw.sort_unstable();
            for (a, b) in raw {
                match strips[d].last_mut() {
                    Some(last) if a <= last.1 + 1 => last.1 = last.1.max(b),
                    _ => strips[d].push((a, b)),
                }
            }
        }
        let mut s = Self {
            strips,
            rows: Vec::new(),
        };
        s.rows = (0..global.len())
            .filter(|&i| {
                let (ix, iy) = global.node(i);
                s.contains(ix, iy)
            })
            .collect();
        s
    }

    fn in_strips(&self, d: usize, i: usize) -> bool {
        self.strips[d].iter().any(|&(a, b)| a <= i && i <= b)
    }

    pub fn contains(&self, ix: usize, iy: usize) -> bool {
        self.in_strips(0, ix) || self.in_strips(1, iy)
    }

    fn covered(&self, d: usize, lo: usize, hi: usize) -> usize {
        self.strips[d]
            .iter()
            .map(|&(a, b)| (hi.min(b) + 1).saturating_sub(lo.max(a)))
            .sum()
    }

    /// Number of support nodes in `bx`.
    pub fn count_in_box(&self, bx: &NodeBox) -> usize {
        if bx.count() == 0 {
            return 0;
        }
        let out_x = bx.extent(0) - self.covered(0, bx.lo[0], bx.hi[0]);
        let out_y = bx.extent(1) - self.covered(1, bx.lo[1], bx.hi[1]);
        bx.count() - out_x * out_y
    }
}

/// Values exchanged with one peer: `(local index, global index)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeerList {
    pub peer: usize,
    pub entries: Vec<(usize, usize)>,
}

/// Exchange lists of one subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainHalo {
    /// Restriction-support nodes owned by this subdomain.
    pub owned: Vec<(usize, usize)>,
    /// Restriction-support nodes received from their owners.
    pub recv: Vec<PeerList>,
    /// `recv` restricted to the residual support.
    pub recv_sparse: Vec<PeerList>,
    /// Owned nodes with positive weight: corrections kept locally.
    pub keep: Vec<(usize, usize)>,
    /// Non-owned nodes with positive weight: corrections sent to the owner.
    pub send_back: Vec<PeerList>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HaloPlan {
    pub subdomains: Vec<SubdomainHalo>,
}

fn group(entries: Vec<(usize, usize, usize)>) -> Vec<PeerList> {
    let mut map: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (peer, l, g) in entries {
        map.entry(peer).or_default().push((l, g));
    }
    map.into_iter()
        .map(|(peer, entries)| PeerList { peer, entries })
        .collect()
}

impl HaloPlan {
    /// `locals[j]` is the free-node space of subdomain `j`'s local problem.
    pub fn new(
        layout: &SubdomainLayout,
        global: &FreeSpace,
        locals: &[FreeSpace],
        pou: &PartitionOfUnity,
        support: &ResidualSupport,
    ) -> Self {
        let subdomains = layout
            .subdomains
            .iter()
            .zip(locals)
            .map(|(s, local)| {
                let j = s.id;
                let mut owned = Vec::new();
                let mut keep = Vec::new();
                let mut recv = Vec::new();
                let mut recv_sparse = Vec::new();
                let mut send = Vec::new();
                for li in 0..local.len() {
                    let (ix, iy) = local.node(li);
                    let Some(gi) = global.index(ix, iy) else { continue };
                    let owner = layout.owner(ix, iy);
                    let positive = pou.weight(j, ix, iy) > 0.0;
                    if owner == j {
                        owned.push((li, gi));
                        if positive {
                            keep.push((li, gi));
                        }
                    } else {
                        recv.push((owner, li, gi));
                        if support.contains(ix, iy) {
                            recv_sparse.push((owner, li, gi));
                        }
                        if positive {
                            send.push((owner, li, gi));
                        }
                    }
                }
                SubdomainHalo {
                    owned,
                    recv: group(recv),
                    recv_sparse: group(recv_sparse),
                    keep,
                    send_back: group(send),
                }
            })
            .collect();
        Self { subdomains }
    }

    /// Values moved per apply according to the stored lists.
    pub fn planned_count(&self, sparse: bool) -> u64 {
        self.subdomains
            .iter()
            .map(|h| {
                let r = if sparse { &h.recv_sparse } else { &h.recv };
                let n: usize = r.iter().chain(&h.send_back).map(|p| p.entries.len()).sum();
                n as u64
            })
            .sum()
    }
}

/// Values per apply derived from box arithmetic only: the restriction
/// support minus the owned block, plus the positive-weight box minus the
/// owned block.
pub fn analytic_halo_count(
    layout: &SubdomainLayout,
    global: &FreeSpace,
    locals: &[FreeSpace],
    support: Option<&ResidualSupport>,
) -> u64 {
    let g = NodeBox::of_space(global);
    let count = |bx: &NodeBox| match support {
        Some(s) => s.count_in_box(bx),
        None => bx.count(),
    };
    layout
        .subdomains
        .iter()
        .zip(locals)
        .map(|(s, local)| {
            let (ox, oy) = (layout.owned_nodes(0, s.cart[0]), layout.owned_nodes(1, s.cart[1]));
            let owned = NodeBox {
                lo: [ox.0, oy.0],
                hi: [ox.1, oy.1],
            };
            let l = NodeBox::of_space(local).intersect(&g);
            let restrict = count(&l) - count(&l.intersect(&owned));
            let positive = NodeBox {
                lo: [s.int_box[0].start + 1, s.int_box[1].start + 1],
                hi: [s.int_box[0].end - 1, s.int_box[1].end - 1],
            }
            .intersect(&g);
            let extend = positive.count() - positive.intersect(&owned).count();
            (restrict + extend) as u64
        })
        .sum()
}

/// Running totals of exchanged values.
#[derive(Debug, Default)]
pub struct CommCounters {
    pub restrict_values: AtomicU64,
    pub extend_values: AtomicU64,
    pub applies: AtomicU64,
}

impl CommCounters {
    pub fn total(&self) -> u64 {
        self.restrict_values.load(Ordering::Relaxed) + self.extend_values.load(Ordering::Relaxed)
    }

    pub fn applies(&self) -> u64 {
        self.applies.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.restrict_values.store(0, Ordering::Relaxed);
        self.extend_values.store(0, Ordering::Relaxed);
        self.applies.store(0, Ordering::Relaxed);
    }
}
