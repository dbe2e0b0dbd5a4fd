//! The restricted additive Schwarz preconditioner `B⁻¹ = Σ_j R̃_jᵀ A_j⁻¹ R_j`.

use std::sync::atomic::Ordering;
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;

use super::halo::{analytic_halo_count, CommCounters, HaloPlan, ResidualSupport};
use super::pou::{build_pou, PartitionOfUnity};
use crate::assembly::{assemble_operator, CsrMatrixC, FreeSpace, Quadrature, Region};
use crate::grid::{GlobalGrid, SubdomainLayout};
use crate::linalg::{LocalFactor, LocalSolverKind};
use crate::pml::PmlCoeffs;
use crate::{Error, Result, C64};

/// Which residual entries the restriction reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Restriction {
    /// Every restriction-support node.
    Full,
    /// Only nodes of the [`ResidualSupport`]; the residual is taken as zero
    /// elsewhere.
    Sparse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasConfig {
    pub k: f64,
    pub quad: Quadrature,
    pub local_solver: LocalSolverKind,
}

impl RasConfig {
    pub fn new(k: f64) -> Self {
        Self {
            k,
            quad: Quadrature::Gauss2,
            local_solver: LocalSolverKind::default(),
        }
    }
}

/// One factored subdomain problem.
#[derive(Debug)]
pub struct LocalProblem {
    pub id: usize,
    pub region: Region,
    pub space: FreeSpace,
    pub factor: LocalFactor,
    pub factor_seconds: f64,
}

/// Accumulated timings of the local solves across applies.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ApplyStats {
    pub applies: u64,
    /// Σ over applies of Σ_j local solve time.
    pub local_sum_s: f64,
    /// Σ over applies of max_j local solve time.
    pub local_max_s: f64,
}

#[derive(Debug)]
pub struct RasOperator {
    pub layout: SubdomainLayout,
    pub global: FreeSpace,
    pub locals: Vec<LocalProblem>,
    pub pou: PartitionOfUnity,
    pub halo: HaloPlan,
    pub support: ResidualSupport,
    pub counters: CommCounters,
    pub config: RasConfig,
    stats: Mutex<ApplyStats>,
}

/// Assembles and factors every subdomain problem and builds the exchange
/// plan. Factorizations run in parallel on the current rayon pool.
pub fn build_ras(
    grid: &GlobalGrid,
    global_coeffs: &PmlCoeffs,
    layout: &SubdomainLayout,
    config: RasConfig,
) -> Result<RasOperator> {
    if layout.bc == crate::assembly::BcVariant::ImpedanceOnly && layout.n_pml > 0 {
        return Err(Error::config(
            "n_pml",
            "the impedance-only variant uses no subdomain PML",
        ));
    }
    let global = grid.free_space();
    let locals: Vec<LocalProblem> = layout
        .subdomains
        .par_iter()
        .map(|s| {
            let start = Instant::now();
            let region = Region::subdomain(grid, global_coeffs, s).map_err(|e| e.in_subdomain(s.id))?;
            let factor = LocalFactor::build(&region, config.k, config.quad, config.local_solver)
                .map_err(|e| e.in_subdomain(s.id))?;
            Ok(LocalProblem {
                id: s.id,
                space: region.free_space(),
                region,
                factor,
                factor_seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    let pou = build_pou(layout);
    let support = ResidualSupport::new(layout, &global);
    let spaces: Vec<FreeSpace> = locals.iter().map(|l| l.space).collect();
    let halo = HaloPlan::new(layout, &global, &spaces, &pou, &support);
    Ok(RasOperator {
        layout: layout.clone(),
        global,
        locals,
        pou,
        halo,
        support,
        counters: CommCounters::default(),
        config,
        stats: Mutex::new(ApplyStats::default()),
    })
}

impl RasOperator {
    pub fn len(&self) -> usize {
        self.global.len()
    }

    pub fn is_empty(&self) -> bool {
        self.global.is_empty()
    }

    pub fn n_subdomains(&self) -> usize {
        self.locals.len()
    }

    /// The local matrix `A_j` in CSR form.
    pub fn local_matrix(&self, j: usize) -> CsrMatrixC {
        assemble_operator(&self.locals[j].region, self.config.k, self.config.quad)
    }

    pub fn factor_seconds(&self) -> Vec<f64> {
        self.locals.iter().map(|l| l.factor_seconds).collect()
    }

    pub fn apply_stats(&self) -> ApplyStats {
        *self.stats.lock().unwrap()
    }

    pub fn reset_stats(&self) {
        *self.stats.lock().unwrap() = ApplyStats::default();
        self.counters.reset();
    }

    /// Halo values per apply derived independently from the layout boxes.
    pub fn analytic_halo_count(&self, restriction: Restriction) -> u64 {
        let spaces: Vec<FreeSpace> = self.locals.iter().map(|l| l.space).collect();
        let support = (restriction == Restriction::Sparse).then_some(&self.support);
        analytic_halo_count(&self.layout, &self.global, &spaces, support)
    }

    /// `z = B⁻¹ r`.
    pub fn apply(&self, r: &[C64], z: &mut [C64], restriction: Restriction) -> Result<()> {
        let n = self.global.len();
        if r.len() != n || z.len() != n {
            return Err(Error::Dimension {
                expected: n,
                got: if r.len() != n { r.len() } else { z.len() },
            });
        }
        let zero = C64::new(0.0, 0.0);
        let solved: Vec<(Vec<C64>, u64, f64)> = self
            .locals
            .par_iter()
            .map(|local| {
                let plan = &self.halo.subdomains[local.id];
                let mut rhs = vec![zero; local.space.len()];
                for &(li, gi) in &plan.owned {
                    rhs[li] = r[gi];
                }
                let lists = match restriction {
                    Restriction::Full => &plan.recv,
                    Restriction::Sparse => &plan.recv_sparse,
                };
                let mut received = 0u64;
                for peer in lists {
                    // Owner packs the requested values; receiver unpacks.
                    let buffer: Vec<C64> = peer.entries.iter().map(|&(_, gi)| r[gi]).collect();
                    received += buffer.len() as u64;
                    for (&(li, _), v) in peer.entries.iter().zip(buffer) {
                        rhs[li] = v;
                    }
                }
                let start = Instant::now();
                let mut sol = vec![zero; rhs.len()];
                local
                    .factor
                    .solve(&rhs, &mut sol)
                    .map_err(|e| e.in_subdomain(local.id))?;
                Ok((sol, received, start.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()?;

        z.fill(zero);
        let mut received_total = 0;
        let mut sent_total = 0;
        let mut times = Vec::with_capacity(solved.len());
        for (local, (sol, received, secs)) in self.locals.iter().zip(&solved) {
            let plan = &self.halo.subdomains[local.id];
            let w = &self.pou.weights[local.id];
            received_total += received;
            times.push(*secs);
            for &(li, gi) in &plan.keep {
                let (ix, iy) = local.space.node(li);
                z[gi] += sol[li] * w.at(ix, iy);
            }
            for peer in &plan.send_back {
                let buffer: Vec<C64> = peer
                    .entries
                    .iter()
                    .map(|&(li, _)| {
                        let (ix, iy) = local.space.node(li);
                        sol[li] * w.at(ix, iy)
                    })
                    .collect();
                sent_total += buffer.len() as u64;
                for (&(_, gi), v) in peer.entries.iter().zip(buffer) {
                    z[gi] += v;
                }
            }
        }
        self.counters
            .restrict_values
            .fetch_add(received_total, Ordering::Relaxed);
        self.counters.extend_values.fetch_add(sent_total, Ordering::Relaxed);
        self.counters.applies.fetch_add(1, Ordering::Relaxed);
        let mut stats = self.stats.lock().unwrap();
        stats.applies += 1;
        stats.local_sum_s += times.iter().sum::<f64>();
        stats.local_max_s += times.iter().cloned().fold(0.0, f64::max);
        Ok(())
    }
}
