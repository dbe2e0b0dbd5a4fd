//! Restricted additive Schwarz: partition of unity, halo plans, the
//! preconditioner and its Richardson / GMRES drivers.

mod drivers;
mod halo;
mod pou;
mod ras;

pub use drivers::{
    gmres_solve, richardson_solve, sparse_residual_update, IterationLog, IterationRecord, RichardsonOptions,
    SolveStatus, DIVERGENCE_THRESHOLD,
};
pub use halo::{analytic_halo_count, CommCounters, HaloPlan, NodeBox, PeerList, ResidualSupport, SubdomainHalo};
pub use pou::{build_pou, PartitionOfUnity, SubWeights};
pub use ras::{build_ras, ApplyStats, LocalProblem, RasConfig, RasOperator, Restriction};
