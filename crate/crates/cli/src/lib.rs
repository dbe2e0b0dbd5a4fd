//! Command-line driver for RAS-preconditioned Helmholtz solves: configuration,
//! single runs, table sweeps and oracle reports.

pub mod config;
pub mod error;
pub mod oracle;
pub mod run;
pub mod table;

use std::path::PathBuf;

use clap::Parser;

pub use config::{Accel, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{run_solve, RunSummary};
pub use table::run_table;

#[derive(Debug, Clone, Default, Parser)]
#[command(name = "hras", about = "RAS-preconditioned 2D Helmholtz solver")]
pub struct Args {
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub k0: Option<String>,
    #[arg(long)]
    pub c_delta: Option<String>,
    #[arg(long)]
    pub c_kappa: Option<String>,
    #[arg(long)]
    pub ppw: Option<String>,
    /// Global PML thickness in wavelengths.
    #[arg(long)]
    pub kappa_g: Option<String>,
    #[arg(long)]
    pub sigma_pml: Option<String>,
    #[arg(long)]
    pub nsub_x: Option<String>,
    #[arg(long)]
    pub nsub_y: Option<String>,
    #[arg(long)]
    pub n_ovlp: Option<String>,
    #[arg(long)]
    pub n_pml: Option<String>,
    /// pml-dirichlet | pml-impedance | impedance
    #[arg(long)]
    pub bc: Option<String>,
    /// richardson | gmres
    #[arg(long)]
    pub accel: Option<String>,
    #[arg(long)]
    pub restart: Option<String>,
    #[arg(long)]
    pub rtol: Option<String>,
    #[arg(long)]
    pub maxit: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    /// on | off
    #[arg(long)]
    pub sparse_residual: Option<String>,
    #[arg(long)]
    pub dump_field: bool,
    /// Compare the iterate with a global direct solve.
    #[arg(long)]
    pub direct_oracle: bool,
    /// separable | sparse-lu
    #[arg(long)]
    pub local_solver: Option<String>,
    /// Output prefix.
    #[arg(long)]
    pub out: Option<String>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sweep the rows of table 1, 2, 3 or 4.
    #[arg(long)]
    pub table: Option<u32>,
    #[arg(long)]
    pub budget_dofs: Option<String>,
    /// direct | convergence
    #[arg(long, hide = true)]
    pub oracle: Option<String>,
    #[arg(long, hide = true)]
    pub refinements: Option<usize>,
}

impl Args {
    fn flag_pairs(&self) -> Vec<(&'static str, String)> {
        let mut pairs: Vec<(&'static str, String)> = [
            ("k", &self.k),
            ("k0", &self.k0),
            ("c_delta", &self.c_delta),
            ("c_kappa", &self.c_kappa),
            ("ppw", &self.ppw),
            ("kappa_g", &self.kappa_g),
            ("sigma_pml", &self.sigma_pml),
            ("nsub_x", &self.nsub_x),
            ("nsub_y", &self.nsub_y),
            ("n_ovlp", &self.n_ovlp),
            ("n_pml", &self.n_pml),
            ("bc", &self.bc),
            ("accel", &self.accel),
            ("restart", &self.restart),
            ("rtol", &self.rtol),
            ("maxit", &self.maxit),
            ("workers", &self.workers),
            ("sparse_residual", &self.sparse_residual),
            ("local_solver", &self.local_solver),
            ("out", &self.out),
            ("budget_dofs", &self.budget_dofs),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k, v)))
        .collect();
        if self.dump_field {
            pairs.push(("dump_field", "on".into()));
        }
        if self.direct_oracle {
            pairs.push(("direct_oracle", "on".into()));
        }
        pairs
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in self.flag_pairs() {
            cfg.set(k, &v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
