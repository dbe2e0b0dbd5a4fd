//! Single solves and their output files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use helmholtz_ras::assembly::FieldC;
use helmholtz_ras::grid::decompose;
use helmholtz_ras::linalg::GmresConfig;
use helmholtz_ras::oracle::{direct_global_solve, OracleReport};
use helmholtz_ras::problem::Problem;
use helmholtz_ras::schwarz::{
    build_ras, gmres_solve, richardson_solve, IterationLog, RasConfig, RasOperator, RichardsonOptions, SolveStatus,
};
use serde::Serialize;

use crate::config::{Accel, RunConfig};
use crate::error::{io_error, CliError, CliResult};

/// Tolerance of the iterate against the direct solve.
pub const ORACLE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub config: BTreeMap<String, String>,
    pub n_ovlp: usize,
    pub n_pml: usize,
    pub n_subdomains: usize,
    pub grid_cells: [usize; 2],
    pub iterations: usize,
    pub final_relres: f64,
    pub status: String,
    pub converged: bool,
    pub setup_s: f64,
    pub solve_s: f64,
    pub total_s: f64,
    pub total_over_k: f64,
    /// Times of an ideal run with one worker per subdomain (see README).
    pub modeled_setup_s: f64,
    pub modeled_solve_s: f64,
    pub modeled_total_s: f64,
    pub modeled_total_over_k: f64,
    pub comm_values: u64,
    pub comm_values_per_apply: f64,
    pub preconditioner_applies: u64,
    pub dofs_global: usize,
    pub dofs_subdomain_min: usize,
    pub dofs_subdomain_max: usize,
    pub oracle_rel_error: Option<f64>,
    pub oracle_pass: Option<bool>,
}

impl RunSummary {
    /// Process exit code of the run.
    pub fn exit_code(&self) -> i32 {
        exit_code(&self.status)
    }
}

pub fn exit_code(status: &str) -> i32 {
    match status {
        "converged" => 0,
        "maxit" => 2,
        _ => 3,
    }
}

/// Everything a run produced, before it is written out.
#[derive(Debug)]
pub struct RunOutput {
    pub summary: RunSummary,
    pub log: IterationLog,
    pub problem: Problem,
    pub solution: FieldC,
}

/// Builds and solves one configuration on a pool of `cfg.workers` threads.
pub fn execute(cfg: &RunConfig) -> CliResult<RunOutput> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Core(helmholtz_ras::Error::Backend(e.to_string())))?;
    pool.install(|| execute_in_pool(cfg))
}

fn execute_in_pool(cfg: &RunConfig) -> CliResult<RunOutput> {
    let (n_ovlp, n_pml) = cfg.widths()?;
    let start = Instant::now();
    let problem = Problem::build(&cfg.params, cfg.budget_dofs)?;
    let layout = decompose(&problem.grid, cfg.nsub, n_ovlp, n_pml, cfg.bc)?;
    let mut ras_cfg = RasConfig::new(cfg.params.k);
    ras_cfg.local_solver = cfg.local_solver;
    let ras = build_ras(&problem.grid, &problem.coeffs, &layout, ras_cfg)?;
    let setup_s = start.elapsed().as_secs_f64();
    ras.reset_stats();

    let u0 = FieldC::zeros(problem.f.space);
    let (solution, mut log) = match cfg.accel {
        Accel::Richardson => {
            let opts = RichardsonOptions {
                rtol: cfg.rtol,
                maxit: cfg.maxit,
                sparse_residual: cfg.sparse_residual,
                verify_sparsity: false,
            };
            richardson_solve(&problem.a, &ras, &problem.f, &u0, &opts)?
        }
        Accel::Gmres => {
            let gcfg = GmresConfig {
                rtol: cfg.rtol,
                maxit: cfg.maxit,
                restart: cfg.restart,
            };
            gmres_solve(&problem.a, &ras, &problem.f, &u0, &gcfg)?
        }
    };
    log.setup_s = setup_s;

    let oracle = if cfg.direct_oracle {
        let reference = direct_global_solve(&problem.a, &problem.f, cfg.budget_dofs)?;
        Some(OracleReport::compare(
            "direct global solve",
            &solution.values,
            &reference.values,
            ORACLE_TOLERANCE,
        )?)
    } else {
        None
    };
    let summary = summarize(cfg, &problem, &ras, &log, (n_ovlp, n_pml), oracle.as_ref());
    Ok(RunOutput {
        summary,
        log,
        problem,
        solution,
    })
}

fn summarize(
    cfg: &RunConfig,
    problem: &Problem,
    ras: &RasOperator,
    log: &IterationLog,
    (n_ovlp, n_pml): (usize, usize),
    oracle: Option<&OracleReport>,
) -> RunSummary {
    let n = ras.n_subdomains();
    let factors = ras.factor_seconds();
    let factor_sum: f64 = factors.iter().sum();
    let factor_max = factors.iter().copied().fold(0.0, f64::max);
    let stats = ras.apply_stats();
    let modeled_setup_s = (log.setup_s - factor_sum).max(0.0) / n as f64 + factor_max;
    let modeled_solve_s = (log.solve_s - stats.local_sum_s).max(0.0) / n as f64 + stats.local_max_s;
    let sizes: Vec<usize> = ras.locals.iter().map(|l| l.space.len()).collect();
    let k = cfg.params.k;
    let total_s = log.setup_s + log.solve_s;
    let modeled_total_s = modeled_setup_s + modeled_solve_s;
    RunSummary {
        config: cfg.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        n_ovlp,
        n_pml,
        n_subdomains: n,
        grid_cells: problem.grid.n_cells,
        iterations: log.iterations(),
        final_relres: log.final_relres,
        status: log.status.as_str().to_string(),
        converged: log.status == SolveStatus::Converged,
        setup_s: log.setup_s,
        solve_s: log.solve_s,
        total_s,
        total_over_k: total_s / k,
        modeled_setup_s,
        modeled_solve_s,
        modeled_total_s,
        modeled_total_over_k: modeled_total_s / k,
        comm_values: log.comm_values,
        comm_values_per_apply: if log.preconditioner_applies > 0 {
            log.comm_values as f64 / log.preconditioner_applies as f64
        } else {
            0.0
        },
        preconditioner_applies: log.preconditioner_applies,
        dofs_global: problem.n_free(),
        dofs_subdomain_min: sizes.iter().copied().min().unwrap_or(0),
        dofs_subdomain_max: sizes.iter().copied().max().unwrap_or(0),
        oracle_rel_error: oracle.map(|o| o.rel_error),
        oracle_pass: oracle.map(|o| o.pass),
    }
}

/// `iter,relres,elapsed_s` history.
pub fn iters_csv(log: &IterationLog) -> String {
    let mut s = String::from("iter,relres,elapsed_s\n");
    for r in &log.records {
        let _ = writeln!(s, "{},{:e},{:e}", r.iter, r.relres, r.elapsed_s);
    }
    s
}

/// Field dump over all grid nodes, boundary nodes written as zeros.
pub fn field_bytes(problem: &Problem, u: &FieldC) -> Vec<u8> {
    let nx = problem.grid.n_nodes(0);
    let ny = problem.grid.n_nodes(1);
    let mut out = Vec::with_capacity(4 + 1 + 24 + 16 * nx * ny);
    out.extend_from_slice(b"HRAS");
    out.push(1);
    out.extend_from_slice(&(nx as u64).to_le_bytes());
    out.extend_from_slice(&(ny as u64).to_le_bytes());
    out.extend_from_slice(&problem.grid.h.to_le_bytes());
    for iy in 0..ny {
        for ix in 0..nx {
            let v = u.space.index(ix, iy).map_or(0.0.into(), |i| u.values[i]);
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
    }
    out
}

fn write(path: &str, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = Path::new(path).parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_error(dir))?;
    }
    fs::write(path, bytes).map_err(io_error(path))
}

/// Runs `cfg` and writes `<out>.iters.csv`, `<out>.summary.json` and, if
/// requested, `<out>.field.bin`.
pub fn run_solve(cfg: &RunConfig) -> CliResult<RunSummary> {
    let output = execute(cfg)?;
    write(&format!("{}.iters.csv", cfg.out), iters_csv(&output.log).as_bytes())?;
    let json = serde_json::to_string_pretty(&output.summary)?;
    write(&format!("{}.summary.json", cfg.out), json.as_bytes())?;
    if cfg.dump_field {
        write(
            &format!("{}.field.bin", cfg.out),
            &field_bytes(&output.problem, &output.solution),
        )?;
    }
    Ok(output.summary)
}
