//! Sweeps over the rows of the published tables.

use std::fmt::Write as _;

use helmholtz_ras::assembly::BcVariant;
use helmholtz_ras::grid::build_global_grid;

use crate::config::{Accel, RunConfig};
use crate::error::{config_error, CliResult};
use crate::run::{execute, RunSummary};

/// Geometry of one published row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowSpec {
    pub k: f64,
    pub grid: usize,
    pub n: usize,
    pub pml: usize,
    pub ovlp: usize,
}

/// Published result of one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedResult {
    /// Iteration count as printed (`x` where the run diverged).
    pub iter: &'static str,
    pub relres: &'static str,
}

/// Published Table 4 timings in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublishedTiming {
    pub setup: f64,
    pub solve: f64,
    pub total: f64,
    pub total_over_k: f64,
}

/// One run of a table: geometry, solver variant and published values.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub row: RowSpec,
    pub label: &'static str,
    pub bc: BcVariant,
    pub accel: Accel,
    pub c_kappa: f64,
    pub published: PublishedResult,
    pub timing: Option<PublishedTiming>,
}

const GEOMETRY_38: [(f64, usize, usize, usize, usize); 6] = [
    (300.0, 600, 4, 8, 4),
    (600.0, 1200, 16, 11, 5),
    (1200.0, 2400, 64, 15, 6),
    (2400.0, 4800, 256, 18, 8),
    (4800.0, 9600, 1024, 22, 10),
    (9600.0, 19200, 4096, 26, 12),
];

const GEOMETRY_12: [(f64, usize, usize, usize, usize); 6] = [
    (300.0, 600, 4, 12, 4),
    (600.0, 1200, 16, 16, 5),
    (1200.0, 2400, 64, 21, 6),
    (2400.0, 4800, 256, 26, 8),
    (4800.0, 9600, 1024, 32, 10),
    (9600.0, 19200, 4096, 38, 12),
];

const fn p(iter: &'static str, relres: &'static str) -> PublishedResult {
    PublishedResult { iter, relres }
}

const TABLE1: [[PublishedResult; 3]; 6] = [
    [p("12", "1.88E-11"), p("13", "2.29E-11"), p("30", "6.44E-11")],
    [p("17", "9.15E-11"), p("18", "7.22E-11"), p("43", "7.13E-11")],
    [p("34", "7.26E-11"), p("35", "8.83E-11"), p("500", "0.016")],
    [p("77", "8.98E-11"), p("94", "8.91E-11"), p("x", "diverged")],
    [p("196", "9.12E-11"), p("500", "1.17E-10"), p("x", "diverged")],
    [p("500", "4.43E-08"), p("x", "diverged"), p("x", "diverged")],
];

const TABLE2: [[PublishedResult; 3]; 6] = [
    [p("11", "7.86E-11"), p("12", "8.84E-11"), p("29", "6.71E-11")],
    [p("19", "6.90E-11"), p("19", "6.28E-11"), p("41", "8.34E-11")],
    [p("48", "9.30E-11"), p("49", "9.31E-11"), p("95", "8.20E-11")],
    [p("88", "8.50E-11"), p("91", "5.30E-11"), p("310", "9.24E-11")],
    [p("154", "6.93E-11"), p("173", "9.62E-11"), p("500", "4.49E-10")],
    [p("294", "8.90E-11"), p("389", "9.92E-11"), p("500", "9.24E-06")],
];

/// Width-study block: label, per-row `(pml, ovlp)` and iterations.
type WidthBlock = (&'static str, [(usize, usize); 6], [&'static str; 6]);

const TABLE3: [WidthBlock; 4] = [
    ("pml-2wl/ovlp-2/3wl", [(25, 8); 6], ["6", "13", "26", "61", "140", "x"]),
    (
        "pml-2wl/ovlp-formula",
        [(25, 4), (25, 5), (25, 6), (25, 8), (25, 10), (25, 12)],
        ["7", "14", "31", "61", "134", ">500"],
    ),
    (
        "pml-formula/ovlp-1/3wl",
        [(12, 4), (16, 4), (21, 4), (26, 4), (32, 4), (38, 4)],
        ["7", "14", "31", "72", "149", "298"],
    ),
    (
        "pml-formula/ovlp-formula",
        [(12, 4), (16, 5), (21, 6), (26, 8), (32, 10), (38, 12)],
        ["7", "14", "31", "60", "119", "224"],
    ),
];

const TABLE4_ITERS: [&str; 6] = ["7", "14", "31", "60", "119", "224"];

const TABLE4_TIMES: [PublishedTiming; 6] = [
    PublishedTiming {
        setup: 0.95,
        solve: 0.27,
        total: 1.22,
        total_over_k: 0.0041,
    },
    PublishedTiming {
        setup: 1.12,
        solve: 0.68,
        total: 1.80,
        total_over_k: 0.0030,
    },
    PublishedTiming {
        setup: 1.40,
        solve: 1.87,
        total: 3.27,
        total_over_k: 0.0027,
    },
    PublishedTiming {
        setup: 1.67,
        solve: 4.39,
        total: 6.06,
        total_over_k: 0.0025,
    },
    PublishedTiming {
        setup: 1.94,
        solve: 11.20,
        total: 13.15,
        total_over_k: 0.0027,
    },
    PublishedTiming {
        setup: 1.90,
        solve: 23.22,
        total: 25.12,
        total_over_k: 0.0026,
    },
];

const VARIANTS: [(&str, BcVariant); 3] = [
    ("RAS-PML-Imp", BcVariant::PmlImpedance),
    ("RAS-PML-Drch", BcVariant::PmlDirichlet),
    ("RAS-Imp", BcVariant::ImpedanceOnly),
];

fn row(g: (f64, usize, usize, usize, usize)) -> RowSpec {
    RowSpec {
        k: g.0,
        grid: g.1,
        n: g.2,
        pml: g.3,
        ovlp: g.4,
    }
}

/// All runs of table `id` (1 to 4) in row order.
pub fn entries(id: u32) -> CliResult<Vec<Entry>> {
    let mut out = Vec::new();
    match id {
        1 | 2 => {
            let (results, accel) = if id == 1 {
                (&TABLE1, Accel::Richardson)
            } else {
                (&TABLE2, Accel::Gmres)
            };
            for (g, res) in GEOMETRY_38.iter().zip(results) {
                for ((label, bc), published) in VARIANTS.iter().zip(res) {
                    out.push(Entry {
                        row: row(*g),
                        label,
                        bc: *bc,
                        accel,
                        c_kappa: 3.0 / 8.0,
                        published: *published,
                        timing: None,
                    });
                }
            }
        }
        3 => {
            for (i, g) in GEOMETRY_12.iter().enumerate() {
                for (label, widths, iters) in &TABLE3 {
                    let mut r = row(*g);
                    (r.pml, r.ovlp) = widths[i];
                    out.push(Entry {
                        row: r,
                        label,
                        bc: BcVariant::PmlImpedance,
                        accel: Accel::Richardson,
                        c_kappa: 0.5,
                        published: p(iters[i], ""),
                        timing: None,
                    });
                }
            }
        }
        4 => {
            for (i, g) in GEOMETRY_12.iter().enumerate() {
                out.push(Entry {
                    row: row(*g),
                    label: "RAS-PML-Imp",
                    bc: BcVariant::PmlImpedance,
                    accel: Accel::Richardson,
                    c_kappa: 0.5,
                    published: p(TABLE4_ITERS[i], ""),
                    timing: Some(TABLE4_TIMES[i]),
                });
            }
        }
        other => return Err(config_error("table", format!("no table {other} (1 | 2 | 3 | 4)"))),
    }
    Ok(out)
}

/// Side length of the `N` subdomain grid.
pub fn nsub_side(n: usize) -> usize {
    let s = (n as f64).sqrt().round() as usize;
    assert_eq!(s * s, n, "subdomain count {n} is not a square");
    s
}

impl Entry {
    /// `base` with this entry's frequency, geometry and solver applied.
    pub fn config(&self, base: &RunConfig) -> RunConfig {
        let mut cfg = base.clone();
        cfg.params.k = self.row.k;
        cfg.params.c_kappa = self.c_kappa;
        let s = nsub_side(self.row.n);
        cfg.nsub = [s, s];
        cfg.n_ovlp = Some(self.row.ovlp);
        cfg.n_pml = (self.bc != BcVariant::ImpedanceOnly).then_some(self.row.pml);
        cfg.bc = self.bc;
        cfg.accel = self.accel;
        cfg
    }
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Ran(Box<RunSummary>),
    Skipped { nodes: usize, budget: usize },
    Failed(String),
}

#[derive(Debug, Clone)]
pub struct TableRow {
    pub entry: Entry,
    pub outcome: Outcome,
}

/// Runs every entry of table `id` whose grid fits `base.budget_dofs` nodes.
pub fn run_table(id: u32, base: &RunConfig) -> CliResult<Vec<TableRow>> {
    let mut rows = Vec::new();
    for entry in entries(id)? {
        let cfg = entry.config(base);
        let grid = build_global_grid(&cfg.params, usize::MAX)?;
        let nodes = grid.total_nodes();
        let outcome = if nodes > base.budget_dofs {
            Outcome::Skipped {
                nodes,
                budget: base.budget_dofs,
            }
        } else {
            match execute(&cfg) {
                Ok(out) => Outcome::Ran(Box::new(out.summary)),
                Err(e) => Outcome::Failed(e.to_string()),
            }
        };
        rows.push(TableRow { entry, outcome });
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "table,k,grid,N,pml,ovlp,variant,accel,published_iter,published_relres,\
published_setup_s,published_solve_s,published_total_s,published_total_over_k,status,iter,relres,grid_cells,\
setup_s,solve_s,total_s,total_over_k,modeled_setup_s,modeled_solve_s,modeled_total_s,modeled_total_over_k";

/// Aggregate CSV with published and measured values side by side.
pub fn table_csv(id: u32, rows: &[TableRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let e = &r.entry;
        let _ = write!(
            s,
            "{id},{},{},{},{},{},{},{},{},{},",
            e.row.k,
            e.row.grid,
            e.row.n,
            if e.bc == BcVariant::ImpedanceOnly { 0 } else { e.row.pml },
            e.row.ovlp,
            e.label,
            e.accel,
            e.published.iter,
            e.published.relres
        );
        match &e.timing {
            Some(t) => {
                let _ = write!(s, "{},{},{},{},", t.setup, t.solve, t.total, t.total_over_k);
            }
            None => s.push_str(",,,,"),
        }
        match &r.outcome {
            Outcome::Ran(m) => {
                let _ = writeln!(
                    s,
                    "{},{},{:e},{},{:.6},{:.6},{:.6},{:.6e},{:.6},{:.6},{:.6},{:.6e}",
                    m.status,
                    m.iterations,
                    m.final_relres,
                    m.grid_cells[0],
                    m.setup_s,
                    m.solve_s,
                    m.total_s,
                    m.total_over_k,
                    m.modeled_setup_s,
                    m.modeled_solve_s,
                    m.modeled_total_s,
                    m.modeled_total_over_k
                );
            }
            Outcome::Skipped { .. } => s.push_str("skipped,,,,,,,,,,,\n"),
            Outcome::Failed(msg) => {
                let _ = writeln!(s, "\"error: {}\",,,,,,,,,,,", msg.replace('"', "'"));
            }
        }
    }
    s
}
