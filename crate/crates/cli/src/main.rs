use std::process::ExitCode;

use clap::Parser;
use hras_cli::table::{table_csv, Outcome};
use hras_cli::{oracle, run_solve, run_table, Args, CliResult};

fn run(args: &Args) -> CliResult<u8> {
    if let Some(kind) = &args.oracle {
        let report = oracle::run(kind, args)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(if report["pass"] == serde_json::Value::Bool(true) {
            0
        } else {
            1
        });
    }
    let cfg = args.resolve()?;
    if let Some(id) = args.table {
        let rows = run_table(id, &cfg)?;
        let path = format!("{}.table.csv", cfg.out);
        std::fs::write(&path, table_csv(id, &rows)).map_err(|source| hras_cli::CliError::Io {
            path: path.clone().into(),
            source,
        })?;
        for r in &rows {
            let e = &r.entry;
            let measured = match &r.outcome {
                Outcome::Ran(s) => format!("{} {} {:.2e}", s.status, s.iterations, s.final_relres),
                Outcome::Skipped { nodes, budget } => format!("skipped ({nodes} nodes > {budget})"),
                Outcome::Failed(msg) => format!("error: {msg}"),
            };
            println!(
                "k={} N={} {} {}: published {} / measured {measured}",
                e.row.k, e.row.n, e.label, e.accel, e.published.iter
            );
        }
        println!("wrote {path}");
        return Ok(0);
    }
    let summary = run_solve(&cfg)?;
    println!(
        "{} after {} iterations, relres {:e}, setup {:.3}s, solve {:.3}s",
        summary.status, summary.iterations, summary.final_relres, summary.setup_s, summary.solve_s
    );
    if let Some(err) = summary.oracle_rel_error {
        println!("direct oracle relative error {err:e}");
    }
    Ok(summary.exit_code() as u8)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hras: {e}");
            ExitCode::from(1)
        }
    }
}
