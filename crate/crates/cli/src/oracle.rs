//! Hidden `--oracle` reports.

use helmholtz_ras::oracle::{convergence_study, direct_global_solve, OracleReport};
use serde_json::{json, Value};

use crate::error::{config_error, CliResult};
use crate::run::{execute, ORACLE_TOLERANCE};
use crate::Args;

pub fn report_json(r: &OracleReport) -> Value {
    json!({
        "problem": r.problem,
        "reference_norm": r.reference_norm,
        "abs_error": r.abs_error,
        "rel_error": r.rel_error,
        "tolerance": r.tolerance,
        "pass": r.pass,
        "levels": r.levels.iter().map(|(h, e)| json!({"h": h, "error": e})).collect::<Vec<_>>(),
        "order": r.order,
    })
}

/// `direct`: the configured iterative run against a global direct solve.
/// `convergence`: manufactured-solution study at `--k` (default 1).
pub fn run(kind: &str, args: &Args) -> CliResult<Value> {
    match kind {
        "direct" => {
            let mut cfg = args.resolve()?;
            cfg.direct_oracle = false;
            let out = execute(&cfg)?;
            let reference = direct_global_solve(&out.problem.a, &out.problem.f, cfg.budget_dofs)?;
            let report = OracleReport::compare(
                format!("iterative vs direct, k = {}, nsub = {:?}", cfg.params.k, cfg.nsub),
                &out.solution.values,
                &reference.values,
                ORACLE_TOLERANCE,
            )?;
            let mut v = report_json(&report);
            v["iterations"] = json!(out.summary.iterations);
            Ok(v)
        }
        "convergence" => {
            let k = match &args.k {
                Some(s) => s
                    .parse()
                    .map_err(|_| config_error("k", format!("cannot parse `{s}`")))?,
                None => 1.0,
            };
            Ok(report_json(&convergence_study(k, args.refinements.unwrap_or(3))?))
        }
        other => Err(config_error(
            "oracle",
            format!("unknown oracle `{other}` (direct | convergence)"),
        )),
    }
}
