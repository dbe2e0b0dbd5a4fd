//! Flat `key = value` run configuration.
//!
//! Values resolve as defaults, then the config file, then command-line
//! flags. Every setter goes through [`RunConfig::set`], so file entries and
//! flags share parsing and error reporting.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use helmholtz_ras::assembly::BcVariant;
use helmholtz_ras::grid::{widths_from_k, ProblemParams};
use helmholtz_ras::linalg::LocalSolverKind;

use crate::error::{config_error, io_error, CliError, CliResult};

/// Default node budget of a single run.
pub const DEFAULT_BUDGET_DOFS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Accel {
    #[default]
    Richardson,
    Gmres,
}

impl Accel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Accel::Richardson => "richardson",
            Accel::Gmres => "gmres",
        }
    }
}

impl FromStr for Accel {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "richardson" => Ok(Accel::Richardson),
            "gmres" => Ok(Accel::Gmres),
            other => Err(config_error(
                "accel",
                format!("unknown accelerator `{other}` (richardson | gmres)"),
            )),
        }
    }
}

impl fmt::Display for Accel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ProblemParams,
    pub nsub: [usize; 2],
    pub n_ovlp: Option<usize>,
    pub n_pml: Option<usize>,
    pub bc: BcVariant,
    pub accel: Accel,
    /// GMRES restart length; `None` runs full GMRES.
    pub restart: Option<usize>,
    pub rtol: f64,
    pub maxit: usize,
    pub workers: usize,
    pub out: String,
    pub sparse_residual: bool,
    pub dump_field: bool,
    pub direct_oracle: bool,
    pub local_solver: LocalSolverKind,
    pub budget_dofs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ProblemParams::default(),
            nsub: [2, 2],
            n_ovlp: None,
            n_pml: None,
            bc: BcVariant::PmlImpedance,
            accel: Accel::Richardson,
            restart: None,
            rtol: 1e-10,
            maxit: 500,
            workers: 1,
            out: "hras".to_string(),
            sparse_residual: true,
            dump_field: false,
            direct_oracle: false,
            local_solver: LocalSolverKind::Separable,
            budget_dofs: DEFAULT_BUDGET_DOFS,
        }
    }
}

/// Every key accepted by [`RunConfig::set`], in emission order.
pub const KEYS: [&str; 22] = [
    "k",
    "k0",
    "c_delta",
    "c_kappa",
    "ppw",
    "kappa_g",
    "sigma_pml",
    "nsub_x",
    "nsub_y",
    "n_ovlp",
    "n_pml",
    "bc",
    "accel",
    "restart",
    "rtol",
    "maxit",
    "workers",
    "out",
    "sparse_residual",
    "dump_field",
    "direct_oracle",
    "local_solver",
];

/// Keys emitted after [`KEYS`].
pub const EXTRA_KEYS: [&str; 1] = ["budget_dofs"];

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| config_error(key, format!("cannot parse `{value}`")))
}

fn parse_positive_f64(key: &str, value: &str) -> CliResult<f64> {
    let v: f64 = parse(key, value)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_error(key, format!("must be finite and positive, got `{value}`")))
    }
}

fn parse_nonneg_f64(key: &str, value: &str) -> CliResult<f64> {
    let v: f64 = parse(key, value)?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(config_error(
            key,
            format!("must be finite and nonnegative, got `{value}`"),
        ))
    }
}

fn parse_positive_usize(key: &str, value: &str) -> CliResult<usize> {
    let v: usize = parse(key, value)?;
    if v == 0 {
        return Err(config_error(key, "must be at least 1"));
    }
    Ok(v)
}

fn parse_optional_usize(key: &str, value: &str) -> CliResult<Option<usize>> {
    match value {
        "auto" | "none" | "" => Ok(None),
        v => parse(key, v).map(Some),
    }
}

fn parse_switch(key: &str, value: &str) -> CliResult<bool> {
    match value {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        other => Err(config_error(key, format!("expected on | off, got `{other}`"))),
    }
}

fn switch(b: bool) -> &'static str {
    if b {
        "on"
    } else {
        "off"
    }
}

fn optional(v: Option<usize>) -> String {
    v.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

impl RunConfig {
    /// Sets one key. Flag spellings with dashes are accepted.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let key = key.trim().replace('-', "_");
        let value = value.trim();
        let key = key.as_str();
        match key {
            "k" => self.params.k = parse_positive_f64(key, value)?,
            "k0" => self.params.k0 = parse_positive_f64(key, value)?,
            "c_delta" => self.params.c_delta = parse_positive_f64(key, value)?,
            "c_kappa" => self.params.c_kappa = parse_positive_f64(key, value)?,
            "ppw" => {
                let v: u32 = parse(key, value)?;
                if v == 0 {
                    return Err(config_error(key, "must be at least 1"));
                }
                self.params.ppw = v;
            }
            "kappa_g" => self.params.kappa_g_wavelengths = parse_nonneg_f64(key, value)?,
            "sigma_pml" => self.params.sigma_pml = parse_nonneg_f64(key, value)?,
            "nsub_x" => self.nsub[0] = parse_positive_usize(key, value)?,
            "nsub_y" => self.nsub[1] = parse_positive_usize(key, value)?,
            "n_ovlp" => self.n_ovlp = parse_optional_usize(key, value)?,
            "n_pml" => self.n_pml = parse_optional_usize(key, value)?,
            "bc" => self.bc = value.parse()?,
            "accel" => self.accel = value.parse()?,
            "restart" => {
                self.restart = parse_optional_usize(key, value)?;
                if self.restart == Some(0) {
                    return Err(config_error(key, "must be at least 1"));
                }
            }
            "rtol" => self.rtol = parse_positive_f64(key, value)?,
            "maxit" => self.maxit = parse_positive_usize(key, value)?,
            "workers" => self.workers = parse_positive_usize(key, value)?,
            "out" => {
                if value.is_empty() {
                    return Err(config_error(key, "output prefix is empty"));
                }
                self.out = value.to_string();
            }
            "sparse_residual" => self.sparse_residual = parse_switch(key, value)?,
            "dump_field" => self.dump_field = parse_switch(key, value)?,
            "direct_oracle" => self.direct_oracle = parse_switch(key, value)?,
            "local_solver" => self.local_solver = value.parse()?,
            "budget_dofs" => self.budget_dofs = parse_positive_usize(key, value)?,
            other => return Err(config_error(other, "unknown key")),
        }
        Ok(())
    }

    /// Value of `key` in the textual form accepted by [`RunConfig::set`].
    pub fn get(&self, key: &str) -> Option<String> {
        let p = &self.params;
        Some(match key {
            "k" => p.k.to_string(),
            "k0" => p.k0.to_string(),
            "c_delta" => p.c_delta.to_string(),
            "c_kappa" => p.c_kappa.to_string(),
            "ppw" => p.ppw.to_string(),
            "kappa_g" => p.kappa_g_wavelengths.to_string(),
            "sigma_pml" => p.sigma_pml.to_string(),
            "nsub_x" => self.nsub[0].to_string(),
            "nsub_y" => self.nsub[1].to_string(),
            "n_ovlp" => optional(self.n_ovlp),
            "n_pml" => optional(self.n_pml),
            "bc" => self.bc.as_str().to_string(),
            "accel" => self.accel.as_str().to_string(),
            "restart" => optional(self.restart),
            "rtol" => self.rtol.to_string(),
            "maxit" => self.maxit.to_string(),
            "workers" => self.workers.to_string(),
            "out" => self.out.clone(),
            "sparse_residual" => switch(self.sparse_residual).to_string(),
            "dump_field" => switch(self.dump_field).to_string(),
            "direct_oracle" => switch(self.direct_oracle).to_string(),
            "local_solver" => self.local_solver.as_str().to_string(),
            "budget_dofs" => self.budget_dofs.to_string(),
            _ => return None,
        })
    }

    /// All `(key, value)` pairs in emission order.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        KEYS.iter()
            .chain(EXTRA_KEYS.iter())
            .map(|&k| (k, self.get(k).expect("known key")))
            .collect()
    }

    /// Config file text that parses back to `self`.
    pub fn emit(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> CliResult<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(config_error(
                    line,
                    format!("line {}: expected `key = value`", lineno + 1),
                ));
            };
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn parse_text(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path).map_err(io_error(path))?;
        self.apply_text(&text)
    }

    /// Cross-key invariants.
    pub fn validate(&self) -> CliResult<()> {
        self.params.validate()?;
        if self.bc == BcVariant::ImpedanceOnly && self.n_pml.is_some_and(|p| p > 0) {
            return Err(config_error("n_pml", "the impedance variant uses no subdomain PML"));
        }
        self.widths()?;
        Ok(())
    }

    /// Resolved `(n_ovlp, n_pml)`: explicit overrides win over the width
    /// formula. The impedance variant has no subdomain PML.
    pub fn widths(&self) -> CliResult<(usize, usize)> {
        let formula = || {
            widths_from_k(&self.params).map_err(|e| config_error("k", format!("{e}; set n_ovlp and n_pml explicitly")))
        };
        let n_ovlp = match self.n_ovlp {
            Some(v) => v,
            None => formula()?.0,
        };
        let n_pml = match (self.bc, self.n_pml) {
            (BcVariant::ImpedanceOnly, _) => 0,
            (_, Some(v)) => v,
            (_, None) => formula()?.1,
        };
        Ok((n_ovlp, n_pml))
    }

    pub fn n_subdomains(&self) -> usize {
        self.nsub[0] * self.nsub[1]
    }
}
