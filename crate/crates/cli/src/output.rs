//! File writers: diagnostics CSV, grid snapshots and key = value summaries.
//! Floats use the shortest round-trip representation, so identical runs
//! give identical bytes.

use std::fmt::{self, Write as _};
use std::fs;
use std::path::Path;

use ns_manifold::diagnostics::DiagnosticsRecord;
use ns_manifold::solver::{SimState, Solver};

use crate::error::CliError;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const SUMMARY_FILE: &str = "summary.txt";

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn diagnostics_header(n_killing: usize) -> String {
    let mut cols = vec!["t".to_string(), "energy_total".into(), "energy_killing".into(), "energy_perp".into()];
    cols.extend((1..=n_killing).map(|i| format!("c_{i}")));
    cols.extend(
        ["enstrophy_total", "enstrophy_k", "enstrophy_perp", "dissipation", "pressure_residual", "coriolis_uhat"]
            .map(String::from),
    );
    cols.join(",")
}

pub fn diagnostics_row(r: &DiagnosticsRecord) -> String {
    let mut cells = vec![num(r.t), num(r.energy_total), num(r.energy_killing), num(r.energy_perp)];
    cells.extend(r.killing_moments.iter().copied().map(num));
    cells.extend([
        num(r.enstrophy_total),
        num(r.enstrophy_killing),
        num(r.enstrophy_perp),
        num(r.dissipation),
        opt(r.pressure_residual),
        opt(r.coriolis_uhat),
    ]);
    cells.join(",")
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord], n_killing: usize) -> String {
    let mut s = diagnostics_header(n_killing);
    s.push('\n');
    for r in records {
        s.push_str(&diagnostics_row(r));
        s.push('\n');
    }
    s
}

/// Grid snapshot, one row per node with the longitude index fastest.
pub fn snapshot_csv(solver: &Solver, state: &SimState) -> Result<String, CliError> {
    let backend = solver.backend();
    let zeta = backend.synthesis(&state.zeta)?;
    let psi = backend.synthesis(&state.psi)?;
    let chart = solver.chart();
    let mut s = String::from("theta,phi,u1,u2,zeta,psi\n");
    for (i, phi) in chart.lat().iter().enumerate() {
        for (j, theta) in chart.lon().iter().enumerate() {
            let cells = [
                *theta,
                *phi,
                state.u.comps[0][[i, j]],
                state.u.comps[1][[i, j]],
                zeta.values[[i, j]],
                psi.values[[i, j]],
            ];
            let line: Vec<String> = cells.into_iter().map(num).collect();
            writeln!(s, "{}", line.join(",")).expect("writing to a String");
        }
    }
    Ok(s)
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.csv")
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Ordered `key = value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.put(key, num(value))
    }

    pub fn flag(&mut self, key: impl Into<String>, pass: bool) -> &mut Self {
        self.put(key, if pass { "PASS" } else { "FAIL" })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn extend(&mut self, prefix: &str, other: &Summary) {
        for (k, v) in &other.entries {
            self.entries.push((format!("{prefix}.{k}"), v.clone()));
        }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
