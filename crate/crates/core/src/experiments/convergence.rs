use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::{build_topology, sample_channels};
use crate::error::Result;
use crate::solver::{optimize, Mode};

use super::{write_file, ExperimentConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub num_cells: usize,
    pub iteration: usize,
    pub pi: f64,
    pub f_value: f64,
    pub ee: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub header: Vec<(String, String)>,
    pub mode: Mode,
    pub rows: Vec<ConvergenceRow>,
    /// `(K, outer iterations, converged)` per traced cell count.
    pub summary: Vec<(usize, usize, bool)>,
}

impl ConvergenceTrace {
    /// Rows of one cell count.
    pub fn rows_for(&self, num_cells: usize) -> Vec<&ConvergenceRow> {
        self.rows.iter().filter(|r| r.num_cells == num_cells).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("num_cells,iteration,pi,f_value,ee\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{}", r.num_cells, r.iteration, r.pi, r.f_value, r.ee);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }
}

/// One row per outer iteration for every cell count in
/// `config.convergence.cells`, using the first configured mode and the
/// channel draw of `seed`.
pub fn emit_convergence(config: &ExperimentConfig, seed: u64) -> Result<ConvergenceTrace> {
    config.validate()?;
    let mode = config.modes[0];
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for &k in &config.convergence.cells {
        let mut system = config.system;
        system.num_cells = k;
        let params = system.to_params()?;
        let topo = build_topology(&params, &config.layout)?;
        let chan = sample_channels(&topo, &params, seed);
        let r = optimize(&chan, &params, &config.solver, mode)?;
        for (i, ((&pi, &f), &ee)) in r.trajectory.iter().zip(&r.f_values).zip(&r.ee_trajectory).enumerate() {
            rows.push(ConvergenceRow {
                num_cells: k,
                iteration: i + 1,
                pi,
                f_value: f,
                ee,
            });
        }
        summary.push((k, r.outer_iterations, r.converged));
    }
    let mut header = config.header();
    header.push(("trace.seed".into(), seed.to_string()));
    header.push(("trace.mode".into(), mode.to_string()));
    let trace = ConvergenceTrace {
        header,
        mode,
        rows,
        summary,
    };
    if let Some(path) = &config.output {
        trace.write_csv(path)?;
    }
    Ok(trace)
}
