use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_topology, sample_channels, trial_seed};
use crate::error::{Error, Result};
use crate::solver::{optimize, Mode};

use super::{write_file, ExperimentConfig, SweepAxis};

/// What one solve contributes to the aggregates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    /// Network EE `ΣR/(ΣP + p_c)`, the ratio the optimizer maximizes.
    pub ee: f64,
    /// `Σ_k R_k/(P_k + p_c)`.
    pub ee_sum_of_ratios: f64,
    pub pi: f64,
    pub total_power: f64,
    pub outer_iterations: usize,
    pub converged: bool,
    pub feasible: bool,
    /// Largest drop of `Π` between consecutive outer iterations (0 if none).
    pub max_pi_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub mode: Mode,
    pub mean_ee: f64,
    /// Sample standard deviation (0 for a single trial).
    pub std_ee: f64,
    pub mean_ee_sum_of_ratios: f64,
    pub trials: usize,
    pub mean_outer_iters: f64,
    pub median_outer_iters: f64,
    pub feasibility_rate: f64,
    pub converged_rate: f64,
    pub mean_total_power: f64,
    pub outcomes: Vec<TrialOutcome>,
}

impl SweepPoint {
    fn aggregate(value: f64, mode: Mode, outcomes: Vec<TrialOutcome>) -> Self {
        let n = outcomes.len() as f64;
        let mean = |f: fn(&TrialOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
        let mean_ee = mean(|o| o.ee);
        let std_ee = if outcomes.len() > 1 {
            (outcomes.iter().map(|o| (o.ee - mean_ee).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let mut iters: Vec<usize> = outcomes.iter().map(|o| o.outer_iterations).collect();
        iters.sort_unstable();
        let mid = iters.len() / 2;
        let median = if iters.len() % 2 == 1 {
            iters[mid] as f64
        } else {
            (iters[mid - 1] + iters[mid]) as f64 / 2.0
        };
        SweepPoint {
            value,
            mode,
            mean_ee,
            std_ee,
            mean_ee_sum_of_ratios: mean(|o| o.ee_sum_of_ratios),
            trials: outcomes.len(),
            mean_outer_iters: mean(|o| o.outer_iterations as f64),
            median_outer_iters: median,
            feasibility_rate: mean(|o| o.feasible as u8 as f64),
            converged_rate: mean(|o| o.converged as u8 as f64),
            mean_total_power: mean(|o| o.total_power),
            outcomes,
        }
    }

    fn statistics(&self) -> [(&'static str, f64); 9] {
        [
            ("mean_ee", self.mean_ee),
            ("std_ee", self.std_ee),
            ("mean_ee_sum_of_ratios", self.mean_ee_sum_of_ratios),
            ("trials", self.trials as f64),
            ("mean_outer_iters", self.mean_outer_iters),
            ("median_outer_iters", self.median_outer_iters),
            ("feasibility_rate", self.feasibility_rate),
            ("converged_rate", self.converged_rate),
            ("mean_total_power", self.mean_total_power),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter: SweepAxis,
    pub header: Vec<(String, String)>,
    /// Sweep values in config order, modes in config order within each value.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn point(&self, value: f64, mode: Mode) -> Option<&SweepPoint> {
        self.points.iter().find(|p| p.value == value && p.mode == mode)
    }

    /// Points of one mode in sweep order.
    pub fn series(&self, mode: Mode) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.mode == mode).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str("sweep_param,sweep_value,mode,statistic,value\n");
        for p in &self.points {
            for (name, v) in p.statistics() {
                let _ = writeln!(out, "{},{},{},{},{}", self.parameter, p.value, p.mode, name, v);
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_file(path, &self.to_csv())
    }
}

pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every `(sweep value, mode)` combination over `trials` channel draws.
/// Trial `t` uses the same draw for every mode and sweep value that leaves
/// the geometry unchanged, so comparisons are paired. Results are reduced in
/// trial order, so the output is independent of thread scheduling.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut points = Vec::with_capacity(config.sweep.values.len() * config.modes.len());
    for &value in &config.sweep.values {
        let params = config.sweep.parameter.apply(&config.system, value)?.to_params()?;
        let topo = build_topology(&params, &config.layout)?;
        for &mode in &config.modes {
            let outcomes: Vec<Result<TrialOutcome>> = with_workers(config.workers, || {
                (0..config.trials as u64)
                    .into_par_iter()
                    .map(|t| {
                        let chan = sample_channels(&topo, &params, trial_seed(config.seed, t));
                        let r = optimize(&chan, &params, &config.solver, mode)?;
                        let max_pi_drop = r.trajectory.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
                        Ok(TrialOutcome {
                            ee: r.metrics.aggregate_ratio(&params),
                            ee_sum_of_ratios: r.metrics.ee_total,
                            pi: r.pi,
                            total_power: r.metrics.total_power,
                            outer_iterations: r.outer_iterations,
                            converged: r.converged,
                            feasible: r.feasibility.all(),
                            max_pi_drop,
                        })
                    })
                    .collect()
            })?;
            let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
            points.push(SweepPoint::aggregate(value, mode, outcomes));
        }
    }
    let result = SweepResult {
        parameter: config.sweep.parameter,
        header: config.header(),
        points,
    };
    if let Some(path) = &config.output {
        result.write_csv(path)?;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::SweepConfig;

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.trials = 3;
        cfg.system.num_cells = 2;
        cfg.sweep = SweepConfig {
            parameter: SweepAxis::SicError,
            values: vec![0.0, 0.5],
        };
        cfg
    }

    #[test]
    fn csv_shape() {
        let r = run_sweep(&small()).unwrap();
        let csv = r.to_csv();
        let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "sweep_param,sweep_value,mode,statistic,value");
        assert_eq!(rows.len(), 1 + 2 * 2 * 9);
        assert!(rows[1].starts_with("sic_error,0,WBS,mean_ee,"));
        assert!(csv.contains("# rng=ChaCha8"));
    }

    #[test]
    fn single_trial_has_zero_std() {
        let mut cfg = small();
        cfg.trials = 1;
        let r = run_sweep(&cfg).unwrap();
        assert!(r.points.iter().all(|p| p.std_ee == 0.0 && p.trials == 1));
    }
}
