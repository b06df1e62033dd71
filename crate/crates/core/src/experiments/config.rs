use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{LayoutConfig, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::model::{dbm_to_watts, SystemParams};
use crate::solver::{Mode, SolveConfig};

/// System parameters as written in a config file: the power budget in dBm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemConfig {
    pub noise_variance: f64,
    pub sic_error: f64,
    pub circuit_power: f64,
    pub p_max_dbm: f64,
    pub r_min: f64,
    pub path_loss_exp: f64,
    pub num_cells: usize,
}

impl Default for SystemConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        SystemConfig {
            noise_variance: p.noise_variance,
            sic_error: p.sic_error,
            circuit_power: p.circuit_power,
            p_max_dbm: 32.0,
            r_min: p.r_min,
            path_loss_exp: p.path_loss_exp,
            num_cells: p.num_cells,
        }
    }
}

impl SystemConfig {
    pub fn to_params(&self) -> Result<SystemParams> {
        if !self.p_max_dbm.is_finite() {
            return Err(Error::invalid("p_max_dbm", "must be finite"));
        }
        let p = SystemParams {
            noise_variance: self.noise_variance,
            sic_error: self.sic_error,
            circuit_power: self.circuit_power,
            p_max: dbm_to_watts(self.p_max_dbm),
            r_min: self.r_min,
            path_loss_exp: self.path_loss_exp,
            num_cells: self.num_cells,
        };
        p.validate()?;
        Ok(p)
    }
}

/// A parameter that a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SweepAxis {
    PMaxDbm,
    SicError,
    CircuitPower,
    RMin,
    NumCells,
    PathLossExp,
    NoiseVariance,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 7] = [
        SweepAxis::PMaxDbm,
        SweepAxis::SicError,
        SweepAxis::CircuitPower,
        SweepAxis::RMin,
        SweepAxis::NumCells,
        SweepAxis::PathLossExp,
        SweepAxis::NoiseVariance,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::PMaxDbm => "p_max_dbm",
            SweepAxis::SicError => "sic_error",
            SweepAxis::CircuitPower => "circuit_power",
            SweepAxis::RMin => "r_min",
            SweepAxis::NumCells => "num_cells",
            SweepAxis::PathLossExp => "path_loss_exp",
            SweepAxis::NoiseVariance => "noise_variance",
        }
    }

    /// `base` with this parameter set to `value`.
    pub fn apply(&self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        let mut s = *base;
        match self {
            SweepAxis::PMaxDbm => s.p_max_dbm = value,
            SweepAxis::SicError => s.sic_error = value,
            SweepAxis::CircuitPower => s.circuit_power = value,
            SweepAxis::RMin => s.r_min = value,
            SweepAxis::PathLossExp => s.path_loss_exp = value,
            SweepAxis::NoiseVariance => s.noise_variance = value,
            SweepAxis::NumCells => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::invalid("num_cells", format!("sweep value {value} is not a positive integer")));
                }
                s.num_cells = value as usize;
            }
        }
        s.to_params()?;
        Ok(s)
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axis = match s {
            "p_max_dbm" | "p_max" => SweepAxis::PMaxDbm,
            "sic_error" | "beta" => SweepAxis::SicError,
            "circuit_power" | "p_c" => SweepAxis::CircuitPower,
            "r_min" => SweepAxis::RMin,
            "num_cells" | "k" => SweepAxis::NumCells,
            "path_loss_exp" => SweepAxis::PathLossExp,
            "noise_variance" => SweepAxis::NoiseVariance,
            _ => {
                return Err(Error::Config(format!(
                    "unknown sweep parameter {s:?}; expected one of {}",
                    SweepAxis::ALL.map(|a| a.name()).join(", ")
                )))
            }
        };
        Ok(axis)
    }
}

impl TryFrom<String> for SweepAxis {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SweepAxis> for String {
    fn from(a: SweepAxis) -> String {
        a.name().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub parameter: SweepAxis,
    pub values: Vec<f64>,
}

impl Default for SweepConfig {
    /// 0 to 32 dBm in 4 dB steps.
    fn default() -> Self {
        SweepConfig {
            parameter: SweepAxis::PMaxDbm,
            values: (0..=8).map(|i| 4.0 * i as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConvergenceConfig {
    /// Cell counts traced by `emit_convergence`.
    pub cells: Vec<usize>,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { cells: vec![1, 5, 10] }
    }
}

/// Everything a sweep or trace needs. Loadable from TOML; every field has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub layout: LayoutConfig,
    pub solver: SolveConfig,
    pub sweep: SweepConfig,
    pub convergence: ConvergenceConfig,
    pub trials: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    /// Worker threads for trials; 0 uses all available cores.
    pub workers: usize,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemConfig::default(),
            layout: LayoutConfig::default(),
            solver: SolveConfig::default(),
            sweep: SweepConfig::default(),
            convergence: ConvergenceConfig::default(),
            trials: 100,
            seed: 1,
            modes: vec![Mode::Wbs, Mode::Nbs],
            workers: 0,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.system.to_params()?;
        self.layout.validate()?;
        self.solver.validate()?;
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.modes.is_empty() {
            return Err(Error::invalid("modes", "at least one mode required"));
        }
        for &v in &self.sweep.values {
            self.sweep.parameter.apply(&self.system, v)?;
        }
        if self.convergence.cells.contains(&0) {
            return Err(Error::invalid("convergence.cells", "cell counts must be at least 1"));
        }
        Ok(())
    }

    /// `key=value` lines recording every setting and modelling assumption.
    pub fn header(&self) -> Vec<(String, String)> {
        let s = &self.system;
        let l = &self.layout;
        let c = &self.solver;
        let mut h: Vec<(String, String)> = vec![
            ("generator".into(), format!("noma-bsc {}", env!("CARGO_PKG_VERSION"))),
            ("system.noise_variance_w".into(), s.noise_variance.to_string()),
            ("system.sic_error".into(), s.sic_error.to_string()),
            ("system.circuit_power_w".into(), s.circuit_power.to_string()),
            ("system.p_max_dbm".into(), s.p_max_dbm.to_string()),
            ("system.p_max_w".into(), dbm_to_watts(s.p_max_dbm).to_string()),
            ("system.r_min_bps_hz".into(), s.r_min.to_string()),
            ("system.path_loss_exp".into(), s.path_loss_exp.to_string()),
            ("system.num_cells".into(), s.num_cells.to_string()),
            ("layout.spacing_m".into(), l.spacing.to_string()),
            ("layout.d_near_m".into(), l.d_near.to_string()),
            ("layout.d_far_m".into(), l.d_far.to_string()),
            ("layout.d_tag_m".into(), l.d_tag.to_string()),
            ("layout.d_tag_near_m".into(), l.d_tag_near.to_string()),
            ("layout.d_tag_far_m".into(), l.d_tag_far.to_string()),
            ("layout.grid".into(), "sources on a ceil(sqrt(K))-wide square grid; devices opposite each other at golden-angle orientations".into()),
            ("solver.tol_dinkelbach".into(), c.tol_dinkelbach.to_string()),
            ("solver.tol_dual".into(), c.tol_dual.to_string()),
            ("solver.max_outer".into(), c.max_outer.to_string()),
            ("solver.max_dual_iters".into(), c.max_dual_iters.to_string()),
            ("solver.step0".into(), c.step0.to_string()),
            ("solver.step_schedule".into(), "delta(t) = step0 / sqrt(t), t counted over the whole solve".into()),
            ("solver.interference_rounds".into(), c.interference_rounds.to_string()),
            ("solver.init".into(), "P = P_max/2, pac = (0.3, 0.7), reflection = 0.5 (0 for NBS), multipliers 0, Pi = 0".into()),
            ("experiment.trials".into(), self.trials.to_string()),
            ("experiment.seed".into(), self.seed.to_string()),
            ("experiment.trial_seed".into(), "seed XOR trial index".into()),
            ("experiment.modes".into(), self.modes.iter().map(Mode::to_string).collect::<Vec<_>>().join(";")),
            ("experiment.sweep_parameter".into(), self.sweep.parameter.to_string()),
            (
                "experiment.sweep_values".into(),
                self.sweep.values.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
            ),
            ("rng".into(), RNG_ALGORITHM.into()),
        ];
        let assumptions = [
            ("fading", "squared gain = Exp(1) * d^-path_loss_exp; tag cascade = product of source-tag and tag-device gains"),
            ("user_ordering", "device with the larger direct gain is labelled near in every cell"),
            ("interference", "per-interferer sum of P_k' * cross gain"),
            ("ee_metric", "mean_ee = sum R_k / (sum P_k(pac_near+pac_far) + p_c); mean_ee_sum_of_ratios = sum over cells of R_k / (P_k(pac_near+pac_far) + p_c)"),
            ("dinkelbach_ratio", "Pi = sum R_k / (sum P_k(pac_near+pac_far) + p_c)"),
            ("lagrangian", "rate form: (1+lambda_near)R_near + (1+lambda_far)R_far - Pi*P + mu(P_max-P) + eps(1-sum pac)"),
            ("dual_update", "projected descent: multiplier <- max(0, multiplier - delta*slack); rate slacks in bits"),
            ("pac_quadratic.b", "inner factor (2 + lambda_near + lambda_far)"),
            ("pac_quadratic.c", "last term weighted by (1 + lambda_far)"),
            ("power_quartic.tau", "Ci*Cj*(-Aj*Ci*(L-1)*(1+lambda_far) + Cj*(Ai*L*(1+lambda_near) - Ci*m))"),
            ("power_quartic.m", "ln(2)*(mu + Pi), rates in bits"),
            ("candidates", "stationary roots, interval ends and rate-floor-active points; best feasible by Lagrangian"),
            ("cell_step", "each PAC candidate is also scored with its best-response power on the full per-cell Lagrangian"),
            ("safeguard", "outer step accepted only if it raises sum R - Pi*(sum P + p_c); else per-cell acceptance"),
            ("infeasible_cells", "cells that cannot meet R_min at P_max keep frozen multipliers and minimise the violation"),
        ];
        h.extend(assumptions.into_iter().map(|(k, v)| (format!("assumption.{k}"), v.to_string())));
        h
    }
}
