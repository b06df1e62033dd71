//! The optimizer: a Dinkelbach outer loop around a per-cell reflection update
//! and a dual inner loop that alternates the closed-form PAC and power steps.
//!
//! Multipliers enter the per-cell Lagrangian in rate form,
//!
//! ```text
//! L_k = (1+λ_i)R_i + (1+λ_j)R_j − Π·P(Λ_i+Λ_j) + μ(P_max − P) + ε(1 − Λ_i − Λ_j) − (λ_i+λ_j)R_min
//! ```
//!
//! which is the form whose stationarity conditions are the PAC quadratic and
//! the power quartic.

mod dinkelbach;
mod duals;
mod optimize;
mod pac;
mod power;
mod reflection;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dinkelbach::{dinkelbach_update, DinkelbachState};
pub use duals::update_duals;
pub use optimize::{optimize, optimize_from, initial_allocation, OpCounters, SolveReport};
pub use pac::{pac_quadratic, pac_stationarity, solve_pac_closed_form, PacOutcome, PAC_FLOOR};
pub use power::{power_quartic, power_stationarity, solve_source_power, PowerOutcome};
pub use reflection::{solve_reflection, ReflectionTerms};

pub(crate) use pac::pac_step;
pub(crate) use power::power_step;
pub(crate) use reflection::reflection_step;

/// With backscatter (tags reflect) or the pure-NOMA baseline (`Φ ≡ 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "WBS")]
    Wbs,
    #[serde(rename = "NBS")]
    Nbs,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Wbs => "WBS",
            Mode::Nbs => "NBS",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WBS" => Ok(Mode::Wbs),
            "NBS" => Ok(Mode::Nbs),
            _ => Err(Error::invalid("mode", format!("expected WBS or NBS, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    /// Outer loop stops once `|F(Π)|` falls below this.
    pub tol_dinkelbach: f64,
    /// Dual loop stops once multipliers and primal variables move less than this.
    pub tol_dual: f64,
    pub max_outer: usize,
    pub max_dual_iters: usize,
    /// `δ₀` of the step schedule `δ(t) = δ₀/√t`.
    pub step0: f64,
    /// Jacobi passes per dual iteration, each refreshing the interference.
    pub interference_rounds: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            tol_dinkelbach: 1e-6,
            tol_dual: 1e-5,
            max_outer: 50,
            max_dual_iters: 500,
            step0: 0.1,
            interference_rounds: 5,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_dinkelbach > 0.0) {
            return Err(Error::invalid("tol_dinkelbach", "must be positive"));
        }
        if !(self.tol_dual > 0.0) {
            return Err(Error::invalid("tol_dual", "must be positive"));
        }
        if self.max_outer == 0 || self.max_dual_iters == 0 || self.interference_rounds == 0 {
            return Err(Error::invalid("max_outer", "iteration limits must be at least 1"));
        }
        // δ₀ = 0 is allowed: it freezes the multipliers
        if !(self.step0.is_finite() && self.step0 >= 0.0) {
            return Err(Error::invalid("step0", "must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Multipliers of one cell.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CellDuals {
    /// Near-device rate floor (C1).
    pub lambda_near: f64,
    /// Far-device rate floor (C2).
    pub lambda_far: f64,
    /// Power budget (C4).
    pub mu: f64,
    /// PAC budget (C5).
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    pub cells: Vec<CellDuals>,
    /// Number of updates performed so far.
    pub step_index: u64,
    pub step0: f64,
    /// Cells whose rate floor cannot be met at full power; their multipliers
    /// would otherwise grow without bound.
    pub frozen: Vec<bool>,
}

impl DualState {
    pub fn new(num_cells: usize, step0: f64) -> Self {
        DualState {
            cells: vec![CellDuals::default(); num_cells],
            step_index: 0,
            step0,
            frozen: vec![false; num_cells],
        }
    }

    /// Step size `δ₀/√t` of the next update.
    pub fn next_step_size(&self) -> f64 {
        self.step0 / ((self.step_index + 1) as f64).sqrt()
    }

    /// ∞-norm distance between two multiplier sets.
    pub fn distance(&self, other: &DualState) -> f64 {
        self.cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| {
                (a.lambda_near - b.lambda_near)
                    .abs()
                    .max((a.lambda_far - b.lambda_far).abs())
                    .max((a.mu - b.mu).abs())
                    .max((a.epsilon - b.epsilon).abs())
            })
            .fold(0.0, f64::max)
    }
}
