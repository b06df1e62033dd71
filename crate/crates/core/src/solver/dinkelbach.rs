//! The fractional-programming parameter update.
//!
//! For a fixed allocation the parametric residual is
//! `F(Π) = ΣR_k − Π·(ΣP_k(Λ_i+Λ_j) + p_c)`; the next parameter is the ratio
//! itself, and `F = 0` exactly at the optimum.

use serde::{Deserialize, Serialize};

use crate::model::{AllocationState, Metrics, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DinkelbachState {
    /// `Π` for the next outer iteration.
    pub pi: f64,
    /// `F` evaluated at the parameter that produced this allocation.
    pub f_value: f64,
    pub iteration: usize,
    pub converged: bool,
}

impl Default for DinkelbachState {
    fn default() -> Self {
        DinkelbachState {
            pi: 0.0,
            f_value: f64::INFINITY,
            iteration: 0,
            converged: false,
        }
    }
}

/// One parameter update from the allocation produced under `state.pi`.
pub fn dinkelbach_update(
    metrics: &Metrics,
    alloc: &AllocationState,
    params: &SystemParams,
    state: &DinkelbachState,
    tol: f64,
) -> DinkelbachState {
    let denom = alloc.total_radiated_power() + params.circuit_power;
    let f_value = metrics.sum_rate - state.pi * denom;
    DinkelbachState {
        pi: metrics.sum_rate / denom,
        f_value,
        iteration: state.iteration + 1,
        converged: f_value.abs() <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CellAllocation, CellRates};

    fn fixture(rate: f64, power: f64) -> (Metrics, AllocationState, SystemParams) {
        let params = SystemParams {
            circuit_power: 1.0,
            num_cells: 1,
            ..SystemParams::default()
        };
        let alloc = AllocationState::uniform(
            1,
            CellAllocation {
                power,
                pac_near: 0.25,
                pac_far: 0.75,
                reflection: 0.0,
            },
        );
        let m = Metrics {
            cells: vec![CellRates {
                rate_near: rate / 2.0,
                rate_far: rate / 2.0,
                rate_sum: rate,
            }],
            ee_total: rate / (power + 1.0),
            sum_rate: rate,
            total_power: power,
        };
        (m, alloc, params)
    }

    #[test]
    fn exact_ratio_is_converged() {
        let (m, a, p) = fixture(2.0, 1.0);
        let s = DinkelbachState {
            pi: 1.0,
            ..DinkelbachState::default()
        };
        let next = dinkelbach_update(&m, &a, &p, &s, 1e-6);
        assert_eq!(next.pi, 1.0);
        assert_eq!(next.f_value, 0.0);
        assert!(next.converged);
    }

    #[test]
    fn zero_parameter_gives_sum_rate() {
        let (m, a, p) = fixture(3.0, 0.5);
        let next = dinkelbach_update(&m, &a, &p, &DinkelbachState::default(), 1e-6);
        assert_eq!(next.f_value, 3.0);
        assert!(!next.converged);
    }

    #[test]
    fn fixed_allocation_reaches_fixed_point_in_one_step() {
        let (m, a, p) = fixture(3.0, 0.5);
        let once = dinkelbach_update(&m, &a, &p, &DinkelbachState::default(), 1e-6);
        let twice = dinkelbach_update(&m, &a, &p, &once, 1e-6);
        assert!(twice.f_value.abs() < 1e-15);
        assert_eq!(twice.pi, once.pi);
    }
}
