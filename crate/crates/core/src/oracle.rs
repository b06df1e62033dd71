//! Exhaustive grid search over `(P, Λ_i, Φ)` per cell, used as ground truth.
//!
//! Grids are uniform and include both ends: `P ∈ [0, P_max]`,
//! `Λ_i ∈ [1e-4, 0.5]` with `Λ_j = 1 − Λ_i`, and `Φ ∈ [0, 1]` (only `Φ = 0`
//! for NBS). Halving every spacing (`n → 2n − 1` points) nests the old grid in
//! the new one, so refinement never lowers the optimum found. Points that miss
//! a rate floor are skipped. The score is the sum of per-cell EE.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{metrics, AllocationState, CellAllocation, ChannelRealization, LinkTerms, SystemParams};
use crate::solver::{Mode, PAC_FLOOR};

/// Largest number of joint allocations a multi-cell search may visit.
const MAX_JOINT_POINTS: u128 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub n_power: usize,
    pub n_pac: usize,
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n_power: 200,
            n_pac: 200,
            n_phi: 100,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_power < 2 || self.n_pac < 2 || self.n_phi < 2 {
            return Err(Error::invalid("grid", "every resolution must be at least 2"));
        }
        Ok(())
    }

    /// Every spacing halved.
    pub fn refined(&self) -> Self {
        GridSpec {
            n_power: 2 * self.n_power - 1,
            n_pac: 2 * self.n_pac - 1,
            n_phi: 2 * self.n_phi - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub allocation: AllocationState,
    /// Sum of per-cell EE at the best point.
    pub ee: f64,
    pub evaluated: u64,
    pub feasible_points: u64,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

struct Axes {
    power: Vec<f64>,
    pac: Vec<f64>,
    phi: Vec<f64>,
}

impl Axes {
    fn new(params: &SystemParams, grid: &GridSpec, mode: Mode) -> Self {
        Axes {
            power: linspace(0.0, params.p_max, grid.n_power),
            pac: linspace(PAC_FLOOR, 0.5, grid.n_pac),
            phi: match mode {
                Mode::Wbs => linspace(0.0, 1.0, grid.n_phi),
                Mode::Nbs => vec![0.0],
            },
        }
    }

    fn per_cell(&self) -> usize {
        self.power.len() * self.pac.len() * self.phi.len()
    }

    fn point(&self, idx: usize) -> CellAllocation {
        let n_phi = self.phi.len();
        let n_pac = self.pac.len();
        let x = self.pac[(idx / n_phi) % n_pac];
        CellAllocation {
            power: self.power[idx / (n_phi * n_pac)],
            pac_near: x,
            pac_far: 1.0 - x,
            reflection: self.phi[idx % n_phi],
        }
    }
}

/// Best of two `(score, index)` pairs; the lower index wins ties so the
/// result does not depend on how the work was split.
fn better(a: Option<(f64, usize)>, b: Option<(f64, usize)>) -> Option<(f64, usize)> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn single_cell(chan: &ChannelRealization, params: &SystemParams, axes: &Axes) -> (Option<(f64, usize)>, u64) {
    let theta = params.sinr_threshold();
    let gains = chan.cell(0);
    let block = axes.pac.len() * axes.phi.len();
    let per_power: Vec<(Option<(f64, usize)>, u64)> = (0..axes.power.len())
        .into_par_iter()
        .map(|ip| {
            let p = axes.power[ip];
            let mut best = None;
            let mut feasible = 0;
            for (iphi, &phi) in axes.phi.iter().enumerate() {
                let t = LinkTerms::new(gains, params, phi, 0.0, 0.0);
                for (ix, &x) in axes.pac.iter().enumerate() {
                    let (li, lj) = (x, 1.0 - x);
                    let ok = p * li * t.a_near >= theta * (p * lj * t.b_near + t.c_near)
                        && p * lj * t.a_far >= theta * (p * li * t.b_far + t.c_far);
                    if !ok {
                        continue;
                    }
                    feasible += 1;
                    let (ri, rj) = t.rates(p, li, lj);
                    let ee = (ri + rj) / (p * (li + lj) + params.circuit_power);
                    let idx = ip * block + ix * axes.phi.len() + iphi;
                    best = better(best, Some((ee, idx)));
                }
            }
            (best, feasible)
        })
        .collect();
    per_power
        .into_iter()
        .fold((None, 0), |(b, n), (x, m)| (better(b, x), n + m))
}

fn multi_cell(chan: &ChannelRealization, params: &SystemParams, axes: &Axes) -> Result<(Option<(f64, Vec<usize>)>, u64)> {
    let k = chan.num_cells();
    let n = axes.per_cell();
    if (n as u128).checked_pow(k as u32).is_none_or(|t| t > MAX_JOINT_POINTS) {
        return Err(Error::invalid("grid", format!("{n}^{k} joint points exceed the search budget; use a coarser grid")));
    }
    let mut idx = vec![0usize; k];
    let mut alloc = AllocationState::uniform(k, axes.point(0));
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut feasible = 0u64;
    loop {
        for (c, &i) in idx.iter().enumerate() {
            alloc.cells[c] = axes.point(i);
        }
        let report = crate::model::check_feasibility(&alloc, chan, params)?;
        if report.cells.iter().all(|c| c.c1 && c.c2) {
            feasible += 1;
            let ee = metrics(&alloc, chan, params)?.ee_total;
            if best.as_ref().is_none_or(|b| ee > b.0) {
                best = Some((ee, idx.clone()));
            }
        }
        // odometer increment
        let mut c = 0;
        loop {
            if c == k {
                return Ok((best, feasible));
            }
            idx[c] += 1;
            if idx[c] < n {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Best allocation on the grid. Single-cell instances use the full default
/// grid; multi-cell instances enumerate the joint product and need coarse grids.
pub fn grid_search(chan: &ChannelRealization, params: &SystemParams, grid: &GridSpec, mode: Mode) -> Result<OracleResult> {
    params.validate()?;
    grid.validate()?;
    let axes = Axes::new(params, grid, mode);
    let k = chan.num_cells();
    let evaluated = (axes.per_cell() as u64).saturating_pow(k as u32);
    let (cells, ee, feasible_points) = if k == 1 {
        let (best, feasible) = single_cell(chan, params, &axes);
        let (ee, idx) = best.ok_or(Error::Infeasible)?;
        (vec![axes.point(idx)], ee, feasible)
    } else {
        let (best, feasible) = multi_cell(chan, params, &axes)?;
        let (ee, idx) = best.ok_or(Error::Infeasible)?;
        (idx.into_iter().map(|i| axes.point(i)).collect(), ee, feasible)
    };
    Ok(OracleResult {
        allocation: AllocationState { cells },
        ee,
        evaluated,
        feasible_points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellGains;

    fn chan() -> ChannelRealization {
        ChannelRealization::single_cell(CellGains {
            g_near: 0.05,
            g_far: 0.004,
            g_src_tag: 0.1,
            g_tag_near: 0.05,
            g_tag_far: 0.004,
        })
        .unwrap()
    }

    fn params() -> SystemParams {
        SystemParams {
            num_cells: 1,
            ..SystemParams::default()
        }
    }

    const SMALL: GridSpec = GridSpec {
        n_power: 21,
        n_pac: 21,
        n_phi: 11,
    };

    #[test]
    fn huge_rate_floor_is_infeasible() {
        let p = SystemParams {
            r_min: 40.0,
            ..params()
        };
        assert!(matches!(grid_search(&chan(), &p, &SMALL, Mode::Wbs), Err(Error::Infeasible)));
    }

    #[test]
    fn nbs_collapses_reflection_axis() {
        let r = grid_search(&chan(), &params(), &SMALL, Mode::Nbs).unwrap();
        assert_eq!(r.evaluated, 21 * 21);
        assert_eq!(r.allocation.cells[0].reflection, 0.0);
    }

    #[test]
    fn refinement_never_decreases() {
        let coarse = grid_search(&chan(), &params(), &SMALL, Mode::Wbs).unwrap();
        let fine = grid_search(&chan(), &params(), &SMALL.refined(), Mode::Wbs).unwrap();
        assert!(fine.ee >= coarse.ee);
    }

    #[test]
    fn best_point_is_feasible() {
        let p = SystemParams {
            r_min: 1.0,
            ..params()
        };
        let r = grid_search(&chan(), &p, &SMALL, Mode::Wbs).unwrap();
        assert!(crate::model::check_feasibility(&r.allocation, &chan(), &p).unwrap().all());
    }

    #[test]
    fn two_cells_coarse_grid() {
        let g = *chan().cell(0);
        let two = ChannelRealization::new(vec![g, g], vec![0.0, 1e-5, 1e-5, 0.0], vec![0.0, 1e-5, 1e-5, 0.0]).unwrap();
        let p = SystemParams {
            num_cells: 2,
            ..SystemParams::default()
        };
        let grid = GridSpec {
            n_power: 6,
            n_pac: 5,
            n_phi: 2,
        };
        let r = grid_search(&two, &p, &grid, Mode::Wbs).unwrap();
        assert_eq!(r.evaluated, 60 * 60);
        assert!(r.ee > 0.0);
    }
}
