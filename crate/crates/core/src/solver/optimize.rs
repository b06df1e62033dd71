//! The full alternating optimization.
//!
//! Each outer iteration, at the current parameter `Π`:
//!
//! 1. sets every reflection coefficient (WBS only);
//! 2. runs the dual loop. Every dual iteration makes `interference_rounds`
//!    Jacobi passes, each of which snapshots the inter-cell interference and
//!    applies the PAC step and then the power step in every cell. The
//!    multipliers are then updated;
//!
//!    A PAC fixed before the power moves can pin the power: at full power the
//!    sum rate favours the C1-active PAC, and from there no lower power meets
//!    C1. So every PAC candidate is also scored with its own best-response
//!    power, and one that beats the sequential pair on the full per-cell
//!    Lagrangian (including `−ΠP`) replaces it;
//! 3. accepts the new allocation only if it raises
//!    `G(x) = ΣR − Π(ΣP + p_c)` over the allocation the iteration started
//!    from. Otherwise cells are accepted one at a time while they help.
//!    Because `G = 0` at the start, `F(Π) ≥ 0` and the sequence of `Π` never
//!    decreases even though the Jacobi sweep is only a heuristic under
//!    inter-cell coupling;
//! 4. updates `Π` and stops once `|F(Π)| ≤ tol_dinkelbach`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    check_feasibility, interference_all, link_terms_unchecked, metrics, AllocationState, CellAllocation,
    ChannelRealization, FeasibilityReport, LinkTerms, Metrics, SystemParams,
};

use super::pac::{pac_candidates, PAC_FLOOR};
use super::power::power_objective;
use super::reflection::{floor_violation, prefer};
use super::{
    dinkelbach_update, pac_step, power_step, reflection_step, update_duals, CellDuals, DinkelbachState, DualState,
    Mode, SolveConfig,
};

/// Work done by one solve.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounters {
    pub reflection_solves: u64,
    pub pac_solves: u64,
    pub power_solves: u64,
    pub dual_updates: u64,
    pub stalled_pac: u64,
    pub stalled_power: u64,
    /// Outer iterations whose Jacobi result was rejected or only partly accepted.
    pub safeguard_fallbacks: u64,
}

impl OpCounters {
    /// Per-cell closed-form solves inside the dual loop.
    pub fn cell_solves(&self) -> u64 {
        self.pac_solves + self.power_solves
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: Mode,
    /// `|F(Π)| ≤ tol_dinkelbach` was reached within `max_outer` iterations.
    pub converged: bool,
    pub allocation: AllocationState,
    pub metrics: Metrics,
    pub feasibility: FeasibilityReport,
    /// Final `ΣR/(ΣP + p_c)`.
    pub pi: f64,
    /// `F(Π)` of the last outer iteration.
    pub final_f: f64,
    /// `Π` after each outer iteration.
    pub trajectory: Vec<f64>,
    /// Sum of per-cell EE after each outer iteration.
    pub ee_trajectory: Vec<f64>,
    pub f_values: Vec<f64>,
    pub outer_iterations: usize,
    /// Dual iterations summed over all outer iterations.
    pub inner_iterations: usize,
    pub duals: DualState,
    pub counters: OpCounters,
}

/// Start point: half the power budget, PACs 0.3/0.7, reflection 0.5 (0 for NBS).
pub fn initial_allocation(num_cells: usize, params: &SystemParams, mode: Mode) -> AllocationState {
    AllocationState::uniform(
        num_cells,
        CellAllocation {
            power: params.p_max / 2.0,
            pac_near: 0.3,
            pac_far: 0.7,
            reflection: match mode {
                Mode::Wbs => 0.5,
                Mode::Nbs => 0.0,
            },
        },
    )
}

pub fn optimize(chan: &ChannelRealization, params: &SystemParams, config: &SolveConfig, mode: Mode) -> Result<SolveReport> {
    optimize_from(chan, params, config, mode, initial_allocation(chan.num_cells(), params, mode))
}

/// Clamps into C3–C6 with `Λ_j = 1 − Λ_i`.
fn project(alloc: &mut AllocationState, p_max: f64, mode: Mode) {
    for c in &mut alloc.cells {
        c.power = if c.power.is_finite() { c.power.clamp(0.0, p_max) } else { p_max };
        c.pac_near = if c.pac_near.is_finite() { c.pac_near.clamp(PAC_FLOOR, 0.5) } else { 0.3 };
        c.pac_far = 1.0 - c.pac_near;
        c.reflection = match mode {
            Mode::Wbs if c.reflection.is_finite() => c.reflection.clamp(0.0, 1.0),
            _ => 0.0,
        };
    }
}

fn parametric_value(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams, pi: f64) -> f64 {
    let rate: f64 = (0..chan.num_cells())
        .map(|k| {
            let a = &alloc.cells[k];
            let (ri, rj) = link_terms_unchecked(alloc, chan, params, k).rates(a.power, a.pac_near, a.pac_far);
            ri + rj
        })
        .sum();
    rate - pi * (alloc.total_radiated_power() + params.circuit_power)
}

/// Whether the rate floors can hold at full power for some admissible PAC.
fn floor_attainable(t: &LinkTerms, theta: f64, p_max: f64) -> bool {
    if theta == 0.0 {
        return true;
    }
    let p = p_max;
    let lo = theta * (p * t.b_near + t.c_near) / (p * (t.a_near + theta * t.b_near));
    let hi = (p * t.a_far - theta * t.c_far) / (p * (t.a_far + theta * t.b_far));
    lo.max(PAC_FLOOR) <= hi.min(0.5)
}

/// PAC step then power step, unless some other PAC candidate paired with its
/// best-response power scores strictly better.
fn cell_step(
    t: &LinkTerms,
    theta: f64,
    p_max: f64,
    cell: &CellAllocation,
    d: &CellDuals,
    pi: f64,
    counters: &mut OpCounters,
) -> (f64, f64) {
    let pac = pac_step(t, theta, cell.power, cell.pac_near, d);
    let pw = power_step(t, theta, p_max, pac.pac_near, cell.power, d, pi);
    counters.pac_solves += 1;
    counters.power_solves += 1;
    counters.stalled_pac += pac.stalled as u64;
    counters.stalled_power += pw.stalled as u64;
    let score = |x: f64, p: f64| (power_objective(t, x, d, pi, p), floor_violation(t, theta, p, x, 1.0 - x));
    let (obj, viol) = score(pac.pac_near, pw.power);
    let mut best = (pac.pac_near, pw.power, obj, viol);
    for x in pac_candidates(t, theta, cell.power, d) {
        if x == pac.pac_near {
            continue;
        }
        let p = power_step(t, theta, p_max, x, cell.power, d, pi).power;
        counters.power_solves += 1;
        let (obj, viol) = score(x, p);
        if prefer((obj, viol), (best.2, best.3)) {
            best = (x, p, obj, viol);
        }
    }
    (best.0, best.1)
}

fn primal_distance(a: &AllocationState, b: &AllocationState, p_max: f64) -> f64 {
    a.cells
        .iter()
        .zip(&b.cells)
        .map(|(x, y)| ((x.power - y.power).abs() / p_max).max((x.pac_near - y.pac_near).abs()))
        .fold(0.0, f64::max)
}

/// Runs the optimizer from a caller-supplied start point (projected onto C3–C6 first).
pub fn optimize_from(
    chan: &ChannelRealization,
    params: &SystemParams,
    config: &SolveConfig,
    mode: Mode,
    init: AllocationState,
) -> Result<SolveReport> {
    params.validate()?;
    config.validate()?;
    let k = chan.num_cells();
    if params.num_cells != k || init.num_cells() != k {
        return Err(Error::DimensionMismatch(format!(
            "params say {} cells, channel has {k}, start point has {}",
            params.num_cells,
            init.num_cells()
        )));
    }
    let theta = params.sinr_threshold();
    let p_max = params.p_max;

    let mut alloc = init;
    project(&mut alloc, p_max, mode);
    let mut duals = DualState::new(k, config.step0);
    let mut state = DinkelbachState::default();
    let mut counters = OpCounters::default();
    let mut trajectory = Vec::new();
    let mut ee_trajectory = Vec::new();
    let mut f_values = Vec::new();
    let mut inner_iterations = 0;

    for _ in 0..config.max_outer {
        let pi = state.pi;
        let start = alloc.clone();

        if mode == Mode::Wbs {
            let interf = interference_all(&alloc, chan);
            for (c, (di, dj)) in interf.into_iter().enumerate() {
                alloc.cells[c].reflection = reflection_step(chan.cell(c), params, &alloc.cells[c], di, dj);
                counters.reflection_solves += 1;
            }
        }

        let interf = interference_all(&alloc, chan);
        for c in 0..k {
            let t = LinkTerms::new(chan.cell(c), params, alloc.cells[c].reflection, interf[c].0, interf[c].1);
            duals.frozen[c] = !floor_attainable(&t, theta, p_max);
        }

        for _ in 0..config.max_dual_iters {
            let before = alloc.clone();
            for _ in 0..config.interference_rounds {
                let interf = interference_all(&alloc, chan);
                for c in 0..k {
                    let cell = alloc.cells[c];
                    let t = LinkTerms::new(chan.cell(c), params, cell.reflection, interf[c].0, interf[c].1);
                    let (pac_near, power) = cell_step(&t, theta, p_max, &cell, &duals.cells[c], pi, &mut counters);
                    alloc.cells[c] = CellAllocation {
                        power,
                        pac_near,
                        pac_far: 1.0 - pac_near,
                        reflection: cell.reflection,
                    };
                }
            }
            let next = update_duals(&duals, &alloc, chan, params)?;
            counters.dual_updates += 1;
            inner_iterations += 1;
            let dual_change = next.distance(&duals);
            duals = next;
            if dual_change <= config.tol_dual && primal_distance(&before, &alloc, p_max) <= config.tol_dual {
                break;
            }
        }

        let g_start = parametric_value(&start, chan, params, pi);
        if !(parametric_value(&alloc, chan, params, pi) >= g_start) {
            counters.safeguard_fallbacks += 1;
            let proposal = std::mem::replace(&mut alloc, start);
            let mut best = g_start;
            for c in 0..k {
                let keep = alloc.cells[c];
                alloc.cells[c] = proposal.cells[c];
                let g = parametric_value(&alloc, chan, params, pi);
                if g > best {
                    best = g;
                } else {
                    alloc.cells[c] = keep;
                }
            }
        }

        let m = metrics(&alloc, chan, params)?;
        state = dinkelbach_update(&m, &alloc, params, &state, config.tol_dinkelbach);
        trajectory.push(state.pi);
        ee_trajectory.push(m.ee_total);
        f_values.push(state.f_value);
        if state.converged {
            break;
        }
    }

    project(&mut alloc, p_max, mode);
    let m = metrics(&alloc, chan, params)?;
    let feasibility = check_feasibility(&alloc, chan, params)?;
    Ok(SolveReport {
        mode,
        converged: state.converged,
        pi: m.aggregate_ratio(params),
        metrics: m,
        feasibility,
        allocation: alloc,
        final_f: state.f_value,
        trajectory,
        ee_trajectory,
        f_values,
        outer_iterations: state.iteration,
        inner_iterations,
        duals,
        counters,
    })
}
