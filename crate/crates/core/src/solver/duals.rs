//! Projected subgradient step on the multipliers.
//!
//! Each multiplier moves against its constraint slack and is projected back
//! onto `[0, ∞)`:
//!
//! ```text
//! λ_i ← [λ_i − δ(t)·(R_i − R_min)]⁺      λ_j ← [λ_j − δ(t)·(R_j − R_min)]⁺
//! ε   ← [ε   − δ(t)·(1 − Λ_i − Λ_j)]⁺    μ   ← [μ   − δ(t)·(P_max − P)]⁺
//! ```
//!
//! A satisfied constraint therefore drives its multiplier towards zero and a
//! violated one raises it. Slacks of the rate floors are in bits, which has
//! the sign of the SINR form and keeps all four slacks of order one.

use crate::error::{Error, Result};
use crate::model::{link_terms_unchecked, AllocationState, ChannelRealization, SystemParams};

use super::DualState;

pub fn update_duals(
    duals: &DualState,
    alloc: &AllocationState,
    chan: &ChannelRealization,
    params: &SystemParams,
) -> Result<DualState> {
    if alloc.num_cells() != chan.num_cells() || duals.cells.len() != chan.num_cells() {
        return Err(Error::DimensionMismatch("allocation, duals and channel disagree on cell count".into()));
    }
    let mut next = duals.clone();
    let delta = duals.next_step_size();
    next.step_index += 1;
    for (k, (d, a)) in next.cells.iter_mut().zip(&alloc.cells).enumerate() {
        if duals.frozen[k] {
            continue;
        }
        let (ri, rj) = link_terms_unchecked(alloc, chan, params, k).rates(a.power, a.pac_near, a.pac_far);
        d.lambda_near = (d.lambda_near - delta * (ri - params.r_min)).max(0.0);
        d.lambda_far = (d.lambda_far - delta * (rj - params.r_min)).max(0.0);
        d.epsilon = (d.epsilon - delta * (1.0 - a.pac_near - a.pac_far)).max(0.0);
        d.mu = (d.mu - delta * (params.p_max - a.power)).max(0.0);
    }
    Ok(next)
}
