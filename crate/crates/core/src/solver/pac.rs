//! Power-allocation-coefficient update for one cell at fixed source power.
//!
//! With `Λ_j = 1 − Λ_i` the power term `Π·P(Λ_i+Λ_j)` is constant, so the
//! step maximizes `(1+λ_i)R_i + (1+λ_j)R_j` over `Λ_i ∈ [1e-4, 0.5]`. Writing
//! `x = Λ_i`, the derivative has the sign of the quadratic `a·x² + b·x + c`.
//! Rates are not concave in `x`, so every real root is a candidate alongside
//! the interval ends and the points where C1 or C2 turn active; C1 bounds `x`
//! from below and C2 from above.

use crate::error::{Error, Result};
use crate::model::{link_terms_unchecked, AllocationState, ChannelRealization, LinkTerms, SystemParams};
use crate::polyroots::real_roots_into;

use super::reflection::{floor_violation, prefer};
use super::{CellDuals, DualState};

/// Smallest near-device PAC considered; the interval is open at zero.
pub const PAC_FLOOR: f64 = 1e-4;
/// Largest near-device PAC, where C3 turns active.
const PAC_CEIL: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacOutcome {
    pub pac_near: f64,
    pub pac_far: f64,
    /// No candidate improved on the previous iterate, which is returned.
    pub stalled: bool,
    /// Both rate floors hold at the returned point.
    pub feasible: bool,
}

/// Coefficients `(a, b, c)` of the PAC stationarity quadratic in `x = Λ_i`.
pub fn pac_quadratic(t: &LinkTerms, power: f64, duals: &CellDuals) -> (f64, f64, f64) {
    let (ai, bi, ci) = (t.a_near, t.b_near, t.c_near);
    let (aj, bj, cj) = (t.a_far, t.b_far, t.c_far);
    let (li, lj) = (duals.lambda_near, duals.lambda_far);
    let p = power;
    let ni = ci + bi * p;
    let nj = cj + bj * p;
    let a = p * p
        * (-ai * aj * bj * (1.0 + li) * ni + ai * bj * bj * (1.0 + li) * ni + ai * aj * bi * (1.0 + lj) * nj
            - aj * bi * bi * (1.0 + lj) * nj);
    let b = p
        * ni
        * (-ai * cj * (-2.0 * bj * (1.0 + li) + aj * (2.0 + li + lj))
            + ai * aj * bj * (li - lj) * p
            + 2.0 * aj * bi * (1.0 + lj) * nj);
    let c = ni
        * (ai * cj * cj * (1.0 + li)
            + aj * (-ci * (1.0 + lj) * nj + p * (ai * cj * (1.0 + li) - bi * (1.0 + lj) * nj)));
    (a, b, c)
}

/// The same stationarity condition in product form,
/// `(1+λ_i)A_i(PB_i+C_i)·T_jV_j − (1+λ_j)A_j(PB_j+C_j)·T_iV_i`, where
/// `T/V` are the numerator and denominator of `1+γ`.
pub fn pac_stationarity(t: &LinkTerms, power: f64, duals: &CellDuals, x: f64) -> f64 {
    let p = power;
    let ti = p * (x * t.a_near + (1.0 - x) * t.b_near) + t.c_near;
    let vi = p * (1.0 - x) * t.b_near + t.c_near;
    let tj = p * ((1.0 - x) * t.a_far + x * t.b_far) + t.c_far;
    let vj = p * x * t.b_far + t.c_far;
    (1.0 + duals.lambda_near) * t.a_near * (p * t.b_near + t.c_near) * tj * vj
        - (1.0 + duals.lambda_far) * t.a_far * (p * t.b_far + t.c_far) * ti * vi
}

pub(crate) fn pac_objective(t: &LinkTerms, power: f64, duals: &CellDuals, x: f64) -> f64 {
    let (ri, rj) = t.rates(power, x, 1.0 - x);
    (1.0 + duals.lambda_near) * ri + (1.0 + duals.lambda_far) * rj
}

/// Interval ends, real roots of the quadratic and the C1/C2-active PACs at
/// `power`, clamped to `[PAC_FLOOR, 0.5]`, ascending and deduplicated.
pub(crate) fn pac_candidates(t: &LinkTerms, theta: f64, power: f64, duals: &CellDuals) -> Vec<f64> {
    let (a, b, c) = pac_quadratic(t, power, duals);
    let mut cand = [f64::NAN; 6];
    cand[0] = PAC_FLOOR;
    cand[1] = PAC_CEIL;
    if let Ok(roots) = real_roots_into(&[c, b, a]) {
        for (slot, &r) in cand[2..4].iter_mut().zip(roots.as_slice()) {
            *slot = r;
        }
    }
    if theta > 0.0 && power > 0.0 {
        cand[4] = theta * (power * t.b_near + t.c_near) / (power * (t.a_near + theta * t.b_near));
        cand[5] = (power * t.a_far - theta * t.c_far) / (power * (t.a_far + theta * t.b_far));
    }
    let mut list: Vec<f64> = cand
        .into_iter()
        .filter(|x| x.is_finite())
        .map(|x| x.clamp(PAC_FLOOR, PAC_CEIL))
        .collect();
    list.sort_by(f64::total_cmp);
    list.dedup();
    list
}

pub(crate) fn pac_step(t: &LinkTerms, theta: f64, power: f64, previous: f64, duals: &CellDuals) -> PacOutcome {
    let list = pac_candidates(t, theta, power, duals);

    let score = |x: f64| {
        (
            pac_objective(t, power, duals, x),
            floor_violation(t, theta, power, x, 1.0 - x),
        )
    };
    let mut best = (f64::NAN, f64::NEG_INFINITY, f64::INFINITY);
    for x in list {
        let (obj, viol) = score(x);
        if best.0.is_nan() || prefer((obj, viol), (best.1, best.2)) {
            best = (x, obj, viol);
        }
    }
    let mut stalled = false;
    if previous.is_finite() && (PAC_FLOOR..=PAC_CEIL).contains(&previous) {
        let (obj, viol) = score(previous);
        if prefer((obj, viol), (best.1, best.2)) {
            best = (previous, obj, viol);
            stalled = true;
        }
    }
    PacOutcome {
        pac_near: best.0,
        pac_far: 1.0 - best.0,
        stalled,
        feasible: best.2 == 0.0,
    }
}

/// PAC update of `cell` with its power, reflection and the interference
/// implied by `alloc` held fixed.
pub fn solve_pac_closed_form(
    chan: &ChannelRealization,
    params: &SystemParams,
    alloc: &AllocationState,
    duals: &DualState,
    cell: usize,
) -> Result<PacOutcome> {
    if alloc.num_cells() != chan.num_cells() || duals.cells.len() != chan.num_cells() {
        return Err(Error::DimensionMismatch("allocation, duals and channel disagree on cell count".into()));
    }
    if cell >= chan.num_cells() {
        return Err(Error::CellOutOfRange {
            index: cell,
            num_cells: chan.num_cells(),
        });
    }
    let t = link_terms_unchecked(alloc, chan, params, cell);
    let a = &alloc.cells[cell];
    Ok(pac_step(&t, params.sinr_threshold(), a.power, a.pac_near, &duals.cells[cell]))
}
