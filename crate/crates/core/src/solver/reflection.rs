//! Reflection-coefficient update.
//!
//! With `P`, `Λ_i`, `Λ_j` fixed, both rate floors are affine in `Φ`:
//!
//! ```text
//! C1:  X_i + Φ·Y_i ≥ θ·Z_i     X_i = PΛ_i g_near,  Y_i = PΛ_i G_i,  Z_i = PΛ_j β g_near + Δ_i + σ²
//! C2:  X_j + Φ·Y_j ≥ θ·Z_j     X_j = (PΛ_j − θPΛ_i) g_far,  Y_j = (PΛ_j − θPΛ_i) G_j,  Z_j = Δ_j + σ²
//! ```
//!
//! so the feasible set is an interval whose ends are among `{0, 1, Φ_C1, Φ_C2}`.
//! `R_k` is concave and nondecreasing in `Φ`, hence the best feasible
//! candidate is optimal. `Φ` never enters the power consumption, so the
//! Dinkelbach parameter plays no role here.

use crate::error::{Error, Result};
use crate::model::{interference_all, AllocationState, CellAllocation, CellGains, ChannelRealization, LinkTerms, SystemParams};

/// Relative slack allowed when testing a rate floor at a point computed to
/// sit exactly on it.
pub(crate) const ACTIVE_TOL: f64 = 1e-10;

/// The affine pieces of C1 and C2 as functions of `Φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionTerms {
    pub x_near: f64,
    pub y_near: f64,
    pub z_near: f64,
    pub x_far: f64,
    pub y_far: f64,
    pub z_far: f64,
}

impl ReflectionTerms {
    pub fn new(
        gains: &CellGains,
        params: &SystemParams,
        alloc: &CellAllocation,
        interference_near: f64,
        interference_far: f64,
    ) -> Self {
        let theta = params.sinr_threshold();
        let (p, li, lj) = (alloc.power, alloc.pac_near, alloc.pac_far);
        let far_share = p * lj - theta * p * li;
        ReflectionTerms {
            x_near: p * li * gains.g_near,
            y_near: p * li * gains.cascade_near(),
            z_near: p * lj * params.sic_error * gains.g_near + interference_near + params.noise_variance,
            x_far: far_share * gains.g_far,
            y_far: far_share * gains.cascade_far(),
            z_far: interference_far + params.noise_variance,
        }
    }

    /// `Φ` at which C1 holds with equality; `None` when the cascade is absent.
    pub fn active_near(&self, theta: f64) -> Option<f64> {
        (self.y_near != 0.0).then(|| (theta * self.z_near - self.x_near) / self.y_near)
    }

    /// `Φ` at which C2 holds with equality.
    pub fn active_far(&self, theta: f64) -> Option<f64> {
        (self.y_far != 0.0).then(|| (theta * self.z_far - self.x_far) / self.y_far)
    }
}

/// Amount by which the rate floors are missed at `(P, Λ_i, Λ_j)`, in SINR
/// units; 0 when both hold.
pub(crate) fn floor_violation(t: &LinkTerms, theta: f64, power: f64, pac_near: f64, pac_far: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let gi = t.sinr_near(power, pac_near, pac_far);
    let gj = t.sinr_far(power, pac_near, pac_far);
    let need = theta * (1.0 - ACTIVE_TOL);
    (need - gi).max(need - gj).max(0.0)
}

/// Candidate ranking shared by all per-cell steps: feasible beats infeasible,
/// feasible candidates compare by objective, infeasible ones by violation.
/// Ties keep the incumbent.
pub(crate) fn prefer((obj, viol): (f64, f64), (best_obj, best_viol): (f64, f64)) -> bool {
    match (viol == 0.0, best_viol == 0.0) {
        (true, true) => obj > best_obj,
        (true, false) => true,
        (false, true) => false,
        (false, false) => viol < best_viol,
    }
}

/// Best `Φ` for one cell given its powers and interference.
pub(crate) fn reflection_step(
    gains: &CellGains,
    params: &SystemParams,
    alloc: &CellAllocation,
    interference_near: f64,
    interference_far: f64,
) -> f64 {
    let theta = params.sinr_threshold();
    let terms = ReflectionTerms::new(gains, params, alloc, interference_near, interference_far);
    let mut candidates = [0.0, 1.0, f64::NAN, f64::NAN];
    if let Some(phi) = terms.active_near(theta) {
        candidates[2] = phi;
    }
    if let Some(phi) = terms.active_far(theta) {
        candidates[3] = phi;
    }
    let mut list: Vec<f64> = candidates.into_iter().filter(|p| (0.0..=1.0).contains(p)).collect();
    list.sort_by(f64::total_cmp);

    let eval = |phi: f64| {
        let t = LinkTerms::new(gains, params, phi, interference_near, interference_far);
        let (ri, rj) = t.rates(alloc.power, alloc.pac_near, alloc.pac_far);
        (ri + rj, floor_violation(&t, theta, alloc.power, alloc.pac_near, alloc.pac_far))
    };
    // ascending order with strict comparison breaks ties towards smaller Φ
    let mut best: Option<(f64, f64, f64)> = None;
    for phi in list {
        let (rate, viol) = eval(phi);
        if best.is_none_or(|(_, r, v)| prefer((rate, viol), (r, v))) {
            best = Some((phi, rate, viol));
        }
    }
    best.map_or(0.0, |b| b.0)
}

/// Reflection coefficient of every cell with powers and PACs held fixed.
pub fn solve_reflection(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams) -> Result<Vec<f64>> {
    if alloc.num_cells() != chan.num_cells() {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} cells, channel has {}",
            alloc.num_cells(),
            chan.num_cells()
        )));
    }
    let interference = interference_all(alloc, chan);
    Ok(alloc
        .cells
        .iter()
        .zip(chan.cells())
        .zip(interference)
        .map(|((a, g), (di, dj))| reflection_step(g, params, a, di, dj))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains(cn: f64, cf: f64) -> CellGains {
        CellGains {
            g_near: 1.0,
            g_far: 0.5,
            g_src_tag: 1.0,
            g_tag_near: cn,
            g_tag_far: cf,
        }
    }

    fn cell(power: f64, li: f64) -> CellAllocation {
        CellAllocation {
            power,
            pac_near: li,
            pac_far: 1.0 - li,
            reflection: 0.5,
        }
    }

    #[test]
    fn zero_floor_picks_full_reflection() {
        let p = SystemParams::default();
        assert_eq!(reflection_step(&gains(0.3, 0.1), &p, &cell(1.0, 0.3), 0.0, 0.0), 1.0);
    }

    #[test]
    fn no_cascade_ties_to_zero() {
        let p = SystemParams::default();
        assert_eq!(reflection_step(&gains(0.0, 0.0), &p, &cell(1.0, 0.3), 0.0, 0.0), 0.0);
    }

    #[test]
    fn active_point_puts_c1_on_its_boundary() {
        let p = SystemParams {
            r_min: 2.0,
            ..SystemParams::default()
        };
        let theta = p.sinr_threshold();
        let a = cell(0.01, 0.3);
        let t = ReflectionTerms::new(&gains(0.5, 0.1), &p, &a, 1e-4, 0.0);
        let phi = t.active_near(theta).unwrap();
        let lt = LinkTerms::new(&gains(0.5, 0.1), &p, phi, 1e-4, 0.0);
        assert!((lt.sinr_near(a.power, a.pac_near, a.pac_far) - theta).abs() < 1e-12 * theta);
    }

    #[test]
    fn matches_dense_scan() {
        let p = SystemParams {
            r_min: 0.5,
            noise_variance: 1e-2,
            ..SystemParams::default()
        };
        for (cn, cf, pw, li) in [(0.4, 0.2, 0.05, 0.2), (2.0, 0.05, 0.02, 0.45), (0.1, 0.9, 0.5, 0.1)] {
            let g = gains(cn, cf);
            let a = cell(pw, li);
            let phi = reflection_step(&g, &p, &a, 0.0, 0.0);
            let rate = |phi: f64| {
                let t = LinkTerms::new(&g, &p, phi, 0.0, 0.0);
                let (ri, rj) = t.rates(a.power, a.pac_near, a.pac_far);
                (ri + rj, floor_violation(&t, p.sinr_threshold(), a.power, a.pac_near, a.pac_far))
            };
            let best = (0..=1000)
                .map(|i| i as f64 / 1000.0)
                .filter(|&f| rate(f).1 == 0.0)
                .map(|f| rate(f).0)
                .fold(f64::NEG_INFINITY, f64::max);
            if best.is_finite() {
                assert!(rate(phi).0 >= best - 1e-9);
                assert_eq!(rate(phi).1, 0.0);
            }
        }
    }
}
