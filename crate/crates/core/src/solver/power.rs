//! Source-power update for one cell at fixed PACs and reflection.
//!
//! The objective `(1+λ_i)R_i + (1+λ_j)R_j − (μ+Π)·P` is concave in `P`, and
//! its derivative has the sign of a quartic `τ + χP + ψP² + ΓP³ + ωP⁴`. The
//! quartic is written for natural-log rates; with rates in bits its price
//! term becomes `m = ln2·(μ+Π)`. The maximizer over the feasible part of
//! `[0, P_max]` is a root or an end of that interval, and C1/C2 each give a
//! lower end `P ≥ θC/(coefficient)`.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{link_terms_unchecked, AllocationState, ChannelRealization, LinkTerms, SystemParams};
use crate::polyroots::real_roots_into;

use super::reflection::{floor_violation, prefer};
use super::{CellDuals, DualState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOutcome {
    pub power: f64,
    /// No candidate improved on the previous iterate, which is returned.
    pub stalled: bool,
    /// Both rate floors hold at the returned point.
    pub feasible: bool,
}

/// Coefficients `[τ, χ, ψ, Γ, ω]` of the power stationarity quartic, with
/// `L = Λ_i` and `Λ_j = 1 − L`.
pub fn power_quartic(t: &LinkTerms, pac_near: f64, duals: &CellDuals, pi: f64) -> [f64; 5] {
    let (ai, bi, ci) = (t.a_near, t.b_near, t.c_near);
    let (aj, bj, cj) = (t.a_far, t.b_far, t.c_far);
    let (li, lj) = (duals.lambda_near, duals.lambda_far);
    let l = pac_near;
    let m = LN_2 * (duals.mu + pi);
    let lm = -1.0 + l;

    let tau = ci * cj * (-aj * ci * lm * (1.0 + lj) + cj * (ai * l * (1.0 + li) - ci * m));
    let chi = ci
        * cj
        * (2.0 * (bi * cj * lm - bj * ci * l) * m
            + aj * lm * (2.0 * bi * lm * (1.0 + lj) - ai * l * (2.0 + li + lj) + ci * m)
            + ai * l * (2.0 * bj * l * (1.0 + li) - cj * m));
    let psi = -(bi * bi * cj * cj * lm * lm - 4.0 * bi * bj * ci * cj * lm * l + bj * bj * ci * ci * l * l) * m
        + ai * l * (bj * bj * ci * l * l * (1.0 + li) + bi * cj * cj * lm * m - 2.0 * bj * ci * cj * l * m)
        - aj * lm
            * (bi * bi * cj * lm * lm * (1.0 + lj) - bi * cj * lm * (ai * l * (1.0 + lj) - 2.0 * ci * m)
                - ci * l * (bj * ci * m + ai * (-bj * l * (1.0 + li) + cj * m)));
    let gamma = (bj
        * l
        * (-2.0 * bi * bi * cj * lm * lm + 2.0 * bi * (bj * ci + ai * cj) * lm * l - ai * bj * ci * l * l)
        + aj * lm * (bi * bi * cj * lm * lm - bi * (2.0 * bj * ci + ai * cj) * lm * l + ai * bj * ci * l * l))
        * m;
    let omega = -bi * bj * lm * l * (bi * lm - ai * l) * (aj - aj * l + bj * l) * m;
    [tau, chi, psi, gamma, omega]
}

/// The same condition in product form,
/// `(1+λ_i)xA_iC_i·T_jV_j + (1+λ_j)(1−x)A_jC_j·T_iV_i − m·T_iV_iT_jV_j`.
pub fn power_stationarity(t: &LinkTerms, pac_near: f64, duals: &CellDuals, pi: f64, power: f64) -> f64 {
    let (x, p) = (pac_near, power);
    let m = LN_2 * (duals.mu + pi);
    let ti = p * (x * t.a_near + (1.0 - x) * t.b_near) + t.c_near;
    let vi = p * (1.0 - x) * t.b_near + t.c_near;
    let tj = p * ((1.0 - x) * t.a_far + x * t.b_far) + t.c_far;
    let vj = p * x * t.b_far + t.c_far;
    (1.0 + duals.lambda_near) * x * t.a_near * t.c_near * tj * vj
        + (1.0 + duals.lambda_far) * (1.0 - x) * t.a_far * t.c_far * ti * vi
        - m * ti * vi * tj * vj
}

pub(crate) fn power_objective(t: &LinkTerms, pac_near: f64, duals: &CellDuals, pi: f64, power: f64) -> f64 {
    let pac_far = 1.0 - pac_near;
    let (ri, rj) = t.rates(power, pac_near, pac_far);
    (1.0 + duals.lambda_near) * ri + (1.0 + duals.lambda_far) * rj - (duals.mu + pi) * power * (pac_near + pac_far)
}

/// Real roots of the quartic inside `[0, P_max]`, both interval ends and any
/// `extra` points inside it, in descending order so that equal objectives
/// keep the larger power.
pub(crate) fn power_candidates(quartic: &[f64; 5], p_max: f64, extra: &[f64]) -> Vec<f64> {
    let mut list = vec![0.0, p_max];
    if let Ok(roots) = real_roots_into(quartic) {
        list.extend_from_slice(roots.as_slice());
    }
    list.extend_from_slice(extra);
    list.retain(|p| p.is_finite() && (0.0..=p_max).contains(p));
    list.sort_by(|a, b| b.total_cmp(a));
    list.dedup();
    list
}

pub(crate) fn power_step(
    t: &LinkTerms,
    theta: f64,
    p_max: f64,
    pac_near: f64,
    previous: f64,
    duals: &CellDuals,
    pi: f64,
) -> PowerOutcome {
    let x = pac_near;
    let mut floors = [f64::NAN; 2];
    if theta > 0.0 {
        let near = x * t.a_near - theta * (1.0 - x) * t.b_near;
        if near > 0.0 {
            floors[0] = theta * t.c_near / near;
        }
        let far = (1.0 - x) * t.a_far - theta * x * t.b_far;
        if far > 0.0 {
            floors[1] = theta * t.c_far / far;
        }
    }
    let list = power_candidates(&power_quartic(t, x, duals, pi), p_max, &floors);

    let score = |p: f64| {
        (
            power_objective(t, x, duals, pi, p),
            floor_violation(t, theta, p, x, 1.0 - x),
        )
    };
    let mut best = (f64::NAN, f64::NEG_INFINITY, f64::INFINITY);
    for p in list {
        let (obj, viol) = score(p);
        if best.0.is_nan() || prefer((obj, viol), (best.1, best.2)) {
            best = (p, obj, viol);
        }
    }
    let mut stalled = false;
    if previous.is_finite() && (0.0..=p_max).contains(&previous) {
        let (obj, viol) = score(previous);
        if prefer((obj, viol), (best.1, best.2)) {
            best = (previous, obj, viol);
            stalled = true;
        }
    }
    PowerOutcome {
        power: best.0,
        stalled,
        feasible: best.2 == 0.0,
    }
}

/// Power update of `cell` with its PACs, reflection and the interference
/// implied by `alloc` held fixed. The result always satisfies `0 ≤ P ≤ P_max`.
pub fn solve_source_power(
    chan: &ChannelRealization,
    params: &SystemParams,
    alloc: &AllocationState,
    duals: &DualState,
    pi: f64,
    cell: usize,
) -> Result<PowerOutcome> {
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
    Ok(power_step(
        &t,
        params.sinr_threshold(),
        params.p_max,
        a.pac_near,
        a.power.clamp(0.0, params.p_max),
        &duals.cells[cell],
        pi,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CellGains;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_case(rng: &mut ChaCha8Rng) -> (LinkTerms, f64, CellDuals, f64) {
        let gains = CellGains {
            g_near: rng.random_range(0.1..2.0),
            g_far: rng.random_range(0.01..0.1),
            g_src_tag: rng.random_range(0.0..1.0),
            g_tag_near: rng.random_range(0.0..1.0),
            g_tag_far: rng.random_range(0.0..1.0),
        };
        let params = SystemParams {
            sic_error: rng.random_range(0.0..0.5),
            noise_variance: rng.random_range(1e-3..1e-1),
            ..SystemParams::default()
        };
        let t = LinkTerms::new(&gains, &params, rng.random_range(0.0..1.0), rng.random_range(0.0..0.01), rng.random_range(0.0..0.01));
        let duals = CellDuals {
            lambda_near: rng.random_range(0.0..2.0),
            lambda_far: rng.random_range(0.0..2.0),
            mu: rng.random_range(0.0..1.0),
            epsilon: 0.0,
        };
        (t, rng.random_range(0.01..0.5), duals, rng.random_range(0.0..5.0))
    }

    #[test]
    fn quartic_matches_product_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (t, x, d, pi) = random_case(&mut rng);
            let c = power_quartic(&t, x, &d, pi);
            let scale: f64 = c.iter().map(|v| v.abs()).sum();
            for p in [0.0, 0.1, 0.7, 1.3, 3.0] {
                let lhs = c[0] + p * (c[1] + p * (c[2] + p * (c[3] + p * c[4])));
                let rhs = power_stationarity(&t, x, &d, pi, p);
                assert!((lhs - rhs).abs() <= 1e-9 * scale * (1.0 + p).powi(4), "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn stationarity_has_sign_of_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let (t, x, d, pi) = random_case(&mut rng);
            let p = rng.random_range(0.01..1.5);
            let h = 1e-7;
            let fd = (power_objective(&t, x, &d, pi, p + h) - power_objective(&t, x, &d, pi, p - h)) / (2.0 * h);
            let s = power_stationarity(&t, x, &d, pi, p);
            if fd.abs() > 1e-5 {
                assert_eq!(fd.signum(), s.signum());
            }
        }
    }

    #[test]
    fn matches_dense_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let p_max = 1.5;
        for _ in 0..30 {
            let (t, x, d, pi) = random_case(&mut rng);
            let out = power_step(&t, 0.0, p_max, x, f64::NAN, &d, pi);
            let scan = (0..=20_000)
                .map(|i| p_max * i as f64 / 20_000.0)
                .map(|p| power_objective(&t, x, &d, pi, p))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(power_objective(&t, x, &d, pi, out.power) >= scan - 1e-9);
            assert!((0.0..=p_max).contains(&out.power));
        }
    }

    #[test]
    fn planted_quartic_candidates() {
        let p_max = 1.0;
        let q = crate::polyroots::Polynomial::from_roots(&[-1.0, 0.5, 2.0, p_max + 1.0]).unwrap();
        let c: [f64; 5] = q.coeffs().try_into().unwrap();
        let list = power_candidates(&c, p_max, &[]);
        assert_eq!(list.len(), 3);
        assert_eq!(list[0], 1.0);
        assert!((list[1] - 0.5).abs() < 1e-12);
        assert_eq!(list[2], 0.0);
    }

    #[test]
    fn linear_quartic_degenerates() {
        let list = power_candidates(&[-0.6, 2.0, 0.0, 0.0, 0.0], 1.0, &[]);
        assert!(list.iter().any(|p| (p - 0.3).abs() < 1e-15));
    }

    #[test]
    fn zero_price_takes_full_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let (t, x, _, _) = random_case(&mut rng);
        let out = power_step(&t, 0.0, 1.0, x, 0.5, &CellDuals::default(), 0.0);
        assert_eq!(out.power, 1.0);
        assert!(!out.stalled);
    }

    #[test]
    fn huge_price_takes_small_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let (t, x, _, _) = random_case(&mut rng);
        let d = CellDuals {
            mu: 1e6,
            ..CellDuals::default()
        };
        let out = power_step(&t, 0.0, 1.0, x, 0.5, &d, 1e6);
        assert!(out.power < 1e-3, "{}", out.power);
    }
}
