use proptest::prelude::*;

use noma_bsc::model::{
    check_feasibility, metrics, sinr_far, sinr_near_self, AllocationState, CellAllocation, CellGains,
    ChannelRealization, LinkTerms, SystemParams,
};

fn gains() -> impl Strategy<Value = CellGains> {
    (1e-4..1.0f64, 1e-5..1e-2f64, 0.0..1.0f64, 0.0..1.0f64, 0.0..1.0f64).prop_map(|(gn, gf, st, tn, tf)| CellGains {
        g_near: gn,
        g_far: gf,
        g_src_tag: st,
        g_tag_near: tn,
        g_tag_far: tf,
    })
}

fn params(beta: f64) -> SystemParams {
    SystemParams {
        sic_error: beta,
        num_cells: 1,
        ..SystemParams::default()
    }
}

fn near(g: &CellGains, beta: f64, phi: f64, delta: f64, p: f64, li: f64, lj: f64) -> f64 {
    LinkTerms::new(g, &params(beta), phi, delta, 0.0).sinr_near(p, li, lj)
}

proptest! {
    #[test]
    fn near_sinr_monotone(
        g in gains(),
        beta in 0.0..0.9f64,
        phi in 0.0..0.9f64,
        delta in 0.0..1e-2f64,
        p in 1e-3..2.0f64,
        li in 1e-4..0.45f64,
        step in 1e-3..0.05f64,
    ) {
        let lj = 1.0 - li;
        let base = near(&g, beta, phi, delta, p, li, lj);
        prop_assert!(near(&g, beta, phi + step, delta, p, li, lj) >= base);
        prop_assert!(near(&g, beta, phi, delta, p, li + step, lj) >= base);
        prop_assert!(near(&g, beta, phi, delta, p, li + step, lj - step) >= base);
        prop_assert!(near(&g, beta + step, phi, delta, p, li, lj) <= base);
        prop_assert!(near(&g, beta, phi, delta + step, p, li, lj) <= base);
    }

    #[test]
    fn zero_reflection_is_plain_noma(g in gains(), p in 1e-3..2.0f64, li in 1e-4..0.5f64) {
        let with = ChannelRealization::single_cell(g).unwrap();
        let without = with.without_tags();
        let a = AllocationState::uniform(1, CellAllocation { power: p, pac_near: li, pac_far: 1.0 - li, reflection: 0.0 });
        let prm = params(0.1);
        prop_assert_eq!(sinr_near_self(&a, &with, &prm, 0).unwrap(), sinr_near_self(&a, &without, &prm, 0).unwrap());
        prop_assert_eq!(sinr_far(&a, &with, &prm, 0).unwrap(), sinr_far(&a, &without, &prm, 0).unwrap());
    }

    #[test]
    fn perfect_sic_leaves_noise_and_interference(g in gains(), phi in 0.0..1.0f64, delta in 0.0..1e-2f64) {
        let t = LinkTerms::new(&g, &params(0.0), phi, delta, 0.0);
        prop_assert_eq!(t.b_near, 0.0);
        prop_assert_eq!(t.c_near, delta + params(0.0).noise_variance);
    }

    #[test]
    fn ee_is_sum_of_cell_ratios(
        cells in prop::collection::vec((gains(), 0.0..2.0f64, 1e-4..0.5f64, 0.0..1.0f64), 1..5),
        cross in 0.0..1e-3f64,
    ) {
        let k = cells.len();
        let cross_m: Vec<f64> = (0..k * k).map(|i| if i % (k + 1) == 0 { 0.0 } else { cross }).collect();
        let chan = ChannelRealization::new(cells.iter().map(|c| c.0).collect(), cross_m.clone(), cross_m).unwrap();
        let alloc = AllocationState {
            cells: cells
                .iter()
                .map(|&(_, p, li, phi)| CellAllocation { power: p, pac_near: li, pac_far: 1.0 - li, reflection: phi })
                .collect(),
        };
        let prm = SystemParams { num_cells: k, ..SystemParams::default() };
        let m = metrics(&alloc, &chan, &prm).unwrap();
        let expected: f64 = m
            .cells
            .iter()
            .zip(&alloc.cells)
            .map(|(r, a)| r.rate_sum / (a.power * (a.pac_near + a.pac_far) + prm.circuit_power))
            .sum();
        prop_assert!((m.ee_total - expected).abs() <= 1e-12 * expected.abs().max(f64::MIN_POSITIVE));
        prop_assert!(m.ee_total >= 0.0 && m.ee_total.is_finite());
    }

    #[test]
    fn zero_rate_floor_never_binds(g in gains(), p in 0.0..2.0f64, li in 1e-4..0.5f64) {
        let chan = ChannelRealization::single_cell(g).unwrap();
        let a = AllocationState::uniform(1, CellAllocation { power: p, pac_near: li, pac_far: 1.0 - li, reflection: 0.5 });
        let f = check_feasibility(&a, &chan, &SystemParams { r_min: 0.0, ..params(0.1) }).unwrap();
        prop_assert!(f.cells[0].c1 && f.cells[0].c2);
    }
}

fn single(alloc: CellAllocation) -> noma_bsc::FeasibilityReport {
    let g = CellGains {
        g_near: 1.0,
        g_far: 0.1,
        g_src_tag: 0.5,
        g_tag_near: 0.5,
        g_tag_far: 0.5,
    };
    let chan = ChannelRealization::single_cell(g).unwrap();
    check_feasibility(&AllocationState::uniform(1, alloc), &chan, &params(0.1)).unwrap()
}

#[test]
fn larger_near_share_breaks_c3() {
    let f = single(CellAllocation {
        power: 1.0,
        pac_near: 0.6,
        pac_far: 0.4,
        reflection: 0.5,
    });
    assert!(!f.cells[0].c3);
}

#[test]
fn reflection_above_one_breaks_c6() {
    let f = single(CellAllocation {
        power: 1.0,
        pac_near: 0.3,
        pac_far: 0.7,
        reflection: 1.2,
    });
    assert!(!f.cells[0].c6);
    assert!(f.cells[0].c3 && f.cells[0].c5);
}

#[test]
fn silent_network_has_zero_ee() {
    let g = CellGains {
        g_near: 1.0,
        g_far: 0.1,
        g_src_tag: 0.0,
        g_tag_near: 0.0,
        g_tag_far: 0.0,
    };
    let chan = ChannelRealization::single_cell(g).unwrap();
    let a = AllocationState::uniform(
        1,
        CellAllocation {
            power: 0.0,
            pac_near: 0.3,
            pac_far: 0.7,
            reflection: 0.0,
        },
    );
    let m = metrics(&a, &chan, &params(0.1)).unwrap();
    assert_eq!(m.ee_total, 0.0);
}
