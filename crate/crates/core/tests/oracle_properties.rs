use noma_bsc::channel::{build_topology, sample_channels, LayoutConfig};
use noma_bsc::model::{check_feasibility, AllocationState, CellAllocation, ChannelRealization, LinkTerms, SystemParams};
use noma_bsc::oracle::{grid_search, GridSpec};
use noma_bsc::solver::{solve_pac_closed_form, solve_reflection, DualState, Mode, PAC_FLOOR};
use noma_bsc::Error;

fn instance(k: usize, seed: u64, r_min: f64) -> (ChannelRealization, SystemParams) {
    let params = SystemParams {
        num_cells: k,
        r_min,
        ..SystemParams::default()
    };
    let topo = build_topology(&params, &LayoutConfig::default()).unwrap();
    (sample_channels(&topo, &params, seed), params)
}

const COARSE: GridSpec = GridSpec {
    n_power: 40,
    n_pac: 40,
    n_phi: 11,
};

#[test]
fn refining_the_grid_never_loses() {
    for seed in 0..5 {
        for r_min in [0.0, 0.5] {
            let (chan, params) = instance(1, seed, r_min);
            let coarse = grid_search(&chan, &params, &COARSE, Mode::Wbs).unwrap();
            let fine = grid_search(&chan, &params, &COARSE.refined(), Mode::Wbs).unwrap();
            assert!(fine.ee >= coarse.ee, "seed={seed}");
        }
    }
}

#[test]
fn best_point_is_feasible() {
    for seed in 0..5 {
        for k in [1, 2] {
            let (chan, params) = instance(k, seed, 0.5);
            let grid = GridSpec { n_power: 8, n_pac: 8, n_phi: 3 };
            let best = grid_search(&chan, &params, &grid, Mode::Wbs).unwrap();
            assert!(check_feasibility(&best.allocation, &chan, &params).unwrap().all());
            assert!(best.feasible_points <= best.evaluated);
        }
    }
}

#[test]
fn unreachable_rate_floor_is_reported() {
    let (chan, params) = instance(1, 0, 40.0);
    assert!(matches!(grid_search(&chan, &params, &COARSE, Mode::Wbs), Err(Error::Infeasible)));
}

#[test]
fn baseline_search_keeps_reflection_at_zero() {
    let (chan, params) = instance(1, 2, 0.0);
    let best = grid_search(&chan, &params, &COARSE, Mode::Nbs).unwrap();
    assert_eq!(best.allocation.cells[0].reflection, 0.0);
    assert_eq!(best.evaluated, (COARSE.n_power * COARSE.n_pac) as u64);
}

fn fixed(power: f64, pac_near: f64, reflection: f64) -> AllocationState {
    AllocationState::uniform(
        1,
        CellAllocation {
            power,
            pac_near,
            pac_far: 1.0 - pac_near,
            reflection,
        },
    )
}

fn sum_rate(chan: &ChannelRealization, params: &SystemParams, a: &CellAllocation) -> f64 {
    let (ri, rj) = LinkTerms::new(chan.cell(0), params, a.reflection, 0.0, 0.0).rates(a.power, a.pac_near, a.pac_far);
    ri + rj
}

#[test]
fn closed_form_pac_matches_a_dense_scan() {
    for seed in 0..10 {
        let (chan, params) = instance(1, seed, 0.0);
        let power = 0.05 + 0.1 * seed as f64;
        let alloc = fixed(power, 0.3, 0.7);
        let out = solve_pac_closed_form(&chan, &params, &alloc, &DualState::new(1, 0.1), 0).unwrap();
        let n = 20_001;
        let best = (0..n)
            .map(|i| PAC_FLOOR + (0.5 - PAC_FLOOR) * i as f64 / (n - 1) as f64)
            .max_by(|&a, &b| {
                let r = |x| sum_rate(&chan, &params, &fixed(power, x, 0.7).cells[0]);
                r(a).total_cmp(&r(b))
            })
            .unwrap();
        assert!((out.pac_near - best).abs() <= 1e-3, "seed={seed}: {} vs {best}", out.pac_near);
    }
}

#[test]
fn closed_form_reflection_matches_a_dense_scan() {
    for seed in 0..10 {
        for r_min in [0.0, 0.5] {
            let (chan, params) = instance(1, seed, r_min);
            let alloc = fixed(0.2, 0.35, 0.0);
            let phi = solve_reflection(&alloc, &chan, &params).unwrap()[0];
            let n = 10_001;
            let mut best = (f64::NEG_INFINITY, 0.0);
            for i in 0..n {
                let x = i as f64 / (n - 1) as f64;
                let a = fixed(0.2, 0.35, x);
                if check_feasibility(&a, &chan, &params).unwrap().all() {
                    let r = sum_rate(&chan, &params, &a.cells[0]);
                    if r > best.0 {
                        best = (r, x);
                    }
                }
            }
            if best.0.is_finite() {
                assert!((phi - best.1).abs() <= 1e-3, "seed={seed} r_min={r_min}: {phi} vs {}", best.1);
            }
        }
    }
}
