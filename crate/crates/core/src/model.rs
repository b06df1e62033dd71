//! Domain types and the forward formula layer.
//!
//! Every cell `k` has a source serving a near (SIC-capable) device `i` and a
//! far device `j` with power-domain NOMA, plus one backscatter sensor tag that
//! reflects the superimposed source signal towards both devices. All powers are
//! linear watts; all gains are squared channel magnitudes.
//!
//! ```text
//! A_i = g_near + Φ·G_i      B_i = β·g_near      C_i = Δ_i + σ²
//! A_j = g_far  + Φ·G_j      B_j = A_j           C_j = Δ_j + σ²
//!
//! γ_i = P·Λ_i·A_i / (P·Λ_j·B_i + C_i)
//! γ_j = P·Λ_j·A_j / (P·Λ_i·B_j + C_j)
//!
//! EE  = Σ_k (log2(1+γ_i) + log2(1+γ_j)) / (P_k(Λ_i+Λ_j) + p_c)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Converts a power level in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts watts to dBm.
pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

/// Global scalar parameters of the network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Noise power σ² in watts.
    pub noise_variance: f64,
    /// Imperfect-SIC residual fraction β.
    pub sic_error: f64,
    /// Circuit power p_c in watts.
    pub circuit_power: f64,
    /// Per-source power budget in watts.
    pub p_max: f64,
    /// Minimum rate per device, bits/s/Hz.
    pub r_min: f64,
    /// Path-loss exponent ϱ.
    pub path_loss_exp: f64,
    /// Number of cells K.
    pub num_cells: usize,
}

impl Default for SystemParams {
    /// σ = 0.01 (σ² = 1e-4 W), β = 0.1, K = 10, p_c = 0.1 W, P_max = 32 dBm, R_min = 0.
    fn default() -> Self {
        SystemParams {
            noise_variance: 1e-4,
            sic_error: 0.1,
            circuit_power: 0.1,
            p_max: dbm_to_watts(32.0),
            r_min: 0.0,
            path_loss_exp: 3.0,
            num_cells: 10,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("noise_variance", self.noise_variance)?;
        positive("circuit_power", self.circuit_power)?;
        positive("p_max", self.p_max)?;
        positive("path_loss_exp", self.path_loss_exp)?;
        if !(0.0..=1.0).contains(&self.sic_error) {
            return Err(Error::invalid("sic_error", format!("must lie in [0, 1], got {}", self.sic_error)));
        }
        if !(self.r_min.is_finite() && self.r_min >= 0.0) {
            return Err(Error::invalid("r_min", format!("must be >= 0, got {}", self.r_min)));
        }
        if self.num_cells == 0 {
            return Err(Error::invalid("num_cells", "must be at least 1"));
        }
        Ok(())
    }

    /// SINR threshold `2^R_min − 1` equivalent to the rate floor.
    pub fn sinr_threshold(&self) -> f64 {
        self.r_min.exp2() - 1.0
    }
}

/// Device role within a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Role {
    Near,
    Far,
}

/// Squared channel gains internal to one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellGains {
    /// Source to near device.
    pub g_near: f64,
    /// Source to far device.
    pub g_far: f64,
    /// Source to tag.
    pub g_src_tag: f64,
    /// Tag to near device.
    pub g_tag_near: f64,
    /// Tag to far device.
    pub g_tag_far: f64,
}

impl CellGains {
    /// Backscatter cascade gain towards the near device, `G_i`.
    pub fn cascade_near(&self) -> f64 {
        self.g_src_tag * self.g_tag_near
    }

    /// Backscatter cascade gain towards the far device, `G_j`.
    pub fn cascade_far(&self) -> f64 {
        self.g_src_tag * self.g_tag_far
    }

    fn is_valid(&self) -> bool {
        [self.g_near, self.g_far, self.g_src_tag, self.g_tag_near, self.g_tag_far]
            .iter()
            .all(|g| g.is_finite() && *g >= 0.0)
    }
}

/// All squared gains of one network draw.
///
/// Cross gains are stored row-major as `[victim cell][interfering cell]`;
/// the diagonal is unused and kept at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    cells: Vec<CellGains>,
    cross_near: Vec<f64>,
    cross_far: Vec<f64>,
}

impl ChannelRealization {
    pub fn new(cells: Vec<CellGains>, cross_near: Vec<f64>, cross_far: Vec<f64>) -> Result<Self> {
        let k = cells.len();
        if k == 0 {
            return Err(Error::invalid("cells", "at least one cell required"));
        }
        if cross_near.len() != k * k || cross_far.len() != k * k {
            return Err(Error::DimensionMismatch(format!(
                "cross gain matrices must be {k}x{k}, got {} and {}",
                cross_near.len(),
                cross_far.len()
            )));
        }
        if let Some(idx) = cells.iter().position(|c| !c.is_valid()) {
            return Err(Error::invalid("cells", format!("cell {idx} has a negative or non-finite gain")));
        }
        if cross_near.iter().chain(&cross_far).any(|g| !(g.is_finite() && *g >= 0.0)) {
            return Err(Error::invalid("cross", "negative or non-finite cross gain"));
        }
        let mut chan = ChannelRealization {
            cells,
            cross_near,
            cross_far,
        };
        for v in 0..k {
            chan.cross_near[v * k + v] = 0.0;
            chan.cross_far[v * k + v] = 0.0;
        }
        Ok(chan)
    }

    /// A one-cell network, which has no inter-cell coupling.
    pub fn single_cell(gains: CellGains) -> Result<Self> {
        Self::new(vec![gains], vec![0.0], vec![0.0])
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[CellGains] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &CellGains {
        &self.cells[k]
    }

    /// Gain from the source of cell `interferer` to the `role` device of cell `victim`.
    pub fn cross(&self, role: Role, victim: usize, interferer: usize) -> f64 {
        let k = self.cells.len();
        match role {
            Role::Near => self.cross_near[victim * k + interferer],
            Role::Far => self.cross_far[victim * k + interferer],
        }
    }

    /// Same realization with every tag cascade removed.
    pub fn without_tags(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.cells {
            c.g_src_tag = 0.0;
            c.g_tag_near = 0.0;
            c.g_tag_far = 0.0;
        }
        out
    }

    /// Swaps near/far labels in every cell whose far device has the larger
    /// direct gain, so the SIC-capable device is always the stronger one.
    pub(crate) fn enforce_user_ordering(&mut self) {
        let k = self.cells.len();
        for v in 0..k {
            let c = &mut self.cells[v];
            if c.g_far > c.g_near {
                std::mem::swap(&mut c.g_near, &mut c.g_far);
                std::mem::swap(&mut c.g_tag_near, &mut c.g_tag_far);
                let row = v * k..(v + 1) * k;
                self.cross_near[row.clone()].swap_with_slice(&mut self.cross_far[row]);
            }
        }
    }
}

/// Decision variables of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellAllocation {
    /// Source transmit power `P_k`, watts.
    pub power: f64,
    /// Power allocation coefficient of the near device, `Λ_i`.
    pub pac_near: f64,
    /// Power allocation coefficient of the far device, `Λ_j`.
    pub pac_far: f64,
    /// Tag reflection coefficient `Φ`.
    pub reflection: f64,
}

impl CellAllocation {
    /// Power actually radiated towards the two devices.
    pub fn radiated_power(&self) -> f64 {
        self.power * (self.pac_near + self.pac_far)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationState {
    pub cells: Vec<CellAllocation>,
}

impl AllocationState {
    pub fn uniform(num_cells: usize, cell: CellAllocation) -> Self {
        AllocationState {
            cells: vec![cell; num_cells],
        }
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// `Σ_k P_k(Λ_i + Λ_j)`.
    pub fn total_radiated_power(&self) -> f64 {
        self.cells.iter().map(CellAllocation::radiated_power).sum()
    }
}

/// The coefficient form of both SINRs for one cell at fixed `Φ` and
/// inter-cell interference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkTerms {
    pub a_near: f64,
    pub b_near: f64,
    pub c_near: f64,
    pub a_far: f64,
    pub b_far: f64,
    pub c_far: f64,
}

impl LinkTerms {
    pub fn new(
        gains: &CellGains,
        params: &SystemParams,
        reflection: f64,
        interference_near: f64,
        interference_far: f64,
    ) -> Self {
        let a_far = gains.g_far + reflection * gains.cascade_far();
        LinkTerms {
            a_near: gains.g_near + reflection * gains.cascade_near(),
            b_near: gains.g_near * params.sic_error,
            c_near: interference_near + params.noise_variance,
            a_far,
            b_far: a_far,
            c_far: interference_far + params.noise_variance,
        }
    }

    pub fn sinr_near(&self, power: f64, pac_near: f64, pac_far: f64) -> f64 {
        power * pac_near * self.a_near / (power * pac_far * self.b_near + self.c_near)
    }

    pub fn sinr_far(&self, power: f64, pac_near: f64, pac_far: f64) -> f64 {
        power * pac_far * self.a_far / (power * pac_near * self.b_far + self.c_far)
    }

    /// `(R_i, R_j)` in bits/s/Hz.
    pub fn rates(&self, power: f64, pac_near: f64, pac_far: f64) -> (f64, f64) {
        (
            self.sinr_near(power, pac_near, pac_far).ln_1p() / std::f64::consts::LN_2,
            self.sinr_far(power, pac_near, pac_far).ln_1p() / std::f64::consts::LN_2,
        )
    }
}

fn check_cell(chan: &ChannelRealization, alloc: &AllocationState, cell: usize) -> Result<()> {
    if alloc.num_cells() != chan.num_cells() {
        return Err(Error::DimensionMismatch(format!(
            "allocation has {} cells, channel has {}",
            alloc.num_cells(),
            chan.num_cells()
        )));
    }
    if cell >= chan.num_cells() {
        return Err(Error::CellOutOfRange {
            index: cell,
            num_cells: chan.num_cells(),
        });
    }
    Ok(())
}

fn interference_unchecked(alloc: &AllocationState, chan: &ChannelRealization, cell: usize, role: Role) -> f64 {
    alloc
        .cells
        .iter()
        .enumerate()
        .filter(|(other, _)| *other != cell)
        .map(|(other, a)| a.power * chan.cross(role, cell, other))
        .sum()
}

/// Inter-cell interference `Δ` received by the `role` device of `cell`:
/// `Σ_{k'≠k} P_{k'}·g_cross(role, k', k)`.
pub fn intercell_interference(alloc: &AllocationState, chan: &ChannelRealization, cell: usize, role: Role) -> Result<f64> {
    check_cell(chan, alloc, cell)?;
    Ok(interference_unchecked(alloc, chan, cell, role))
}

/// Interference seen by every cell as `(Δ_i, Δ_j)` pairs.
pub fn interference_all(alloc: &AllocationState, chan: &ChannelRealization) -> Vec<(f64, f64)> {
    (0..chan.num_cells())
        .map(|k| {
            (
                interference_unchecked(alloc, chan, k, Role::Near),
                interference_unchecked(alloc, chan, k, Role::Far),
            )
        })
        .collect()
}

pub(crate) fn link_terms_unchecked(
    alloc: &AllocationState,
    chan: &ChannelRealization,
    params: &SystemParams,
    cell: usize,
) -> LinkTerms {
    LinkTerms::new(
        chan.cell(cell),
        params,
        alloc.cells[cell].reflection,
        interference_unchecked(alloc, chan, cell, Role::Near),
        interference_unchecked(alloc, chan, cell, Role::Far),
    )
}

/// SINR of the near device decoding its own signal after imperfect SIC.
pub fn sinr_near_self(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams, cell: usize) -> Result<f64> {
    check_cell(chan, alloc, cell)?;
    let a = &alloc.cells[cell];
    Ok(link_terms_unchecked(alloc, chan, params, cell).sinr_near(a.power, a.pac_near, a.pac_far))
}

/// SINR of the far device, which decodes with the near device's signal as interference.
pub fn sinr_far(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams, cell: usize) -> Result<f64> {
    check_cell(chan, alloc, cell)?;
    let a = &alloc.cells[cell];
    Ok(link_terms_unchecked(alloc, chan, params, cell).sinr_far(a.power, a.pac_near, a.pac_far))
}

/// SINR at the near device while it decodes (and then cancels) the far
/// device's signal. Diagnostic only; the optimizer never uses it.
///
/// Transcribed term by term, including the unscaled tag term in the numerator
/// and the far-device interference `Δ_j` in the denominator.
pub fn sinr_near_decodes_far(
    alloc: &AllocationState,
    chan: &ChannelRealization,
    params: &SystemParams,
    cell: usize,
) -> Result<f64> {
    check_cell(chan, alloc, cell)?;
    let a = &alloc.cells[cell];
    let g = chan.cell(cell);
    let tag = a.reflection * g.cascade_near();
    let num = a.power * a.pac_far * g.g_near + tag;
    let den = a.power * a.pac_near * (g.g_near + tag)
        + interference_unchecked(alloc, chan, cell, Role::Far)
        + params.noise_variance;
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSinrs {
    pub near_self: f64,
    pub far: f64,
    pub near_decodes_far: f64,
    pub interference_near: f64,
    pub interference_far: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sinrs {
    pub cells: Vec<CellSinrs>,
}

pub fn sinrs(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams) -> Result<Sinrs> {
    check_cell(chan, alloc, 0)?;
    let cells = (0..chan.num_cells())
        .map(|k| {
            Ok(CellSinrs {
                near_self: sinr_near_self(alloc, chan, params, k)?,
                far: sinr_far(alloc, chan, params, k)?,
                near_decodes_far: sinr_near_decodes_far(alloc, chan, params, k)?,
                interference_near: interference_unchecked(alloc, chan, k, Role::Near),
                interference_far: interference_unchecked(alloc, chan, k, Role::Far),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sinrs { cells })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellRates {
    pub rate_near: f64,
    pub rate_far: f64,
    pub rate_sum: f64,
}

/// Rates and energy efficiency of an allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub cells: Vec<CellRates>,
    /// `Σ_k R_k / (P_k(Λ_i+Λ_j) + p_c)`, bits/s/Hz/W.
    pub ee_total: f64,
    /// `Σ_k R_k`.
    pub sum_rate: f64,
    /// `Σ_k P_k(Λ_i+Λ_j)`, watts.
    pub total_power: f64,
}

impl Metrics {
    /// Network-wide ratio `Σ R_k / (Σ P_k(Λ_i+Λ_j) + p_c)`; the quantity the
    /// Dinkelbach parameter tracks.
    pub fn aggregate_ratio(&self, params: &SystemParams) -> f64 {
        self.sum_rate / (self.total_power + params.circuit_power)
    }
}

pub fn metrics(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams) -> Result<Metrics> {
    check_cell(chan, alloc, 0)?;
    let mut cells = Vec::with_capacity(chan.num_cells());
    let mut ee_total = 0.0;
    for (k, a) in alloc.cells.iter().enumerate() {
        let (rate_near, rate_far) = link_terms_unchecked(alloc, chan, params, k).rates(a.power, a.pac_near, a.pac_far);
        let rate_sum = rate_near + rate_far;
        ee_total += rate_sum / (a.radiated_power() + params.circuit_power);
        cells.push(CellRates {
            rate_near,
            rate_far,
            rate_sum,
        });
    }
    Ok(Metrics {
        sum_rate: cells.iter().map(|c| c.rate_sum).sum(),
        total_power: alloc.total_radiated_power(),
        cells,
        ee_total,
    })
}

/// Constraint status of one cell.
///
/// `c1_slack`/`c2_slack` are in SINR units (`γ − (2^R_min − 1)`); a negative
/// value is the size of the violation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellFeasibility {
    pub c1: bool,
    pub c2: bool,
    pub c3: bool,
    pub c4: bool,
    pub c5: bool,
    pub c6: bool,
    pub c1_slack: f64,
    pub c2_slack: f64,
}

impl CellFeasibility {
    pub fn all(&self) -> bool {
        self.c1 && self.c2 && self.box_constraints()
    }

    /// C3 to C6.
    pub fn box_constraints(&self) -> bool {
        self.c3 && self.c4 && self.c5 && self.c6
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub cells: Vec<CellFeasibility>,
}

impl FeasibilityReport {
    pub fn all(&self) -> bool {
        self.cells.iter().all(CellFeasibility::all)
    }

    pub fn box_constraints(&self) -> bool {
        self.cells.iter().all(CellFeasibility::box_constraints)
    }

    /// Largest rate-floor violation over all cells, in SINR units (0 if none).
    pub fn max_rate_violation(&self) -> f64 {
        self.cells
            .iter()
            .map(|c| (-c.c1_slack).max(-c.c2_slack).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// Slack below zero that C1 and C2 still accept, in SINR units. Active rate
/// floors land within rounding of the threshold.
pub const RATE_FLOOR_TOL: f64 = 1e-9;

/// Evaluates C1 to C6; C3 to C6 literally.
pub fn check_feasibility(alloc: &AllocationState, chan: &ChannelRealization, params: &SystemParams) -> Result<FeasibilityReport> {
    check_cell(chan, alloc, 0)?;
    let theta = params.sinr_threshold();
    let cells = alloc
        .cells
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let t = link_terms_unchecked(alloc, chan, params, k);
            let (p, li, lj) = (a.power, a.pac_near, a.pac_far);
            let c1_slack = t.sinr_near(p, li, lj) - theta;
            let c2_slack = t.sinr_far(p, li, lj) - theta;
            let tol = RATE_FLOOR_TOL * theta.max(1.0);
            CellFeasibility {
                c1: c1_slack >= -tol,
                c2: c2_slack >= -tol,
                c3: p * li <= p * lj,
                c4: (0.0..=params.p_max).contains(&p),
                c5: li + lj <= 1.0 && li >= 0.0 && lj >= 0.0,
                c6: (0.0..=1.0).contains(&a.reflection),
                c1_slack,
                c2_slack,
            }
        })
        .collect();
    Ok(FeasibilityReport { cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, noise: f64) -> SystemParams {
        SystemParams {
            noise_variance: noise,
            sic_error: beta,
            num_cells: 1,
            ..SystemParams::default()
        }
    }

    fn one_cell(g_near: f64, g_far: f64, cascade_near: f64, cascade_far: f64) -> ChannelRealization {
        ChannelRealization::single_cell(CellGains {
            g_near,
            g_far,
            g_src_tag: 1.0,
            g_tag_near: cascade_near,
            g_tag_far: cascade_far,
        })
        .unwrap()
    }

    fn alloc1(power: f64, li: f64, lj: f64, phi: f64) -> AllocationState {
        AllocationState::uniform(
            1,
            CellAllocation {
                power,
                pac_near: li,
                pac_far: lj,
                reflection: phi,
            },
        )
    }

    fn two_cells() -> ChannelRealization {
        let g = CellGains {
            g_near: 1.0,
            g_far: 0.5,
            g_src_tag: 0.0,
            g_tag_near: 0.0,
            g_tag_far: 0.0,
        };
        // victim 0 <- interferer 1 gets 0.3 on the near device
        ChannelRealization::new(vec![g, g], vec![0.0, 0.3, 0.2, 0.0], vec![0.0, 0.1, 0.4, 0.0]).unwrap()
    }

    #[test]
    fn dbm_conversion() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(32.0) - 1.584_893_192_461_113).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(17.5)) - 17.5).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::default().validate().is_ok());
        let bad = SystemParams {
            sic_error: 1.5,
            ..SystemParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = SystemParams {
            noise_variance: 0.0,
            ..SystemParams::default()
        };
        assert!(bad.validate().is_err());
        let bad = SystemParams {
            num_cells: 0,
            ..SystemParams::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn interference_single_cell_is_zero() {
        let chan = one_cell(1.0, 0.5, 0.0, 0.0);
        let a = alloc1(1.0, 0.2, 0.8, 0.0);
        assert_eq!(intercell_interference(&a, &chan, 0, Role::Near).unwrap(), 0.0);
        assert_eq!(intercell_interference(&a, &chan, 0, Role::Far).unwrap(), 0.0);
    }

    #[test]
    fn interference_two_cells() {
        let chan = two_cells();
        let mut a = alloc1(1.0, 0.2, 0.8, 0.0);
        a.cells.push(CellAllocation { power: 1.0, ..a.cells[0] });
        assert!((intercell_interference(&a, &chan, 0, Role::Near).unwrap() - 0.3).abs() < 1e-15);
        assert!((intercell_interference(&a, &chan, 1, Role::Far).unwrap() - 0.4).abs() < 1e-15);
        assert!(matches!(
            intercell_interference(&a, &chan, 2, Role::Near),
            Err(Error::CellOutOfRange { index: 2, num_cells: 2 })
        ));
    }

    #[test]
    fn interference_zero_interferer_power() {
        let g = CellGains {
            g_near: 1.0,
            g_far: 0.5,
            g_src_tag: 0.0,
            g_tag_near: 0.0,
            g_tag_far: 0.0,
        };
        let chan = ChannelRealization::new(vec![g; 3], vec![0.5; 9], vec![0.5; 9]).unwrap();
        let mut a = alloc1(1.0, 0.2, 0.8, 0.0);
        a.cells.push(CellAllocation { power: 0.0, ..a.cells[0] });
        a.cells.push(CellAllocation { power: 0.0, ..a.cells[0] });
        assert_eq!(intercell_interference(&a, &chan, 0, Role::Near).unwrap(), 0.0);
    }

    #[test]
    fn sinr_near_examples() {
        let p = params(0.0, 0.01);
        let chan = one_cell(1.0, 0.5, 0.0, 0.0);
        let v = sinr_near_self(&alloc1(1.0, 0.2, 0.8, 0.0), &chan, &p, 0).unwrap();
        assert!((v - 20.0).abs() < 1e-12);

        let p = params(0.1, 0.01);
        let chan = one_cell(1.0, 0.5, 0.5, 0.0);
        let v = sinr_near_self(&alloc1(1.0, 0.2, 0.8, 0.4), &chan, &p, 0).unwrap();
        assert!((v - 0.24 / 0.09).abs() < 1e-12);

        let v = sinr_near_self(&alloc1(1.0, 0.0, 0.8, 0.4), &chan, &p, 0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn sinr_far_examples() {
        let p = params(0.1, 0.01);
        let chan = one_cell(1.0, 0.5, 0.0, 0.0);
        assert_eq!(sinr_far(&alloc1(1.0, 0.2, 0.0, 0.0), &chan, &p, 0).unwrap(), 0.0);
        let v = sinr_far(&alloc1(1.0, 0.2, 0.8, 0.0), &chan, &p, 0).unwrap();
        assert!((v - 0.4 / 0.11).abs() < 1e-12);
        let v = sinr_far(&alloc1(0.7, 0.0, 0.9, 0.0), &chan, &p, 0).unwrap();
        assert!((v - 0.7 * 0.9 * 0.5 / 0.01).abs() < 1e-9);
    }

    #[test]
    fn sinr_near_decodes_far_examples() {
        let p = params(0.1, 0.01);
        // Φ·G_i = 0.2 with Φ = 1
        let chan = one_cell(1.0, 0.5, 0.2, 0.0);
        let v = sinr_near_decodes_far(&alloc1(1.0, 0.2, 0.8, 1.0), &chan, &p, 0).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = sinr_near_decodes_far(&alloc1(1.0, 0.2, 0.0, 0.0), &chan, &p, 0).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn metrics_zero_and_unit() {
        let p = params(0.1, 0.01);
        let chan = one_cell(1.0, 0.5, 0.0, 0.0);
        let m = metrics(&alloc1(0.0, 0.2, 0.8, 0.0), &chan, &p).unwrap();
        assert_eq!(m.ee_total, 0.0);
        assert_eq!(m.cells[0].rate_sum, 0.0);

        // γ_i = γ_j = 1 with P(Λ_i+Λ_j) + p_c = 2
        let p = SystemParams {
            noise_variance: 1.0,
            sic_error: 0.0,
            circuit_power: 1.0,
            p_max: 10.0,
            r_min: 0.0,
            path_loss_exp: 3.0,
            num_cells: 1,
        };
        let chan = one_cell(4.0, 2.0, 0.0, 0.0);
        let m = metrics(&alloc1(1.0, 0.25, 0.75, 0.0), &chan, &p).unwrap();
        assert!((m.cells[0].rate_near - 1.0).abs() < 1e-12);
        assert!((m.cells[0].rate_far - 1.0).abs() < 1e-12);
        assert!((m.ee_total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn feasibility_examples() {
        let p = params(0.1, 0.01);
        let chan = one_cell(1.0, 0.5, 0.3, 0.1);
        let r = check_feasibility(&alloc1(1.0, 0.3, 0.7, 0.5), &chan, &p).unwrap();
        assert!(r.all());
        let r = check_feasibility(&alloc1(1.0, 0.6, 0.4, 0.5), &chan, &p).unwrap();
        assert!(!r.cells[0].c3);
        let r = check_feasibility(&alloc1(1.0, 0.3, 0.7, 1.2), &chan, &p).unwrap();
        assert!(!r.cells[0].c6);
        let r = check_feasibility(&alloc1(2.0 * p.p_max, 0.3, 0.7, 0.5), &chan, &p).unwrap();
        assert!(!r.cells[0].c4);
    }

    #[test]
    fn zero_rate_floor_always_meets_c1_c2() {
        let p = params(0.1, 0.01);
        let chan = one_cell(1e-9, 1e-10, 0.0, 0.0);
        let r = check_feasibility(&alloc1(1e-6, 0.01, 0.99, 0.0), &chan, &p).unwrap();
        assert!(r.cells[0].c1 && r.cells[0].c2);
    }

    #[test]
    fn user_ordering_swaps_cross_rows() {
        let g = CellGains {
            g_near: 0.1,
            g_far: 0.9,
            g_src_tag: 1.0,
            g_tag_near: 0.2,
            g_tag_far: 0.7,
        };
        let mut chan = ChannelRealization::new(vec![g, g], vec![0.0, 0.3, 0.0, 0.0], vec![0.0, 0.6, 0.0, 0.0]).unwrap();
        chan.enforce_user_ordering();
        let c = chan.cell(0);
        assert_eq!((c.g_near, c.g_far, c.g_tag_near, c.g_tag_far), (0.9, 0.1, 0.7, 0.2));
        assert_eq!(chan.cross(Role::Near, 0, 1), 0.6);
        assert_eq!(chan.cross(Role::Far, 0, 1), 0.3);
    }
}
