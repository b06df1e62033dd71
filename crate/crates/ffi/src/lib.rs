//! C interface to the `noma-bsc` optimizer.
//!
//! Every fallible function returns a [`NomaStatus`] and writes its result
//! through an out-pointer. On failure, [`noma_last_error`] returns a message
//! for the calling thread. Channels and reports are opaque handles owned by
//! the caller and released with their `_free` function. Panics never cross
//! the boundary; they surface as `NOMA_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use noma_bsc::channel::{build_topology, sample_channels, LayoutConfig};
use noma_bsc::experiments::{run_sweep, ExperimentConfig};
use noma_bsc::model::{dbm_to_watts, CellAllocation, ChannelRealization, SystemParams};
use noma_bsc::oracle::{grid_search, GridSpec};
use noma_bsc::polyroots::{real_roots_quartic, Polynomial};
use noma_bsc::solver::{optimize, Mode, SolveConfig, SolveReport};
use noma_bsc::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// No allocation meets the rate floor.
    Infeasible = 3,
    Io = 4,
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NomaMode {
    /// Tags reflect.
    Wbs = 0,
    /// Plain NOMA, reflection fixed at zero.
    Nbs = 1,
}

impl From<NomaMode> for Mode {
    fn from(m: NomaMode) -> Self {
        match m {
            NomaMode::Wbs => Mode::Wbs,
            NomaMode::Nbs => Mode::Nbs,
        }
    }
}

/// System parameters; the power budget is in watts here.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NomaSystemParams {
    pub noise_variance: f64,
    pub sic_error: f64,
    pub circuit_power: f64,
    pub p_max: f64,
    pub r_min: f64,
    pub path_loss_exp: f64,
    pub num_cells: usize,
}

impl From<NomaSystemParams> for SystemParams {
    fn from(p: NomaSystemParams) -> Self {
        SystemParams {
            noise_variance: p.noise_variance,
            sic_error: p.sic_error,
            circuit_power: p.circuit_power,
            p_max: p.p_max,
            r_min: p.r_min,
            path_loss_exp: p.path_loss_exp,
            num_cells: p.num_cells,
        }
    }
}

/// Distances in meters.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NomaLayout {
    pub spacing: f64,
    pub d_near: f64,
    pub d_far: f64,
    pub d_tag: f64,
    pub d_tag_near: f64,
    pub d_tag_far: f64,
}

impl From<NomaLayout> for LayoutConfig {
    fn from(l: NomaLayout) -> Self {
        LayoutConfig {
            spacing: l.spacing,
            d_near: l.d_near,
            d_far: l.d_far,
            d_tag: l.d_tag,
            d_tag_near: l.d_tag_near,
            d_tag_far: l.d_tag_far,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NomaSolveConfig {
    pub tol_dinkelbach: f64,
    pub tol_dual: f64,
    pub max_outer: usize,
    pub max_dual_iters: usize,
    pub step0: f64,
    pub interference_rounds: usize,
}

impl From<NomaSolveConfig> for SolveConfig {
    fn from(c: NomaSolveConfig) -> Self {
        SolveConfig {
            tol_dinkelbach: c.tol_dinkelbach,
            tol_dual: c.tol_dual,
            max_outer: c.max_outer,
            max_dual_iters: c.max_dual_iters,
            step0: c.step0,
            interference_rounds: c.interference_rounds,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NomaCellAllocation {
    pub power: f64,
    pub pac_near: f64,
    pub pac_far: f64,
    pub reflection: f64,
}

impl From<&CellAllocation> for NomaCellAllocation {
    fn from(c: &CellAllocation) -> Self {
        NomaCellAllocation {
            power: c.power,
            pac_near: c.pac_near,
            pac_far: c.pac_far,
            reflection: c.reflection,
        }
    }
}

/// One channel draw.
pub struct NomaChannel(ChannelRealization);

/// Result of one solve.
pub struct NomaReport(SolveReport, SystemParams);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(NomaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Infeasible => NomaStatus::Infeasible,
            Error::Io(_) => NomaStatus::Io,
            _ => NomaStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NomaStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NomaStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NomaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NomaStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for reads.
unsafe fn read<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for writes.
unsafe fn write<T>(p: *mut T, what: &str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn path_arg<'a>(p: *const c_char, what: &str) -> Result<&'a Path, Failure> {
    let s = CStr::from_ptr(read(p, what)?)
        .to_str()
        .map_err(|_| Failure(NomaStatus::InvalidArgument, format!("`{what}` is not UTF-8")))?;
    Ok(Path::new(s))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn noma_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn noma_system_params_default() -> NomaSystemParams {
    let p = SystemParams::default();
    NomaSystemParams {
        noise_variance: p.noise_variance,
        sic_error: p.sic_error,
        circuit_power: p.circuit_power,
        p_max: p.p_max,
        r_min: p.r_min,
        path_loss_exp: p.path_loss_exp,
        num_cells: p.num_cells,
    }
}

#[no_mangle]
pub extern "C" fn noma_layout_default() -> NomaLayout {
    let l = LayoutConfig::default();
    NomaLayout {
        spacing: l.spacing,
        d_near: l.d_near,
        d_far: l.d_far,
        d_tag: l.d_tag,
        d_tag_near: l.d_tag_near,
        d_tag_far: l.d_tag_far,
    }
}

#[no_mangle]
pub extern "C" fn noma_solve_config_default() -> NomaSolveConfig {
    let c = SolveConfig::default();
    NomaSolveConfig {
        tol_dinkelbach: c.tol_dinkelbach,
        tol_dual: c.tol_dual,
        max_outer: c.max_outer,
        max_dual_iters: c.max_dual_iters,
        step0: c.step0,
        interference_rounds: c.interference_rounds,
    }
}

#[no_mangle]
pub extern "C" fn noma_dbm_to_watts(dbm: f64) -> f64 {
    dbm_to_watts(dbm)
}

/// Draws the channels of `params.num_cells` cells placed by `layout`.
///
/// # Safety
/// `params` and `layout` must point to valid structs; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_channel_sample(
    params: *const NomaSystemParams,
    layout: *const NomaLayout,
    seed: u64,
    out: *mut *mut NomaChannel,
) -> NomaStatus {
    guard(|| {
        let params: SystemParams = (*read(params, "params")?).into();
        let layout: LayoutConfig = (*read(layout, "layout")?).into();
        if out.is_null() {
            return Err(null("out"));
        }
        params.validate()?;
        let topo = build_topology(&params, &layout)?;
        let chan = Box::new(NomaChannel(sample_channels(&topo, &params, seed)));
        write(out, "out", Box::into_raw(chan))
    })
}

/// Number of cells in `channel`, or 0 if it is null.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn noma_channel_num_cells(channel: *const NomaChannel) -> usize {
    channel.as_ref().map_or(0, |c| c.0.num_cells())
}

/// # Safety
/// `channel` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn noma_channel_free(channel: *mut NomaChannel) {
    if !channel.is_null() {
        drop(Box::from_raw(channel));
    }
}

/// Runs the optimizer on one channel draw.
///
/// # Safety
/// Pointer arguments must be valid; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_solve(
    channel: *const NomaChannel,
    params: *const NomaSystemParams,
    config: *const NomaSolveConfig,
    mode: NomaMode,
    out: *mut *mut NomaReport,
) -> NomaStatus {
    guard(|| {
        let chan = &read(channel, "channel")?.0;
        let params: SystemParams = (*read(params, "params")?).into();
        let config: SolveConfig = (*read(config, "config")?).into();
        if out.is_null() {
            return Err(null("out"));
        }
        let report = optimize(chan, &params, &config, mode.into())?;
        write(out, "out", Box::into_raw(Box::new(NomaReport(report, params))))
    })
}

/// # Safety
/// `report` must be null or a handle not freed before.
#[no_mangle]
pub unsafe extern "C" fn noma_report_free(report: *mut NomaReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Network EE `ΣR/(ΣP + p_c)` at the returned allocation.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_ee(report: *const NomaReport, out: *mut f64) -> NomaStatus {
    guard(|| {
        let r = read(report, "report")?;
        write(out, "out", r.0.metrics.aggregate_ratio(&r.1))
    })
}

/// Sum over cells of `R_k/(P_k + p_c)`.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_ee_sum_of_ratios(report: *const NomaReport, out: *mut f64) -> NomaStatus {
    guard(|| write(out, "out", read(report, "report")?.0.metrics.ee_total))
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_converged(report: *const NomaReport, out: *mut bool) -> NomaStatus {
    guard(|| write(out, "out", read(report, "report")?.0.converged))
}

/// Whether every cell meets C1 to C6 at the returned allocation.
///
/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_feasible(report: *const NomaReport, out: *mut bool) -> NomaStatus {
    guard(|| write(out, "out", read(report, "report")?.0.feasibility.all()))
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_outer_iterations(report: *const NomaReport, out: *mut usize) -> NomaStatus {
    guard(|| write(out, "out", read(report, "report")?.0.outer_iterations))
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_num_cells(report: *const NomaReport, out: *mut usize) -> NomaStatus {
    guard(|| write(out, "out", read(report, "report")?.0.allocation.num_cells()))
}

/// # Safety
/// `report` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_cell(
    report: *const NomaReport,
    cell: usize,
    out: *mut NomaCellAllocation,
) -> NomaStatus {
    guard(|| {
        let cells = &read(report, "report")?.0.allocation.cells;
        let c = cells.get(cell).ok_or_else(|| {
            Failure(NomaStatus::InvalidArgument, format!("cell {cell} out of range for {} cells", cells.len()))
        })?;
        write(out, "out", c.into())
    })
}

/// Copies up to `capacity` values of the per-iteration `Π` trajectory into
/// `buffer` and stores the full length in `len`. Pass a null buffer with
/// zero capacity to query the length.
///
/// # Safety
/// `buffer` must be valid for `capacity` writes unless `capacity` is 0;
/// `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_report_trajectory(
    report: *const NomaReport,
    buffer: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> NomaStatus {
    guard(|| {
        let t = &read(report, "report")?.0.trajectory;
        if capacity > 0 {
            if buffer.is_null() {
                return Err(null("buffer"));
            }
            let n = capacity.min(t.len());
            ptr::copy_nonoverlapping(t.as_ptr(), buffer, n);
        }
        write(len, "len", t.len())
    })
}

/// Exhaustive grid search on a single-cell channel. Writes the best
/// allocation and its EE.
///
/// # Safety
/// Pointer arguments must be valid; `out_cell` and `out_ee` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_oracle(
    channel: *const NomaChannel,
    params: *const NomaSystemParams,
    n_power: usize,
    n_pac: usize,
    n_phi: usize,
    mode: NomaMode,
    out_cell: *mut NomaCellAllocation,
    out_ee: *mut f64,
) -> NomaStatus {
    guard(|| {
        let chan = &read(channel, "channel")?.0;
        let params: SystemParams = (*read(params, "params")?).into();
        if out_cell.is_null() || out_ee.is_null() {
            return Err(null("out_cell/out_ee"));
        }
        if chan.num_cells() != 1 {
            return Err(Failure(NomaStatus::InvalidArgument, "the C oracle takes single-cell channels".into()));
        }
        let grid = GridSpec { n_power, n_pac, n_phi };
        let best = grid_search(chan, &params, &grid, mode.into())?;
        write(out_cell, "out_cell", (&best.allocation.cells[0]).into())?;
        write(out_ee, "out_ee", best.ee)
    })
}

/// Real roots of `c[0] + c[1]x + … + c[4]x⁴`, ascending, into `roots`
/// (room for four); their number goes to `count`.
///
/// # Safety
/// `coeffs` must be valid for 5 reads, `roots` for 4 writes; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn noma_quartic_real_roots(coeffs: *const f64, roots: *mut f64, count: *mut usize) -> NomaStatus {
    guard(|| {
        if coeffs.is_null() || roots.is_null() {
            return Err(null("coeffs/roots"));
        }
        let c: [f64; 5] = ptr::read(coeffs.cast());
        let found = real_roots_quartic(&Polynomial::quartic(c)?)?;
        ptr::copy_nonoverlapping(found.as_ptr(), roots, found.len());
        write(count, "count", found.len())
    })
}

/// Runs the sweep described by the TOML file at `config_path` and writes
/// the CSV to `output_path`.
///
/// # Safety
/// Both arguments must be null or NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn noma_sweep_from_config(config_path: *const c_char, output_path: *const c_char) -> NomaStatus {
    guard(|| {
        let mut cfg = ExperimentConfig::load(path_arg(config_path, "config_path")?)?;
        cfg.output = Some(path_arg(output_path, "output_path")?.to_path_buf());
        run_sweep(&cfg)?;
        Ok(())
    })
}
