//! Energy-efficiency optimization for multi-cell NOMA networks in which every
//! cell hosts a backscatter sensor tag and the strong user performs imperfect
//! successive interference cancellation.
//!
//! The crate is layered bottom-up:
//!
//! * [`model`]: domain types, SINR/rate/EE evaluation and constraint checks.
//! * [`channel`]: seeded network geometry and Rayleigh-fading channel draws.
//! * [`polyroots`]: real roots of the quadratic and quartic stationarity equations.
//! * [`solver`]: Dinkelbach outer loop around per-cell closed-form updates
//!   and a projected subgradient dual loop.
//! * [`oracle`]: exhaustive grid search used as ground truth.
//! * [`experiments`]: Monte Carlo sweeps, convergence traces and CSV output.

pub mod channel;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod polyroots;
pub mod solver;

pub use channel::{build_topology, sample_channels, LayoutConfig, Topology};
pub use error::{Error, Result};
pub use model::{
    check_feasibility, dbm_to_watts, metrics, watts_to_dbm, AllocationState, CellAllocation, CellGains,
    ChannelRealization, FeasibilityReport, Metrics, Role, SystemParams,
};
pub use oracle::{grid_search, GridSpec, OracleResult};
pub use polyroots::{real_roots_quadratic, real_roots_quartic, Polynomial};
pub use solver::{optimize, DualState, Mode, SolveConfig, SolveReport};
