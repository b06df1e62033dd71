//! Network geometry and seeded channel sampling.
//!
//! Sources sit on a square grid. Inside each cell the near and far devices lie
//! on opposite sides of the source at a per-cell angle, so inter-cell distances
//! vary from cell to cell but stay deterministic. Every squared gain is an
//! `Exp(1)` Rayleigh power draw scaled by `d^-ϱ`. The tag cascade uses the
//! configured tag distances directly; cross-cell gains use the true distance
//! from the foreign source to the device.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CellGains, ChannelRealization, Role, SystemParams};

/// Name of the generator, written into every output header.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seeded via seed_from_u64";

/// Distances in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LayoutConfig {
    /// Distance between neighbouring sources on the grid.
    pub spacing: f64,
    /// Source to near device.
    pub d_near: f64,
    /// Source to far device.
    pub d_far: f64,
    /// Source to tag.
    pub d_tag: f64,
    /// Tag to near device.
    pub d_tag_near: f64,
    /// Tag to far device.
    pub d_tag_far: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            spacing: 50.0,
            d_near: 3.0,
            d_far: 8.0,
            d_tag: 2.0,
            d_tag_near: 3.0,
            d_tag_far: 8.0,
        }
    }
}

impl LayoutConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("spacing", self.spacing),
            ("d_near", self.d_near),
            ("d_far", self.d_far),
            ("d_tag", self.d_tag),
            ("d_tag_near", self.d_tag_near),
            ("d_tag_far", self.d_tag_far),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("distance must be positive, got {v}")));
            }
        }
        if self.d_near >= self.d_far {
            return Err(Error::invalid("d_near", "near device must be closer than the far device"));
        }
        Ok(())
    }
}

type Point = [f64; 2];

fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Positions and distances of one deployment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub layout: LayoutConfig,
    sources: Vec<Point>,
    near: Vec<Point>,
    far: Vec<Point>,
    /// `[victim][interferer]`, diagonal zero.
    cross_near: Vec<f64>,
    cross_far: Vec<f64>,
}

impl Topology {
    pub fn num_cells(&self) -> usize {
        self.sources.len()
    }

    pub fn source(&self, k: usize) -> Point {
        self.sources[k]
    }

    /// Distance from the source of `interferer` to the `role` device of
    /// `victim`; `None` on the diagonal.
    pub fn cross_distance(&self, role: Role, victim: usize, interferer: usize) -> Option<f64> {
        if victim == interferer {
            return None;
        }
        let idx = victim * self.num_cells() + interferer;
        Some(match role {
            Role::Near => self.cross_near[idx],
            Role::Far => self.cross_far[idx],
        })
    }

    /// Number of ordered `(victim, interferer)` pairs per device role.
    pub fn cross_pairs(&self) -> usize {
        let k = self.num_cells();
        k * (k - 1)
    }
}

/// Places `params.num_cells` sources on a `ceil(√K)`-wide grid.
pub fn build_topology(params: &SystemParams, layout: &LayoutConfig) -> Result<Topology> {
    layout.validate()?;
    let k = params.num_cells;
    if k == 0 {
        return Err(Error::invalid("num_cells", "must be at least 1"));
    }
    let cols = (k as f64).sqrt().ceil() as usize;
    // golden angle: spreads device orientations without any alignment between cells
    let step = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut sources = Vec::with_capacity(k);
    let mut near = Vec::with_capacity(k);
    let mut far = Vec::with_capacity(k);
    for c in 0..k {
        let s = [(c % cols) as f64 * layout.spacing, (c / cols) as f64 * layout.spacing];
        let (sin, cos) = (c as f64 * step).sin_cos();
        sources.push(s);
        near.push([s[0] + layout.d_near * cos, s[1] + layout.d_near * sin]);
        far.push([s[0] - layout.d_far * cos, s[1] - layout.d_far * sin]);
    }
    let mut cross_near = vec![0.0; k * k];
    let mut cross_far = vec![0.0; k * k];
    for v in 0..k {
        for u in (0..k).filter(|&u| u != v) {
            let dn = dist(sources[u], near[v]);
            let df = dist(sources[u], far[v]);
            if !(dn > 0.0 && df > 0.0) {
                return Err(Error::invalid("spacing", format!("device of cell {v} coincides with source {u}")));
            }
            cross_near[v * k + u] = dn;
            cross_far[v * k + u] = df;
        }
    }
    Ok(Topology {
        layout: *layout,
        sources,
        near,
        far,
        cross_near,
        cross_far,
    })
}

fn gain<R: Rng>(rng: &mut R, d: f64, exponent: f64) -> f64 {
    let fading: f64 = rng.sample(Exp1);
    fading * d.powf(-exponent)
}

/// One channel draw. Identical `(topology, params, seed)` gives a bitwise
/// identical realization.
pub fn sample_channels(topo: &Topology, params: &SystemParams, seed: u64) -> ChannelRealization {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = &topo.layout;
    let exp = params.path_loss_exp;
    let k = topo.num_cells();
    let cells = (0..k)
        .map(|_| CellGains {
            g_near: gain(&mut rng, l.d_near, exp),
            g_far: gain(&mut rng, l.d_far, exp),
            g_src_tag: gain(&mut rng, l.d_tag, exp),
            g_tag_near: gain(&mut rng, l.d_tag_near, exp),
            g_tag_far: gain(&mut rng, l.d_tag_far, exp),
        })
        .collect();
    let mut cross = |d: &[f64]| -> Vec<f64> {
        (0..k * k)
            .map(|idx| if idx / k == idx % k { 0.0 } else { gain(&mut rng, d[idx], exp) })
            .collect()
    };
    let cross_near = cross(&topo.cross_near);
    let cross_far = cross(&topo.cross_far);
    let mut chan =
        ChannelRealization::new(cells, cross_near, cross_far).expect("sampled gains are finite and nonnegative");
    chan.enforce_user_ordering();
    chan
}

/// Seed of Monte Carlo trial `trial` derived from a base seed.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    seed ^ trial
}
