use super::EnvState;
use crate::world::{AgentKind, Cell, GridMap};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FireCell {
    Unknown,
    Clear,
    Burning,
}

impl FireCell {
    fn feature(self) -> f64 {
        match self {
            FireCell::Unknown => 0.0,
            FireCell::Clear => 0.5,
            FireCell::Burning => 1.0,
        }
    }
}

/// What the rescuer team sees at one step. Both rescuers receive the same
/// record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub grid_width: i32,
    pub grid_height: i32,
    pub hlr_position: Cell,
    pub llr_position: Cell,
    pub llr_heading: f64,
    /// Half-width of the square fire window centered on the high-level rescuer.
    pub patch_radius: i32,
    /// Row-major `(2 * patch_radius + 1)^2` window.
    pub fire_patch: Vec<FireCell>,
    pub evac_visible: bool,
    /// Zeroed unless `evac_visible`.
    pub evac_position: Cell,
    pub evac_heading: f64,
    pub step_fraction: f64,
}

/// Number of scalar features before the fire window.
pub const SCALAR_FEATURES: usize = 12;

impl Observation {
    pub fn patch_side(&self) -> usize {
        (2 * self.patch_radius + 1) as usize
    }

    /// Flat feature vector for the policy network, in this order:
    /// HLR position, LLR position (each scaled to [-1, 1]), LLR heading as
    /// (cos, sin), visibility flag, evacuee position and heading (zero when
    /// hidden), step fraction, then the fire window row-major with unknown=0,
    /// clear=0.5, burning=1.
    pub fn to_features(&self) -> Vec<f64> {
        let sx = |x: i32| scale(x, self.grid_width);
        let sy = |y: i32| scale(y, self.grid_height);
        let vis = if self.evac_visible { 1.0 } else { 0.0 };
        let mut out = Vec::with_capacity(feature_dim(self.patch_radius));
        out.extend_from_slice(&[
            sx(self.hlr_position.x),
            sy(self.hlr_position.y),
            sx(self.llr_position.x),
            sy(self.llr_position.y),
            self.llr_heading.cos(),
            self.llr_heading.sin(),
            vis,
            vis * sx(self.evac_position.x),
            vis * sy(self.evac_position.y),
            vis * self.evac_heading.cos(),
            vis * self.evac_heading.sin(),
            self.step_fraction,
        ]);
        out.extend(self.fire_patch.iter().map(|c| c.feature()));
        out
    }
}

fn scale(v: i32, extent: i32) -> f64 {
    if extent <= 1 {
        0.0
    } else {
        2.0 * f64::from(v) / f64::from(extent - 1) - 1.0
    }
}

pub fn feature_dim(patch_radius: i32) -> usize {
    let side = (2 * patch_radius + 1) as usize;
    SCALAR_FEATURES + side * side
}

/// Observation for one rescuer. The content does not depend on `_for`: the
/// team shares one observation.
pub fn build_observation(
    state: &EnvState,
    map: &GridMap,
    patch_radius: i32,
    t_max: u32,
    _for: AgentKind,
) -> Observation {
    let visible = state.evac_visible();
    let center = state.hlr.position;
    let side = 2 * patch_radius + 1;
    let mut fire_patch = Vec::with_capacity((side * side) as usize);
    for dy in -patch_radius..=patch_radius {
        for dx in -patch_radius..=patch_radius {
            let cell = center.offset(dx, dy);
            let seen = map.in_bounds(cell) && state.in_any_fov(cell);
            fire_patch.push(match (seen, state.fire.is_burning(cell)) {
                (false, _) => FireCell::Unknown,
                (true, true) => FireCell::Burning,
                (true, false) => FireCell::Clear,
            });
        }
    }
    Observation {
        grid_width: map.width(),
        grid_height: map.height(),
        hlr_position: state.hlr.position,
        llr_position: state.llr.position,
        llr_heading: state.llr.heading,
        patch_radius,
        fire_patch,
        evac_visible: visible,
        evac_position: if visible {
            state.evacuee.position()
        } else {
            Cell::new(0, 0)
        },
        evac_heading: if visible { state.evacuee.pose.heading } else { 0.0 },
        step_fraction: if t_max == 0 {
            0.0
        } else {
            f64::from(state.t) / f64::from(t_max)
        },
    }
}
