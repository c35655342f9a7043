use crate::world::{astar_path, wrap_angle, AgentKind, AgentPose, Cell, GridMap};
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

/// Target point `(r, theta)` relative to the agent plus a heading `psi`.
/// The high-level rescuer ignores `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PolarAction {
    pub r: f64,
    pub theta: f64,
    pub psi: f64,
}

impl PolarAction {
    pub fn new(r: f64, theta: f64, psi: f64) -> Self {
        Self { r, theta, psi }
    }

    /// Clamps `r` into `[0, radius]` and wraps both angles.
    pub fn normalized(self, radius: f64) -> Self {
        Self {
            r: if self.r.is_finite() {
                self.r.clamp(0.0, radius)
            } else {
                0.0
            },
            theta: wrap_angle(self.theta),
            psi: wrap_angle(self.psi),
        }
    }

    /// Polar action whose target point is `to`, as seen from `from`.
    pub fn toward(from: Cell, to: Cell, psi: f64) -> Self {
        let dx = f64::from(to.x - from.x);
        let dy = f64::from(to.y - from.y);
        Self {
            r: dx.hypot(dy),
            theta: dy.atan2(dx),
            psi,
        }
    }
}

/// Joint action of the two rescuers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointAction {
    pub hlr: PolarAction,
    pub llr: PolarAction,
}

/// Number of continuous dimensions in a joint action: HLR `(r, theta)`,
/// LLR `(r, theta, psi)`.
pub const JOINT_ACTION_DIM: usize = 5;

impl JointAction {
    pub fn from_slice(v: &[f64]) -> Self {
        assert_eq!(v.len(), JOINT_ACTION_DIM, "joint action has five dimensions");
        Self {
            hlr: PolarAction::new(v[0], v[1], 0.0),
            llr: PolarAction::new(v[2], v[3], v[4]),
        }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.hlr.r, self.hlr.theta, self.llr.r, self.llr.theta, self.llr.psi]
    }

    /// Per-dimension `(low, high)` bounds for a selection radius.
    pub fn bounds(radius: f64) -> [(f64, f64); JOINT_ACTION_DIM] {
        use std::f64::consts::PI;
        [(0.0, radius), (-PI, PI), (0.0, radius), (-PI, PI), (-PI, PI)]
    }
}

/// Nearest cell accessible to `kind`, searching outward from `target` in
/// breadth-first rings over the whole grid.
pub fn snap_to_accessible(map: &GridMap, kind: AgentKind, target: Cell) -> Option<Cell> {
    if map.accessible(kind, target) {
        return Some(target);
    }
    let mut seen = vec![false; map.len()];
    seen[map.index(target)] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(cell) = queue.pop_front() {
        for next in map.neighbors_unchecked(cell) {
            let idx = map.index(next);
            if seen[idx] {
                continue;
            }
            if map.accessible(kind, next) {
                return Some(next);
            }
            seen[idx] = true;
            queue.push_back(next);
        }
    }
    None
}

/// Moves an agent toward the polar target: the target is rounded to a cell,
/// clamped into the grid, snapped to the nearest accessible cell, and the
/// shortest path to it is followed for at most `max_speed` cells.
///
/// Returns the new position and heading. The low-level rescuer takes `psi` as
/// its heading; other kinds keep theirs.
pub fn resolve_action(map: &GridMap, pose: &AgentPose, action: &PolarAction, radius: f64) -> (Cell, f64) {
    let action = action.normalized(radius);
    let heading = if pose.kind == AgentKind::Llr {
        action.psi
    } else {
        pose.heading
    };
    let offset = (
        (action.r * action.theta.cos()).round() as i32,
        (action.r * action.theta.sin()).round() as i32,
    );
    let raw = pose.position.offset(offset.0, offset.1);
    let clamped = Cell::new(raw.x.clamp(0, map.width() - 1), raw.y.clamp(0, map.height() - 1));
    let Some(target) = snap_to_accessible(map, pose.kind, clamped) else {
        return (pose.position, heading);
    };
    let position = astar_path(map, pose.kind, pose.position, target)
        .map(|path| path[(pose.max_speed as usize).min(path.len() - 1)])
        .unwrap_or(pose.position);
    (position, heading)
}
