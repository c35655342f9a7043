//! Hand-written search-then-pursue baseline.
//!
//! While the evacuee is unseen the HLR flies a boustrophedon sweep and the LLR
//! shadows it on the nearest cell it can reach. Once the evacuee is seen both
//! head for its last known position; the LLR follows its shortest path as far
//! as one action allows.

use super::RescuePolicy;
use crate::env::{snap_to_accessible, JointAction, Observation, PolarAction};
use crate::world::{astar_path, wrap_angle, AgentKind, Cell, GridMap};
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct ScriptedPolicy {
    map: Arc<GridMap>,
    radius: f64,
    waypoints: Vec<Cell>,
    next_waypoint: usize,
    last_seen: Option<Cell>,
    scan_heading: f64,
}

/// Sweep lanes every `range` rows, alternating direction, inset by half a
/// lane from the border.
pub fn sweep_waypoints(width: i32, height: i32, range: f64) -> Vec<Cell> {
    let spacing = (range.floor() as i32).max(1);
    let inset = spacing / 2;
    let x_lo = inset.min(width - 1);
    let x_hi = (width - 1 - inset).max(x_lo);
    let mut lanes = Vec::new();
    let mut y = inset.min(height - 1);
    loop {
        lanes.push(y);
        if y >= height - 1 - inset {
            break;
        }
        y = (y + spacing).min(height - 1 - inset).max(y + 1).min(height - 1);
    }
    let mut out = Vec::with_capacity(lanes.len() * 2);
    for (k, &y) in lanes.iter().enumerate() {
        let (a, b) = if k % 2 == 0 { (x_lo, x_hi) } else { (x_hi, x_lo) };
        out.push(Cell::new(a, y));
        if b != a {
            out.push(Cell::new(b, y));
        }
    }
    out
}

/// Farthest cell on the LLR's shortest path to `goal` that lies within
/// `radius` of `from`, so one action covers as much of the path as it can.
pub fn pursuit_target(map: &GridMap, from: Cell, goal: Cell, radius: f64) -> Cell {
    let Some(goal) = snap_to_accessible(map, AgentKind::Llr, goal) else {
        return from;
    };
    match astar_path(map, AgentKind::Llr, from, goal) {
        Some(path) => path
            .iter()
            .rev()
            .find(|c| from.distance(**c) <= radius + 1e-9)
            .copied()
            .unwrap_or(from),
        None => from,
    }
}

impl ScriptedPolicy {
    pub fn new(map: Arc<GridMap>, selection_radius: f64, hlr_range: f64) -> Self {
        let waypoints = sweep_waypoints(map.width(), map.height(), hlr_range);
        Self {
            map,
            radius: selection_radius,
            waypoints,
            next_waypoint: 0,
            last_seen: None,
            scan_heading: 0.0,
        }
    }

    pub fn waypoints(&self) -> &[Cell] {
        &self.waypoints
    }

    fn hlr_target(&mut self, hlr: Cell) -> Cell {
        if let Some(seen) = self.last_seen {
            return seen;
        }
        if self.waypoints[self.next_waypoint] == hlr {
            self.next_waypoint = (self.next_waypoint + 1) % self.waypoints.len();
        }
        self.waypoints[self.next_waypoint]
    }
}

fn bearing(from: Cell, to: Cell) -> f64 {
    f64::from(to.y - from.y).atan2(f64::from(to.x - from.x))
}

impl RescuePolicy for ScriptedPolicy {
    fn name(&self) -> &str {
        "scripted"
    }

    fn reset(&mut self, _episode_seed: u64) {
        self.next_waypoint = 0;
        self.last_seen = None;
        self.scan_heading = 0.0;
    }

    fn act(&mut self, obs: &Observation) -> JointAction {
        let (hlr, llr) = (obs.hlr_position, obs.llr_position);
        if obs.evac_visible {
            self.last_seen = Some(obs.evac_position);
        } else if self.last_seen == Some(llr) {
            // got there and lost it; back to searching
            self.last_seen = None;
        }

        let hlr_goal = self.hlr_target(hlr);
        let hlr_action = PolarAction::toward(hlr, hlr_goal, 0.0);

        let llr_goal = self.last_seen.unwrap_or(hlr);
        let target = pursuit_target(&self.map, llr, llr_goal, self.radius);
        let psi = if llr_goal != llr {
            bearing(llr, llr_goal)
        } else {
            self.scan_heading = wrap_angle(self.scan_heading + FRAC_PI_2);
            self.scan_heading
        };
        if llr_goal != llr {
            self.scan_heading = psi;
        }
        JointAction {
            hlr: hlr_action,
            llr: PolarAction::toward(llr, target, psi),
        }
    }
}
