//! Panic-driven evacuee.
//!
//! Each step the evacuee's panic level is averaged with a stimulus built from
//! four components (distance to exit, social misalignment noise, visible fire,
//! discomfort-cue noise). Panic then blends a goal-directed velocity with an
//! exogenous herd direction. Once a low-level rescuer intercepts the evacuee
//! it follows the shortest path to its safe zone and panic stops mattering.

use crate::fire::FireState;
use crate::world::{astar_path, astar_path_avoiding, compute_fov, AgentKind, AgentPose, Cell, FovParams, GridMap};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

pub const CARDINALS: [(i32, i32); 4] = [(0, -1), (1, 0), (0, 1), (-1, 0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanicState {
    pub gamma: f64,
    pub last_deltas: [f64; 4],
}

impl PanicState {
    pub const CALM: PanicState = PanicState {
        gamma: 0.0,
        last_deltas: [0.0; 4],
    };
}

/// Normal distributions for the two social stimulus components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanicNoiseParams {
    pub mean2: f64,
    pub sd2: f64,
    pub mean4: f64,
    pub sd4: f64,
}

impl Default for PanicNoiseParams {
    fn default() -> Self {
        Self {
            mean2: 0.2,
            sd2: 0.1,
            mean4: 0.2,
            sd4: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvacueeParams {
    pub max_speed: u32,
    pub fov: FovParams,
    pub noise: PanicNoiseParams,
    /// Probability of keeping the previous herd direction each step.
    pub herd_persistence: f64,
    /// When false the evacuee is fully rational (panic pinned to zero).
    pub panic_enabled: bool,
}

impl Default for EvacueeParams {
    fn default() -> Self {
        Self {
            max_speed: 1,
            fov: crate::world::FovTable::default().evacuee,
            noise: PanicNoiseParams::default(),
            herd_persistence: 0.8,
            panic_enabled: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvacueeState {
    pub pose: AgentPose,
    pub goal: Cell,
    pub panic: PanicState,
    /// Displacement applied on the last step.
    pub velocity: (i32, i32),
    pub guided: bool,
    /// Exogenous social direction (one of the four cardinals).
    pub herd_direction: (i32, i32),
}

impl EvacueeState {
    pub fn new(start: Cell, goal: Cell, params: &EvacueeParams, herd_direction: (i32, i32)) -> Self {
        let (dx, dy) = herd_direction;
        Self {
            pose: AgentPose::new(
                AgentKind::Evacuee,
                start,
                f64::from(dy).atan2(f64::from(dx)),
                params.max_speed,
            ),
            goal,
            panic: PanicState::CALM,
            velocity: (0, 0),
            guided: false,
            herd_direction,
        }
    }

    pub fn position(&self) -> Cell {
        self.pose.position
    }
}

/// Draws the two Gaussian components, clamped into [0, 1].
pub fn sample_social_noise<R: Rng + ?Sized>(noise: &PanicNoiseParams, rng: &mut R) -> (f64, f64) {
    let draw = |mean: f64, sd: f64, rng: &mut R| {
        let v = if sd > 0.0 {
            Normal::new(mean, sd).expect("finite sd").sample(rng)
        } else {
            mean
        };
        v.clamp(0.0, 1.0)
    };
    let d2 = draw(noise.mean2, noise.sd2, rng);
    let d4 = draw(noise.mean4, noise.sd4, rng);
    (d2, d4)
}

/// The four stimulus components for the current state.
pub fn delta_components<R: Rng + ?Sized>(
    state: &EvacueeState,
    map: &GridMap,
    fire: &FireState,
    params: &EvacueeParams,
    rng: &mut R,
) -> [f64; 4] {
    let diag = map.diagonal();
    let d1 = if diag > 0.0 {
        (state.position().distance(state.goal) / diag).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (d2, d4) = sample_social_noise(&params.noise, rng);
    let fire_seen = compute_fov(map, &state.pose, &params.fov)
        .iter()
        .any(|&c| fire.is_burning(c));
    let d3 = if fire_seen { 1.0 } else { 0.0 };
    [d1, d2, d3, d4]
}

pub fn update_panic(panic: PanicState, deltas: [f64; 4]) -> PanicState {
    let delta = deltas.iter().sum::<f64>() / 4.0;
    PanicState {
        gamma: ((panic.gamma + delta) / 2.0).clamp(0.0, 1.0),
        last_deltas: deltas,
    }
}

/// Rounds to the nearest integer, halves toward zero.
fn round_half_toward_zero(v: f64) -> i32 {
    let t = v.trunc();
    if (v - t).abs() == 0.5 {
        t as i32
    } else {
        v.round() as i32
    }
}

/// Convex blend of the goal-directed and herd velocities, discretized to the grid.
pub fn evacuee_velocity(gamma: f64, v_optimal: [f64; 2], v_herd: [f64; 2], max_speed: u32) -> (i32, i32) {
    let limit = max_speed as i32;
    let blend = |k: usize| (1.0 - gamma) * v_optimal[k] + gamma * v_herd[k];
    (
        round_half_toward_zero(blend(0)).clamp(-limit, limit),
        round_half_toward_zero(blend(1)).clamp(-limit, limit),
    )
}

/// Fire-avoiding path, falling back to one through fire when no clean route exists.
fn route(map: &GridMap, fire: &FireState, from: Cell, to: Cell) -> Option<Vec<Cell>> {
    astar_path_avoiding(map, AgentKind::Evacuee, from, to, |c| fire.is_burning(c))
        .or_else(|| astar_path(map, AgentKind::Evacuee, from, to))
}

fn within(a: Cell, b: Option<Cell>, radius: f64) -> bool {
    b.is_some_and(|b| a.distance(b) < radius)
}

/// Advances the evacuee one step.
///
/// Social noise and the herd redraw are consumed every step, even while guided,
/// so runs that differ only in rescuer behavior see identical noise streams.
/// Interception is checked against `llr_position` both before and after the
/// move; it never triggers on the goal cell itself.
pub fn step_evacuee<R: Rng + ?Sized>(
    state: &EvacueeState,
    map: &GridMap,
    fire: &FireState,
    params: &EvacueeParams,
    rng: &mut R,
    llr_position: Option<Cell>,
    capture_radius: f64,
) -> EvacueeState {
    let mut next = *state;
    let deltas = delta_components(state, map, fire, params, rng);
    let keep: f64 = rng.random();
    let pick = rng.random_range(0..CARDINALS.len());
    if keep >= params.herd_persistence {
        next.herd_direction = CARDINALS[pick];
    }

    let pos = state.position();
    if !next.guided && pos != state.goal && within(pos, llr_position, capture_radius) {
        next.guided = true;
    }

    let speed = params.max_speed as usize;
    let target = if next.guided {
        route(map, fire, pos, state.goal)
            .map(|path| path[speed.min(path.len() - 1)])
            .unwrap_or(pos)
    } else {
        next.panic = if params.panic_enabled {
            update_panic(state.panic, deltas)
        } else {
            PanicState {
                gamma: 0.0,
                last_deltas: deltas,
            }
        };
        let v_optimal = route(map, fire, pos, state.goal)
            .map(|path| {
                let waypoint = path[speed.min(path.len() - 1)];
                [f64::from(waypoint.x - pos.x), f64::from(waypoint.y - pos.y)]
            })
            .unwrap_or([0.0, 0.0]);
        let (hx, hy) = next.herd_direction;
        let s = f64::from(params.max_speed);
        let v_herd = [f64::from(hx) * s, f64::from(hy) * s];
        let (vx, vy) = evacuee_velocity(next.panic.gamma, v_optimal, v_herd, params.max_speed);
        let candidate = pos.offset(vx, vy);
        if map.accessible(AgentKind::Evacuee, candidate) {
            candidate
        } else {
            pos
        }
    };

    next.velocity = (target.x - pos.x, target.y - pos.y);
    if target != pos {
        next.pose.heading = f64::from(target.y - pos.y).atan2(f64::from(target.x - pos.x));
    }
    next.pose.position = target;
    if !next.guided && target != state.goal && within(target, llr_position, capture_radius) {
        next.guided = true;
    }
    next
}
