//! The rescue POMDP: two rescuers, one evacuee, spreading fire.
//!
//! A step resolves the HLR action, then the LLR action, then moves the
//! evacuee, spreads the fire, checks capture and termination, and finally
//! scores the transition with the shared team reward.

mod action;
mod observation;
mod reward;
mod scenario;

pub use action::{resolve_action, snap_to_accessible, JointAction, PolarAction, JOINT_ACTION_DIM};
pub use observation::{build_observation, feature_dim, FireCell, Observation, SCALAR_FEATURES};
pub use reward::{compute_reward, within_capture, RewardParams, RewardTerms};
pub use scenario::{cells_within, sample_scenario, Scenario, Variant, VariantSpec};

use crate::evacuee::{step_evacuee, EvacueeParams, EvacueeState, CARDINALS};
use crate::fire::FireState;
use crate::world::{compute_fov, AgentKind, AgentPose, Cell, FovTable, GridMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("step called on a finished episode")]
    EpisodeDone,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Intercepted, then guided to the safe zone.
    Captured,
    EvacReachedSafeZoneUnaided,
    Timeout,
    EvacBurned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FireParams {
    pub p_fire: f64,
    /// Explicit ignition cells; when absent one of the map's fire origins is used.
    pub origins: Option<Vec<Cell>>,
}

impl Default for FireParams {
    fn default() -> Self {
        Self {
            p_fire: 0.05,
            origins: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvParams {
    #[serde(rename = "T_max")]
    pub t_max: u32,
    /// Selection radius for polar actions.
    #[serde(rename = "R")]
    pub selection_radius: f64,
    pub capture_radius: f64,
    pub seed: u64,
    pub hlr_speed: u32,
    pub llr_speed: u32,
    /// Index of the base start-goal pair on the map.
    pub pair: usize,
    /// Index of the base fire origin on the map.
    pub origin: usize,
    /// Draw the base pair and origin uniformly every reset (training layout).
    pub randomize_scenario: bool,
    /// Rescuer start cell; the map's safe zone when absent.
    pub depot: Option<Cell>,
    pub reward: RewardParams,
}

impl Default for EnvParams {
    fn default() -> Self {
        Self {
            t_max: 100,
            selection_radius: 5.0,
            capture_radius: 1.0,
            seed: 0,
            hlr_speed: 3,
            llr_speed: 2,
            pair: 0,
            origin: 0,
            randomize_scenario: false,
            depot: None,
            reward: RewardParams::default(),
        }
    }
}

/// Everything needed to build episodes. Cheap to share behind an `Arc`.
/// Serializes with the map embedded as text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    #[serde(with = "map_text")]
    pub map: Arc<GridMap>,
    /// HLR and LLR view geometry. The evacuee's comes from `evac.fov`.
    pub fov: FovTable,
    pub fire: FireParams,
    pub evac: EvacueeParams,
    pub env: EnvParams,
    pub variant: VariantSpec,
    /// When false the rescuers never move or capture (unaided baselines).
    pub rescuers: bool,
}

mod map_text {
    use crate::world::{load_map, GridMap};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    use std::sync::Arc;

    pub fn serialize<S: Serializer>(map: &Arc<GridMap>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&map.to_document())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Arc<GridMap>, D::Error> {
        let text = String::deserialize(d)?;
        load_map(&text).map(Arc::new).map_err(D::Error::custom)
    }
}

impl EnvConfig {
    pub fn new(map: Arc<GridMap>) -> Self {
        let evac = EvacueeParams::default();
        let mut fov = FovTable::default();
        fov.evacuee = evac.fov;
        Self {
            map,
            fov,
            fire: FireParams::default(),
            evac,
            env: EnvParams::default(),
            variant: VariantSpec::env_i(),
            rescuers: true,
        }
    }

    pub fn depot(&self) -> Cell {
        self.env.depot.unwrap_or(self.map.safe_zone())
    }

    pub fn patch_radius(&self) -> i32 {
        self.fov.hlr.range.max(0.0).floor() as i32
    }

    pub fn observation_dim(&self) -> usize {
        feature_dim(self.patch_radius())
    }

    pub fn alpha(&self) -> f64 {
        self.env.reward.alpha_for(self.env.llr_speed)
    }

    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), EnvError> {
        let err = |m: String| Err(EnvError::Config(m));
        let map = &self.map;
        if map.start_goal_pairs().is_empty() {
            return err("map lists no start-goal pairs".into());
        }
        if !self.env.randomize_scenario && self.env.pair >= map.start_goal_pairs().len() {
            return err(format!("env.pair {} out of range", self.env.pair));
        }
        if self.fire.origins.is_none()
            && !map.fire_origins().is_empty()
            && !self.env.randomize_scenario
            && self.env.origin >= map.fire_origins().len()
        {
            return err(format!("env.origin {} out of range", self.env.origin));
        }
        if let Some(origins) = &self.fire.origins {
            if let Some(bad) = origins.iter().find(|c| !map.in_bounds(**c)) {
                return err(format!("fire origin {bad} outside the grid"));
            }
        }
        if !(0.0..=1.0).contains(&self.fire.p_fire) {
            return err(format!("fire.p_fire {} outside [0, 1]", self.fire.p_fire));
        }
        if self.env.t_max == 0 {
            return err("env.T_max must be positive".into());
        }
        if !(self.env.selection_radius >= 0.0 && self.env.selection_radius.is_finite()) {
            return err("env.R must be finite and non-negative".into());
        }
        if !(self.env.capture_radius > 0.0) {
            return err("env.capture_radius must be positive".into());
        }
        if self.env.hlr_speed == 0 || self.env.llr_speed == 0 || self.evac.max_speed == 0 {
            return err("agent speeds must be at least 1".into());
        }
        let n = &self.evac.noise;
        if n.sd2 < 0.0 || n.sd4 < 0.0 || !(n.sd2.is_finite() && n.sd4.is_finite()) {
            return err("evac.noise standard deviations must be non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.evac.herd_persistence) {
            return err("evac.herd_persistence outside [0, 1]".into());
        }
        if !map.accessible(AgentKind::Llr, self.depot()) {
            return err(format!("depot {} is not LLR-accessible", self.depot()));
        }
        let r = &self.env.reward;
        let weights = [r.w_hlr_fov, r.w_llr_fov, r.w_approach, r.w_time, r.capture_bonus];
        if weights.iter().any(|w| !w.is_finite()) || r.alpha.is_some_and(|a| !a.is_finite()) {
            return err("reward weights must be finite".into());
        }
        self.variant.validate()
    }

    fn base_scenario<R: Rng + ?Sized>(&self, rng: &mut R) -> Scenario {
        let map = &self.map;
        let pairs = map.start_goal_pairs();
        let pair = if self.env.randomize_scenario {
            rng.random_range(0..pairs.len())
        } else {
            self.env.pair
        };
        let fire_origins = match &self.fire.origins {
            Some(list) => list.clone(),
            None if map.fire_origins().is_empty() => Vec::new(),
            None => {
                let idx = if self.env.randomize_scenario {
                    rng.random_range(0..map.fire_origins().len())
                } else {
                    self.env.origin
                };
                vec![map.fire_origins()[idx]]
            }
        };
        Scenario {
            start: pairs[pair].0,
            goal: pairs[pair].1,
            fire_origins,
        }
    }
}

/// Full latent state of an episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState {
    pub scenario: Scenario,
    pub fire: FireState,
    pub evacuee: EvacueeState,
    pub hlr: AgentPose,
    pub llr: AgentPose,
    pub t: u32,
    pub done: bool,
    pub outcome: Option<Outcome>,
    /// Step index at which the LLR intercepted the evacuee.
    pub captured_at: Option<u32>,
    /// Step index at which the evacuee reached its safe zone.
    pub arrived_at: Option<u32>,
    /// Row-major fields of view after the last transition.
    pub hlr_fov: Vec<Cell>,
    pub llr_fov: Vec<Cell>,
}

fn fov_contains(fov: &[Cell], cell: Cell) -> bool {
    fov.binary_search_by_key(&(cell.y, cell.x), |c| (c.y, c.x)).is_ok()
}

impl EnvState {
    pub fn in_hlr_fov(&self, cell: Cell) -> bool {
        fov_contains(&self.hlr_fov, cell)
    }

    pub fn in_llr_fov(&self, cell: Cell) -> bool {
        fov_contains(&self.llr_fov, cell)
    }

    pub fn in_any_fov(&self, cell: Cell) -> bool {
        self.in_hlr_fov(cell) || self.in_llr_fov(cell)
    }

    pub fn evac_visible(&self) -> bool {
        self.in_any_fov(self.evacuee.position())
    }

    pub fn llr_evac_distance(&self) -> f64 {
        self.llr.position.distance(self.evacuee.position())
    }

    fn refresh_fov(&mut self, map: &GridMap, fov: &FovTable) {
        self.hlr_fov = compute_fov(map, &self.hlr, &fov.hlr);
        self.llr_fov = compute_fov(map, &self.llr, &fov.llr);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepInfo {
    pub captured_now: bool,
    /// Cells that caught fire during this step, row-major.
    pub ignited: Vec<Cell>,
    pub evac_visible: bool,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One environment instance. Owns its random streams: scenario sampling,
/// fire spread, and evacuee noise each draw from a separate stream of the
/// episode seed, so runs that differ only in rescuer behavior see the same
/// fire and the same panic noise.
#[derive(Debug, Clone)]
pub struct Env {
    config: Arc<EnvConfig>,
    state: EnvState,
    fire_rng: ChaCha8Rng,
    evac_rng: ChaCha8Rng,
    seed: u64,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl Env {
    /// Validates the configuration and resets with `config.env.seed`.
    pub fn new(config: Arc<EnvConfig>) -> Result<Self, EnvError> {
        config.validate()?;
        let seed = config.env.seed;
        let state = Self::initial_state(&config, seed)?;
        Ok(Self {
            fire_rng: stream(seed, 1),
            evac_rng: stream(seed, 2),
            config,
            state,
            seed,
        })
    }

    fn initial_state(config: &EnvConfig, seed: u64) -> Result<EnvState, EnvError> {
        let map = &config.map;
        let mut scenario_rng = stream(seed, 0);
        let base = config.base_scenario(&mut scenario_rng);
        let scenario = sample_scenario(map, &base, &config.variant, &mut scenario_rng)?;
        let fire = FireState::seed(map, &scenario.fire_origins, config.fire.p_fire)
            .map_err(|e| EnvError::Config(e.to_string()))?;
        let herd = CARDINALS[scenario_rng.random_range(0..CARDINALS.len())];
        let evacuee = EvacueeState::new(scenario.start, scenario.goal, &config.evac, herd);
        let depot = config.depot();
        let mut state = EnvState {
            scenario,
            fire,
            evacuee,
            hlr: AgentPose::new(AgentKind::Hlr, depot, 0.0, config.env.hlr_speed),
            llr: AgentPose::new(AgentKind::Llr, depot, 0.0, config.env.llr_speed),
            t: 0,
            done: false,
            outcome: None,
            captured_at: None,
            arrived_at: None,
            hlr_fov: Vec::new(),
            llr_fov: Vec::new(),
        };
        state.refresh_fov(map, &config.fov);
        Ok(state)
    }

    pub fn reset(&mut self, seed: u64) -> Result<Observation, EnvError> {
        self.state = Self::initial_state(&self.config, seed)?;
        self.fire_rng = stream(seed, 1);
        self.evac_rng = stream(seed, 2);
        self.seed = seed;
        Ok(self.observation())
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn shared_config(&self) -> Arc<EnvConfig> {
        Arc::clone(&self.config)
    }

    pub fn map(&self) -> &GridMap {
        &self.config.map
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn observation(&self) -> Observation {
        self.observation_for(AgentKind::Llr)
    }

    pub fn observation_for(&self, kind: AgentKind) -> Observation {
        build_observation(
            &self.state,
            &self.config.map,
            self.config.patch_radius(),
            self.config.env.t_max,
            kind,
        )
    }

    pub fn step(&mut self, action: &JointAction) -> Result<Step, EnvError> {
        if self.state.done {
            return Err(EnvError::EpisodeDone);
        }
        let config = Arc::clone(&self.config);
        let map = &*config.map;
        let radius = config.env.selection_radius;
        let prev = self.state.clone();
        let mut next = prev.clone();

        if config.rescuers {
            let (pos, heading) = resolve_action(map, &prev.hlr, &action.hlr, radius);
            next.hlr.position = pos;
            next.hlr.heading = heading;
            if !prev.evacuee.guided {
                let (pos, heading) = resolve_action(map, &prev.llr, &action.llr, radius);
                next.llr.position = pos;
                next.llr.heading = heading;
            }
        }

        let llr_position = config.rescuers.then_some(next.llr.position);
        next.evacuee = step_evacuee(
            &prev.evacuee,
            map,
            &prev.fire,
            &config.evac,
            &mut self.evac_rng,
            llr_position,
            config.env.capture_radius,
        );
        let captured_now = !prev.evacuee.guided && next.evacuee.guided;
        if captured_now {
            next.captured_at = Some(prev.t + 1);
        }
        if next.evacuee.guided && config.rescuers {
            // the LLR escorts the evacuee once it has been intercepted
            next.llr.position = next.evacuee.position();
        }

        let ignited = next.fire.step(&mut self.fire_rng);
        next.t = prev.t + 1;
        next.refresh_fov(map, &config.fov);

        let evac = next.evacuee.position();
        let outcome = if evac == next.evacuee.goal {
            next.arrived_at = Some(next.t);
            Some(if next.evacuee.guided {
                Outcome::Captured
            } else {
                Outcome::EvacReachedSafeZoneUnaided
            })
        } else if next.fire.is_burning(evac) {
            Some(Outcome::EvacBurned)
        } else if next.t >= config.env.t_max {
            Some(Outcome::Timeout)
        } else {
            None
        };
        next.done = outcome.is_some();
        next.outcome = outcome;

        let reward = compute_reward(&prev, &next, &config.env.reward, config.alpha());
        let evac_visible = next.evac_visible();
        self.state = next;
        Ok(Step {
            observation: self.observation(),
            reward,
            done: self.state.done,
            info: StepInfo {
                captured_now,
                ignited,
                evac_visible,
                outcome,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::{load_map, DEFAULT_MAP};

    fn config() -> Arc<EnvConfig> {
        Arc::new(EnvConfig::new(Arc::new(load_map(DEFAULT_MAP).unwrap())))
    }

    #[test]
    fn same_seed_same_episode_start() {
        let cfg = config();
        let mut a = Env::new(cfg.clone()).unwrap();
        let mut b = Env::new(cfg).unwrap();
        assert_eq!(a.reset(11).unwrap(), b.reset(11).unwrap());
        assert_eq!(a.state(), b.state());
    }

    #[test]
    fn env_i_reset_uses_base_scenario() {
        let cfg = config();
        let mut env = Env::new(cfg.clone()).unwrap();
        let (s, g) = cfg.map.start_goal_pairs()[0];
        for seed in 0..10 {
            env.reset(seed).unwrap();
            let st = env.state();
            assert_eq!(st.evacuee.position(), s);
            assert_eq!(st.evacuee.goal, g);
            assert_eq!(st.scenario.fire_origins, vec![cfg.map.fire_origins()[0]]);
            assert_eq!(st.evacuee.panic.gamma, 0.0);
            assert_eq!(st.hlr.position, cfg.map.safe_zone());
        }
    }

    #[test]
    fn env_iv_reset_within_radius() {
        let mut cfg = (*config()).clone();
        cfg.variant = VariantSpec::env_iv(5.0);
        let cfg = Arc::new(cfg);
        let mut env = Env::new(cfg.clone()).unwrap();
        let (s, _) = cfg.map.start_goal_pairs()[0];
        for seed in 0..50 {
            env.reset(seed).unwrap();
            assert!(env.state().evacuee.position().distance(s) <= 5.0);
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut cfg = (*config()).clone();
        cfg.env.pair = 999;
        assert!(matches!(Env::new(Arc::new(cfg)), Err(EnvError::Config(_))));
        let mut cfg = (*config()).clone();
        cfg.variant = VariantSpec {
            variant: Variant::II,
            position_radius: 1.0,
            fire_radius: 3.0,
        };
        assert!(matches!(Env::new(Arc::new(cfg)), Err(EnvError::Config(_))));
    }

    #[test]
    fn timeout_when_nothing_happens() {
        let mut cfg = (*config()).clone();
        cfg.env.t_max = 3;
        cfg.fire.p_fire = 0.0;
        let mut env = Env::new(Arc::new(cfg)).unwrap();
        let mut last = None;
        for _ in 0..3 {
            last = Some(env.step(&JointAction::default()).unwrap());
        }
        let last = last.unwrap();
        assert!(last.done);
        assert_eq!(last.info.outcome, Some(Outcome::Timeout));
        assert_eq!(env.step(&JointAction::default()), Err(EnvError::EpisodeDone));
    }

    #[test]
    fn llr_interception_pays_bonus_and_guides() {
        let map = load_map("S.......\n........\n........\n").unwrap();
        let mut cfg = EnvConfig::new(Arc::new(GridMap::from_parts(
            map.width(),
            map.height(),
            (0..map.len()).map(|_| crate::world::CellKind::Open).collect(),
            Cell::new(0, 0),
            vec![],
            vec![(Cell::new(3, 0), Cell::new(7, 2))],
        )));
        cfg.fire.p_fire = 0.0;
        cfg.evac.panic_enabled = false;
        let mut env = Env::new(Arc::new(cfg)).unwrap();
        // evacuee at (3,0); LLR at (0,0) with speed 2 reaches (2,0), then
        // the evacuee steps toward its goal or onto the LLR
        let act = JointAction {
            hlr: PolarAction::default(),
            llr: PolarAction::new(3.0, 0.0, 0.0),
        };
        let mut captured_step = None;
        for _ in 0..4 {
            let step = env.step(&act).unwrap();
            if step.info.captured_now {
                assert_eq!(step.reward, 10.0);
                captured_step = Some(env.state().t);
                break;
            }
        }
        let t = captured_step.expect("capture");
        assert!(env.state().evacuee.guided);
        assert_eq!(env.state().captured_at, Some(t));
        let after = env.step(&act).unwrap();
        assert_eq!(after.reward, 0.0);
        assert_eq!(env.state().llr.position, env.state().evacuee.position());
    }

    #[test]
    fn evacuee_on_burning_cell_is_lost() {
        let map = GridMap::from_parts(
            3,
            1,
            vec![crate::world::CellKind::Open; 3],
            Cell::new(0, 0),
            vec![],
            vec![(Cell::new(0, 0), Cell::new(2, 0))],
        );
        let mut cfg = EnvConfig::new(Arc::new(map));
        cfg.fire.origins = Some(vec![Cell::new(1, 0)]);
        cfg.fire.p_fire = 1.0;
        cfg.evac.panic_enabled = false;
        cfg.rescuers = false;
        let mut env = Env::new(Arc::new(cfg)).unwrap();
        // the only route runs through the fire; the evacuee steps into it
        let step = env.step(&JointAction::default()).unwrap();
        assert!(step.done);
        assert_eq!(step.info.outcome, Some(Outcome::EvacBurned));
    }
}
