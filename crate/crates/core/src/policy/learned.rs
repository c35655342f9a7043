use super::dist::TanhNormal;
use super::net::{RecurrentPolicy, RecurrentState};
use super::random::policy_rng;
use super::RescuePolicy;
use crate::env::{JointAction, Observation};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// One action draw with everything the trainer stores about it.
#[derive(Debug, Clone, PartialEq)]
pub struct ActOutput {
    /// Pre-squash sample.
    pub u: Vec<f64>,
    /// Action in environment units.
    pub action: Vec<f64>,
    pub log_prob: f64,
    pub value: f64,
    pub state: RecurrentState,
}

impl RecurrentPolicy {
    /// Samples (or, when `deterministic`, takes the mean of) the action
    /// distribution for one observation and advances the recurrent state.
    pub fn act<R: Rng + ?Sized>(
        &self,
        x: &[f64],
        state: &RecurrentState,
        rng: &mut R,
        deterministic: bool,
    ) -> ActOutput {
        let out = self.forward(x, state);
        let dist = TanhNormal::new(&out.action_mean, &out.action_log_sd, self.bounds());
        let u = if deterministic {
            dist.mode_u()
        } else {
            dist.sample_u(rng)
        };
        let action = dist.to_action(&u);
        let log_prob = dist.log_prob(&u);
        ActOutput {
            u,
            action,
            log_prob,
            value: out.value,
            state: out.state,
        }
    }
}

/// Joint-action view of [`RecurrentPolicy::act`] for a rescue observation.
pub fn policy_act<R: Rng + ?Sized>(
    policy: &RecurrentPolicy,
    obs: &Observation,
    state: &RecurrentState,
    rng: &mut R,
    deterministic: bool,
) -> (JointAction, ActOutput) {
    let out = policy.act(&obs.to_features(), state, rng, deterministic);
    (JointAction::from_slice(&out.action), out)
}

/// A trained network driving the rescuers.
#[derive(Debug, Clone)]
pub struct LearnedPolicy {
    net: Arc<RecurrentPolicy>,
    state: RecurrentState,
    deterministic: bool,
    rng: ChaCha8Rng,
}

impl LearnedPolicy {
    pub fn new(net: Arc<RecurrentPolicy>, deterministic: bool) -> Self {
        Self {
            state: net.initial_state(),
            net,
            deterministic,
            rng: policy_rng(0),
        }
    }
}

impl RescuePolicy for LearnedPolicy {
    fn name(&self) -> &str {
        "learned"
    }

    fn reset(&mut self, episode_seed: u64) {
        self.state = self.net.initial_state();
        self.rng = policy_rng(episode_seed);
    }

    fn act(&mut self, obs: &Observation) -> JointAction {
        let (action, out) = policy_act(&self.net, obs, &self.state, &mut self.rng, self.deterministic);
        self.state = out.state;
        action
    }
}
