//! Rescuer controllers: the recurrent actor-critic and two baselines.

mod checkpoint;
pub mod dist;
mod learned;
mod net;
mod random;
mod scripted;

pub use checkpoint::{load_policy, save_policy, Checkpoint, TensorEntry, CHECKPOINT_VERSION};
pub use dist::{normal_log_pdf, squash, squashed_log_prob, unsquash, TanhNormal};
pub use learned::{policy_act, ActOutput, LearnedPolicy};
pub use net::{Layout, PolicyOutput, RecurrentPolicy, RecurrentState, StepCache};
pub use random::RandomPolicy;
pub use scripted::{pursuit_target, sweep_waypoints, ScriptedPolicy};

use crate::env::{EnvConfig, JointAction, Observation, JOINT_ACTION_DIM};
use std::sync::Arc;

#[derive(Debug, thiserror::Error)]
pub enum PolicyError {
    #[error("policy configuration error: {0}")]
    Config(String),
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Anything that can drive both rescuers for an episode.
pub trait RescuePolicy: Send {
    fn name(&self) -> &str;
    /// Clears per-episode memory and reseeds any randomness.
    fn reset(&mut self, episode_seed: u64);
    fn act(&mut self, obs: &Observation) -> JointAction;
}

/// Recipe for building a fresh controller per episode.
#[derive(Debug, Clone)]
pub enum PolicySpec {
    Scripted,
    Random,
    Learned {
        net: Arc<RecurrentPolicy>,
        deterministic: bool,
    },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Scripted => "scripted",
            PolicySpec::Random => "random",
            PolicySpec::Learned { .. } => "learned",
        }
    }

    /// Checks that a learned network fits the environment's observation and
    /// action shapes.
    pub fn check(&self, config: &EnvConfig) -> Result<(), PolicyError> {
        if let PolicySpec::Learned { net, .. } = self {
            if net.obs_dim() != config.observation_dim() || net.act_dim() != JOINT_ACTION_DIM {
                return Err(PolicyError::Config(format!(
                    "policy expects {} observations and {} actions, environment provides {} and {}",
                    net.obs_dim(),
                    net.act_dim(),
                    config.observation_dim(),
                    JOINT_ACTION_DIM
                )));
            }
        }
        Ok(())
    }

    pub fn build(&self, config: &EnvConfig) -> Result<Box<dyn RescuePolicy>, PolicyError> {
        self.check(config)?;
        let radius = config.env.selection_radius;
        Ok(match self {
            PolicySpec::Scripted => Box::new(ScriptedPolicy::new(
                Arc::clone(&config.map),
                radius,
                config.fov.hlr.range,
            )),
            PolicySpec::Random => Box::new(RandomPolicy::new(radius)),
            PolicySpec::Learned { net, deterministic } => Box::new(LearnedPolicy::new(Arc::clone(net), *deterministic)),
        })
    }
}
