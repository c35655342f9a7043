use super::{Environment, PpoConfig, PpoError};
use crate::policy::{RecurrentPolicy, RecurrentState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub obs: Vec<f64>,
    /// Recurrent state fed to the policy at this step.
    pub state: RecurrentState,
    pub u: Vec<f64>,
    pub log_prob: f64,
    pub reward: f64,
    pub value: f64,
    pub done: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRecord {
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub captured: bool,
}

impl EpisodeRecord {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryBatch {
    pub episodes: Vec<EpisodeRecord>,
}

impl TrajectoryBatch {
    pub fn frames(&self) -> usize {
        self.episodes.iter().map(|e| e.steps.len()).sum()
    }

    pub fn mean_episode_reward(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().map(|e| e.total_reward()).sum::<f64>() / self.episodes.len() as f64
    }

    pub fn capture_rate(&self) -> f64 {
        if self.episodes.is_empty() {
            return 0.0;
        }
        self.episodes.iter().filter(|e| e.captured).count() as f64 / self.episodes.len() as f64
    }
}

/// Rolls whole episodes with a sampling policy until at least
/// `frames_per_batch` steps are stored. Episode seeds and action noise both
/// derive from `seed`.
pub fn collect_batch<E: Environment + ?Sized>(
    env: &mut E,
    policy: &RecurrentPolicy,
    config: &PpoConfig,
    seed: u64,
) -> Result<TrajectoryBatch, PpoError> {
    if env.obs_dim() != policy.obs_dim() || env.action_bounds().len() != policy.act_dim() {
        return Err(PpoError::Config(format!(
            "policy shape ({}, {}) does not match environment ({}, {})",
            policy.obs_dim(),
            policy.act_dim(),
            env.obs_dim(),
            env.action_bounds().len()
        )));
    }
    let mut seeds = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = ChaCha8Rng::seed_from_u64(seed);
    noise.set_stream(1);
    let mut batch = TrajectoryBatch::default();
    let mut frames = 0;
    while frames < config.frames_per_batch {
        let episode_seed: u64 = seeds.random();
        let mut obs = env.reset(episode_seed).map_err(|e| PpoError::Env {
            episode: batch.episodes.len(),
            seed: episode_seed,
            source: e,
        })?;
        let mut state = policy.initial_state();
        let mut steps = Vec::new();
        let mut captured = false;
        loop {
            let out = policy.act(&obs, &state, &mut noise, false);
            let tr = env.step(&out.action).map_err(|e| PpoError::Env {
                episode: batch.episodes.len(),
                seed: episode_seed,
                source: e,
            })?;
            captured |= tr.captured;
            steps.push(StepRecord {
                obs: std::mem::replace(&mut obs, tr.obs),
                state: std::mem::replace(&mut state, out.state),
                u: out.u,
                log_prob: out.log_prob,
                reward: tr.reward,
                value: out.value,
                done: tr.done,
            });
            if tr.done {
                break;
            }
        }
        frames += steps.len();
        batch.episodes.push(EpisodeRecord {
            seed: episode_seed,
            steps,
            captured,
        });
    }
    Ok(batch)
}
