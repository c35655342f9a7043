//! Synchronous PPO for the recurrent actor-critic.
//!
//! Each iteration collects whole episodes, then runs `num_epochs` passes of
//! Adam updates over episode-aligned sub-batches. Recurrent states are
//! replayed from the snapshots stored during collection rather than
//! re-unrolled. Values and advantages are refreshed with the current critic
//! at the start of every epoch.

mod adam;
mod collect;
mod gae;
mod loss;

pub use adam::Adam;
pub use collect::{collect_batch, EpisodeRecord, StepRecord, TrajectoryBatch};
pub use gae::{compute_gae, normalize};
pub use loss::{clipped_surrogate, ppo_loss, ppo_loss_and_grad, smooth_l1, LossComponents, Sample};

use crate::env::{Env, EnvError, JointAction};
use crate::policy::RecurrentPolicy;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub frames_per_batch: usize,
    pub sub_batch: usize,
    pub num_epochs: usize,
    pub discount: f64,
    pub gae_lambda: f64,
    pub clip: f64,
    pub critic_coef: f64,
    pub entropy_coef: f64,
    pub learning_rate: f64,
    pub adam_betas: (f64, f64),
    pub adam_eps: f64,
    pub weight_decay: f64,
    pub total_timesteps: usize,
    pub hidden_size: usize,
    pub normalize_advantages: bool,
    /// Write a checkpoint every this many iterations; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            frames_per_batch: 1024,
            sub_batch: 256,
            num_epochs: 10,
            discount: 0.99,
            gae_lambda: 0.95,
            clip: 0.2,
            critic_coef: 0.5,
            entropy_coef: 0.005,
            learning_rate: 3e-4,
            adam_betas: (0.9, 0.99),
            adam_eps: 1e-8,
            weight_decay: 0.0,
            total_timesteps: 200_000,
            hidden_size: 64,
            normalize_advantages: true,
            checkpoint_every: 0,
        }
    }
}

impl PpoConfig {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), PpoError> {
        let err = |m: &str| Err(PpoError::Config(m.into()));
        if self.frames_per_batch == 0 || self.sub_batch == 0 || self.num_epochs == 0 {
            return err("frames_per_batch, sub_batch and num_epochs must be positive");
        }
        if self.hidden_size == 0 {
            return err("hidden_size must be positive");
        }
        if !(self.clip > 0.0 && self.clip < 1.0) {
            return err("clip must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.discount) || !(0.0..=1.0).contains(&self.gae_lambda) {
            return err("discount and gae_lambda must lie in [0, 1]");
        }
        if !(self.learning_rate > 0.0) || !(self.adam_eps > 0.0) {
            return err("learning_rate and adam_eps must be positive");
        }
        let (b1, b2) = self.adam_betas;
        if !(0.0..1.0).contains(&b1) || !(0.0..1.0).contains(&b2) {
            return err("adam_betas must lie in [0, 1)");
        }
        if self.critic_coef < 0.0 || self.entropy_coef < 0.0 || self.weight_decay < 0.0 {
            return err("loss coefficients and weight_decay must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PpoError {
    #[error("ppo configuration error: {0}")]
    Config(String),
    #[error("environment failed in episode {episode} (seed {seed}): {source}")]
    Env {
        episode: usize,
        seed: u64,
        #[source]
        source: EnvError,
    },
    #[error("non-finite loss at iteration {iteration}, epoch {epoch}: {components:?}")]
    NonFiniteLoss {
        iteration: usize,
        epoch: usize,
        components: LossComponents,
    },
    #[error("parameters diverged at iteration {iteration}")]
    Diverged {
        iteration: usize,
        last_good: Box<RecurrentPolicy>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Policy(#[from] crate::policy::PolicyError),
}

/// Result of one environment step as the trainer sees it.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    /// The rescuers intercepted the evacuee on this step.
    pub captured: bool,
}

/// Flat-vector view of an episodic environment.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn action_bounds(&self) -> Vec<(f64, f64)>;
    fn reset(&mut self, seed: u64) -> Result<Vec<f64>, EnvError>;
    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvError>;
}

impl Environment for Env {
    fn obs_dim(&self) -> usize {
        self.config().observation_dim()
    }

    fn action_bounds(&self) -> Vec<(f64, f64)> {
        JointAction::bounds(self.config().env.selection_radius).to_vec()
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>, EnvError> {
        Env::reset(self, seed).map(|o| o.to_features())
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvError> {
        let step = Env::step(self, &JointAction::from_slice(action))?;
        Ok(Transition {
            obs: step.observation.to_features(),
            reward: step.reward,
            done: step.done,
            captured: step.info.captured_now,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub frames: usize,
    pub episodes: usize,
    pub mean_reward: f64,
    pub capture_rate: f64,
    pub loss: f64,
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingLog {
    pub iterations: Vec<IterationLog>,
}

impl TrainingLog {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<(), PpoError> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.iterations {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), PpoError> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Groups episode indices into consecutive runs of at least `sub_batch`
/// frames; the last group takes whatever remains.
fn episode_groups(order: &[usize], lengths: &[usize], sub_batch: usize) -> Vec<Vec<usize>> {
    let mut groups = Vec::new();
    let mut current = Vec::new();
    let mut frames = 0;
    for &e in order {
        current.push(e);
        frames += lengths[e];
        if frames >= sub_batch {
            groups.push(std::mem::take(&mut current));
            frames = 0;
        }
    }
    if !current.is_empty() {
        groups.push(current);
    }
    groups
}

/// Per-step advantages and returns for every episode, using the current
/// critic on the stored recurrent snapshots.
pub fn batch_advantages(
    policy: &RecurrentPolicy,
    batch: &TrajectoryBatch,
    config: &PpoConfig,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    use rayon::prelude::*;
    let per_episode: Vec<(Vec<f64>, Vec<f64>)> = batch
        .episodes
        .par_iter()
        .map(|ep| {
            let values: Vec<f64> = ep
                .steps
                .iter()
                .map(|s| policy.forward(&s.obs, &s.state).value)
                .collect();
            let rewards: Vec<f64> = ep.steps.iter().map(|s| s.reward).collect();
            // episodes always end in a terminal state
            compute_gae(&rewards, &values, 0.0, config.discount, config.gae_lambda)
        })
        .collect();
    let (mut adv, ret): (Vec<Vec<f64>>, Vec<Vec<f64>>) = per_episode.into_iter().unzip();
    if config.normalize_advantages {
        let mut flat: Vec<f64> = adv.iter().flatten().copied().collect();
        normalize(&mut flat);
        let mut it = flat.into_iter();
        for ep in &mut adv {
            for a in ep.iter_mut() {
                *a = it.next().expect("same length");
            }
        }
    }
    (adv, ret)
}

pub fn train<E: Environment + ?Sized>(
    env: &mut E,
    config: &PpoConfig,
    seed: u64,
) -> Result<(RecurrentPolicy, TrainingLog), PpoError> {
    train_with_callback(env, config, seed, |_, _| Ok(()))
}

/// Trains from a fresh initialization. `on_iteration` runs after each
/// iteration with its log row and the updated policy, e.g. to checkpoint.
pub fn train_with_callback<E, F>(
    env: &mut E,
    config: &PpoConfig,
    seed: u64,
    mut on_iteration: F,
) -> Result<(RecurrentPolicy, TrainingLog), PpoError>
where
    E: Environment + ?Sized,
    F: FnMut(&IterationLog, &RecurrentPolicy) -> Result<(), PpoError>,
{
    config.validate()?;
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let policy = init_policy(env, config, &mut master)?;
    train_from(env, policy, config, &mut master, &mut on_iteration)
}

/// The network `train` starts from for this seed.
pub fn initial_policy<E: Environment + ?Sized>(
    env: &E,
    config: &PpoConfig,
    seed: u64,
) -> Result<RecurrentPolicy, PpoError> {
    init_policy(env, config, &mut ChaCha8Rng::seed_from_u64(seed))
}

fn init_policy<E: Environment + ?Sized>(
    env: &E,
    config: &PpoConfig,
    master: &mut ChaCha8Rng,
) -> Result<RecurrentPolicy, PpoError> {
    Ok(RecurrentPolicy::new(
        env.obs_dim(),
        env.action_bounds().len(),
        config.hidden_size,
        master.random(),
    )?
    .with_bounds(env.action_bounds())?)
}

fn train_from<E, F>(
    env: &mut E,
    mut policy: RecurrentPolicy,
    config: &PpoConfig,
    master: &mut ChaCha8Rng,
    on_iteration: &mut F,
) -> Result<(RecurrentPolicy, TrainingLog), PpoError>
where
    E: Environment + ?Sized,
    F: FnMut(&IterationLog, &RecurrentPolicy) -> Result<(), PpoError>,
{
    let mut adam = Adam::new(
        policy.num_params(),
        config.learning_rate,
        config.adam_betas,
        config.adam_eps,
        config.weight_decay,
    );
    let mut log = TrainingLog::default();
    let mut frames = 0;
    let mut iteration = 0;
    while frames < config.total_timesteps {
        let batch = collect_batch(env, &policy, config, master.random())?;
        frames += batch.frames();
        let last_good = policy.clone();
        let lengths: Vec<usize> = batch.episodes.iter().map(|e| e.steps.len()).collect();
        let mut order: Vec<usize> = (0..batch.episodes.len()).collect();
        let mut last = LossComponents::default();
        for epoch in 0..config.num_epochs {
            let (adv, ret) = batch_advantages(&policy, &batch, config);
            order.shuffle(master);
            let mut sum = LossComponents::default();
            let groups = episode_groups(&order, &lengths, config.sub_batch);
            for group in &groups {
                let samples: Vec<Sample> = group
                    .iter()
                    .flat_map(|&e| {
                        let ep = &batch.episodes[e];
                        ep.steps.iter().enumerate().map(move |(t, s)| (e, t, s))
                    })
                    .map(|(e, t, s)| Sample {
                        obs: &s.obs,
                        state: &s.state,
                        u: &s.u,
                        old_log_prob: s.log_prob,
                        advantage: adv[e][t],
                        ret: ret[e][t],
                    })
                    .collect();
                let (comps, grad) = ppo_loss_and_grad(&policy, &samples, config);
                if !comps.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                    return Err(PpoError::NonFiniteLoss {
                        iteration,
                        epoch,
                        components: comps,
                    });
                }
                adam.step(policy.params_mut(), &grad);
                sum.clip += comps.clip;
                sum.value += comps.value;
                sum.entropy += comps.entropy;
                sum.objective += comps.objective;
            }
            let k = groups.len() as f64;
            last = LossComponents {
                clip: sum.clip / k,
                value: sum.value / k,
                entropy: sum.entropy / k,
                objective: sum.objective / k,
            };
        }
        if !policy.all_finite() {
            return Err(PpoError::Diverged {
                iteration,
                last_good: Box::new(last_good),
            });
        }
        let row = IterationLog {
            iteration,
            frames,
            episodes: batch.episodes.len(),
            mean_reward: batch.mean_episode_reward(),
            capture_rate: batch.capture_rate(),
            loss: last.loss(),
            clip: last.clip,
            value: last.value,
            entropy: last.entropy,
        };
        on_iteration(&row, &policy)?;
        log.iterations.push(row);
        iteration += 1;
    }
    Ok((policy, log))
}
