use super::RescuePolicy;
use crate::env::{JointAction, Observation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform draws over the joint action box; the reference point for learning.
#[derive(Debug, Clone)]
pub struct RandomPolicy {
    bounds: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
}

/// Stream id for per-episode policy randomness, apart from the env streams.
pub(crate) const POLICY_STREAM: u64 = 3;

pub(crate) fn policy_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(POLICY_STREAM);
    rng
}

impl RandomPolicy {
    pub fn new(selection_radius: f64) -> Self {
        Self {
            bounds: JointAction::bounds(selection_radius).to_vec(),
            rng: policy_rng(0),
        }
    }
}

impl RescuePolicy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn reset(&mut self, episode_seed: u64) {
        self.rng = policy_rng(episode_seed);
    }

    fn act(&mut self, _obs: &Observation) -> JointAction {
        let v: Vec<f64> = self
            .bounds
            .iter()
            .map(|&(lo, hi)| self.rng.random_range(lo..=hi))
            .collect();
        JointAction::from_slice(&v)
    }
}
