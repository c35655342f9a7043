use super::PpoConfig;
use crate::policy::{RecurrentPolicy, RecurrentState, TanhNormal};
use rayon::prelude::*;

/// One stored step, ready for the surrogate loss.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub obs: &'a [f64],
    /// Recurrent state the behavior policy saw before acting.
    pub state: &'a RecurrentState,
    pub u: &'a [f64],
    pub old_log_prob: f64,
    pub advantage: f64,
    pub ret: f64,
}

/// Batch means of the three loss terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossComponents {
    pub clip: f64,
    pub value: f64,
    pub entropy: f64,
    /// `clip - critic_coef * value + entropy_coef * entropy`, to be maximized.
    pub objective: f64,
}

impl LossComponents {
    /// Quantity the optimizer minimizes.
    pub fn loss(&self) -> f64 {
        -self.objective
    }

    pub fn is_finite(&self) -> bool {
        self.clip.is_finite() && self.value.is_finite() && self.entropy.is_finite()
    }
}

pub fn clipped_surrogate(ratio: f64, advantage: f64, eps: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - eps, 1.0 + eps) * advantage)
}

pub fn smooth_l1(pred: f64, target: f64) -> f64 {
    let d = (pred - target).abs();
    if d < 1.0 {
        0.5 * d * d
    } else {
        d - 0.5
    }
}

fn smooth_l1_grad(pred: f64, target: f64) -> f64 {
    let d = pred - target;
    if d.abs() < 1.0 {
        d
    } else {
        d.signum()
    }
}

#[derive(Default)]
struct Partial {
    clip: f64,
    value: f64,
    entropy: f64,
    grad: Vec<f64>,
}

fn accumulate(policy: &RecurrentPolicy, samples: &[Sample], config: &PpoConfig, with_grad: bool, n: f64) -> Partial {
    let mut part = Partial {
        grad: if with_grad {
            vec![0.0; policy.num_params()]
        } else {
            Vec::new()
        },
        ..Partial::default()
    };
    let eps = config.clip;
    for s in samples {
        let (out, cache) = policy.forward_cached(s.obs, s.state);
        let dist = TanhNormal::new(&out.action_mean, &out.action_log_sd, policy.bounds());
        let log_prob = dist.log_prob(s.u);
        let ratio = (log_prob - s.old_log_prob).exp();
        part.clip += clipped_surrogate(ratio, s.advantage, eps);
        part.value += smooth_l1(out.value, s.ret);
        part.entropy += dist.entropy();
        if !with_grad {
            continue;
        }
        // derivatives of the loss (negated objective), already averaged
        let unclipped_active = ratio * s.advantage <= ratio.clamp(1.0 - eps, 1.0 + eps) * s.advantage;
        let d_logp = if unclipped_active {
            -s.advantage * ratio / n
        } else {
            0.0
        };
        let (gm, gs) = dist.log_prob_grad(s.u);
        let d_mean: Vec<f64> = gm.iter().map(|g| d_logp * g).collect();
        let d_log_sd: Vec<f64> = gs.iter().map(|g| d_logp * g - config.entropy_coef / n).collect();
        let d_value = config.critic_coef * smooth_l1_grad(out.value, s.ret) / n;
        policy.backward(&cache, &d_mean, &d_log_sd, d_value, &mut part.grad);
    }
    part
}

const CHUNK: usize = 32;

fn evaluate(
    policy: &RecurrentPolicy,
    samples: &[Sample],
    config: &PpoConfig,
    with_grad: bool,
) -> (LossComponents, Vec<f64>) {
    let n = samples.len().max(1) as f64;
    // fixed chunking and an in-order reduction keep results bit-identical
    // regardless of thread scheduling
    let parts: Vec<Partial> = samples
        .par_chunks(CHUNK)
        .map(|chunk| accumulate(policy, chunk, config, with_grad, n))
        .collect();
    let mut clip = 0.0;
    let mut value = 0.0;
    let mut entropy = 0.0;
    let mut grad = if with_grad {
        vec![0.0; policy.num_params()]
    } else {
        Vec::new()
    };
    for p in parts {
        clip += p.clip;
        value += p.value;
        entropy += p.entropy;
        for (g, pg) in grad.iter_mut().zip(&p.grad) {
            *g += pg;
        }
    }
    let (clip, value, entropy) = (clip / n, value / n, entropy / n);
    let comps = LossComponents {
        clip,
        value,
        entropy,
        objective: clip - config.critic_coef * value + config.entropy_coef * entropy,
    };
    (comps, grad)
}

/// Clipped surrogate, value and entropy terms over a slice of samples.
pub fn ppo_loss(policy: &RecurrentPolicy, samples: &[Sample], config: &PpoConfig) -> LossComponents {
    evaluate(policy, samples, config, false).0
}

/// As [`ppo_loss`], plus the gradient of [`LossComponents::loss`] with
/// respect to every parameter.
pub fn ppo_loss_and_grad(
    policy: &RecurrentPolicy,
    samples: &[Sample],
    config: &PpoConfig,
) -> (LossComponents, Vec<f64>) {
    evaluate(policy, samples, config, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_examples() {
        assert!((clipped_surrogate(2.0, 1.0, 0.2) - 1.2).abs() < 1e-12);
        assert_eq!(clipped_surrogate(1.0, -3.0, 0.2), -3.0);
        // negative advantage keeps the pessimistic unclipped branch
        assert!((clipped_surrogate(2.0, -1.0, 0.2) - -2.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_l1_branches() {
        assert_eq!(smooth_l1(1.0, 1.0), 0.0);
        assert_eq!(smooth_l1(0.5, 0.0), 0.125);
        assert_eq!(smooth_l1(-3.0, 0.0), 2.5);
    }
}
