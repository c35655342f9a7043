#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_evac::env::EnvError;
use uav_evac::policy::{RecurrentPolicy, RecurrentState};
use uav_evac::ppo::{ppo_loss, ppo_loss_and_grad, Environment, PpoConfig, Sample, Transition};

/// Fixed-length episodes; reward favors actions near a seed-dependent target.
pub struct ToyEnv {
    len: usize,
    t: usize,
    target: f64,
}

impl ToyEnv {
    pub fn new(len: usize) -> Self {
        Self { len, t: 0, target: 0.0 }
    }

    fn obs(&self) -> Vec<f64> {
        vec![self.target, self.t as f64 / self.len as f64, 1.0]
    }
}

impl Environment for ToyEnv {
    fn obs_dim(&self) -> usize {
        3
    }

    fn action_bounds(&self) -> Vec<(f64, f64)> {
        vec![(0.0, 5.0), (-std::f64::consts::PI, std::f64::consts::PI)]
    }

    fn reset(&mut self, seed: u64) -> Result<Vec<f64>, EnvError> {
        self.t = 0;
        self.target = ChaCha8Rng::seed_from_u64(seed).random_range(-1.0..1.0);
        Ok(self.obs())
    }

    fn step(&mut self, action: &[f64]) -> Result<Transition, EnvError> {
        self.t += 1;
        let done = self.t >= self.len;
        Ok(Transition {
            obs: self.obs(),
            reward: -(action[1] - self.target).abs(),
            done,
            captured: done && (action[1] - self.target).abs() < 0.5,
        })
    }
}

/// Advantages as the literal double sum of discounted TD errors.
pub fn brute_force_gae(r: &[f64], v: &[f64], boot: f64, g: f64, l: f64) -> Vec<f64> {
    let n = r.len();
    let value = |t: usize| if t < n { v[t] } else { boot };
    (0..n)
        .map(|t| {
            (t..n)
                .map(|k| (g * l).powi((k - t) as i32) * (r[k] + g * value(k + 1) - v[k]))
                .sum()
        })
        .collect()
}

/// Three consecutive steps of one episode.
pub struct StepBatch {
    pub obs: Vec<Vec<f64>>,
    pub states: Vec<RecurrentState>,
    pub us: Vec<Vec<f64>>,
    pub old: Vec<f64>,
    pub adv: Vec<f64>,
    pub ret: Vec<f64>,
}

impl StepBatch {
    /// Stored log-probs are offset so ratios land on both sides of the clip
    /// range, and value errors straddle the smooth-L1 knee.
    pub fn rollout(policy: &RecurrentPolicy) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut state = policy.initial_state();
        let mut b = StepBatch {
            obs: vec![],
            states: vec![],
            us: vec![],
            old: vec![],
            adv: vec![],
            ret: vec![],
        };
        let offsets = [0.05, -0.6, 0.4];
        let advs = [1.3, 0.8, -0.9];
        let value_err = [0.4, -2.0, 1.5];
        for t in 0..3 {
            let x: Vec<f64> = (0..policy.obs_dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let out = policy.act(&x, &state, &mut rng, false);
            b.obs.push(x);
            b.states.push(state.clone());
            b.us.push(out.u.clone());
            b.old.push(out.log_prob - offsets[t]);
            b.adv.push(advs[t]);
            b.ret.push(out.value + value_err[t]);
            state = out.state;
        }
        b
    }

    pub fn samples(&self) -> Vec<Sample<'_>> {
        (0..self.obs.len())
            .map(|t| Sample {
                obs: &self.obs[t],
                state: &self.states[t],
                u: &self.us[t],
                old_log_prob: self.old[t],
                advantage: self.adv[t],
                ret: self.ret[t],
            })
            .collect()
    }
}

fn grad_policy() -> RecurrentPolicy {
    RecurrentPolicy::new(3, 2, 4, 6)
        .unwrap()
        .with_bounds(ToyEnv::new(4).action_bounds())
        .unwrap()
}

/// Largest relative error between the analytic loss gradient and
/// Richardson-extrapolated central differences, over every parameter of a
/// hidden-4 policy on a 3-step batch.
pub fn gradient_check_worst() -> f64 {
    let cfg = PpoConfig {
        entropy_coef: 0.05,
        ..PpoConfig::default()
    };
    let mut policy = grad_policy();
    let batch = StepBatch::rollout(&policy);
    let samples = batch.samples();
    let (_, grad) = ppo_loss_and_grad(&policy, &samples, &cfg);
    // O(h^4) truncation with a step large enough to keep rounding noise far
    // below the smallest gradients
    let mut central = |i: usize, h: f64| {
        let x = policy.params()[i];
        policy.params_mut()[i] = x + h;
        let up = ppo_loss(&policy, &samples, &cfg).loss();
        policy.params_mut()[i] = x - h;
        let down = ppo_loss(&policy, &samples, &cfg).loss();
        policy.params_mut()[i] = x;
        (up - down) / (2.0 * h)
    };
    let h = 1e-3;
    let mut worst: f64 = 0.0;
    for (i, g) in grad.iter().enumerate() {
        let numeric = (4.0 * central(i, h / 2.0) - central(i, h)) / 3.0;
        let scale = g.abs().max(numeric.abs());
        if scale > 0.0 {
            worst = worst.max((g - numeric).abs() / scale);
        }
    }
    worst
}

/// |clip term - mean advantage| when the stored log-probs come from the
/// policy being evaluated.
pub fn ratio_identity_gap() -> f64 {
    let policy = grad_policy();
    let mut batch = StepBatch::rollout(&policy);
    for t in 0..3 {
        let out = policy.forward(&batch.obs[t], &batch.states[t]);
        batch.old[t] = policy.distribution(&out).log_prob(&batch.us[t]);
    }
    let clip = ppo_loss(&policy, &batch.samples(), &PpoConfig::default()).clip;
    (clip - batch.adv.iter().sum::<f64>() / 3.0).abs()
}
